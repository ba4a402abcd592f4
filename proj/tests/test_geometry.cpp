#include <cmath>

#include "billiards/geometry.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace billiards;

namespace {

Metric test_conformal(double scale = 0.05) {
    // A couple of mid-degree modes; small enough to keep K > 0 comfortably.
    return Metric::conformal({{2, 1, scale}, {3, -2, 0.6 * scale}, {1, 0, 0.4 * scale}});
}

}  // namespace

TEST_CASE("round metric has unit curvature everywhere") {
    const Metric m = Metric::round();
    auto g = oracles::rng(11);
    for (int i = 0; i < 20; ++i) {
        const Vec3 p = oracles::random_unit(g);
        CHECK(m.gauss_curvature(p) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(m.curvature_floor() == doctest::Approx(1.0));
}

TEST_CASE("conformal metric with zero coefficients reduces to round") {
    const Metric m = Metric::conformal({{4, 2, 0.0}});
    auto g = oracles::rng(12);
    for (int i = 0; i < 10; ++i) {
        const Vec3 p = oracles::random_unit(g);
        CHECK(m.gauss_curvature(p) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m.phi(p) == 0.0);
    }
}

TEST_CASE("curvature matches finite-difference Laplacian of phi") {
    // K = e^{-2 phi} (1 - lap0 phi); the analytic Laplacian must agree with
    // a second-difference oracle along great circles to O(h^2).
    const double eps = 0.03;
    const Metric m = Metric::conformal({{3, 1, eps}});
    auto g = oracles::rng(13);
    const double h = 1e-3;
    for (int i = 0; i < 12; ++i) {
        const Vec3 p = oracles::random_unit(g);
        const double lap_fd =
            oracles::round_laplacian_fd([&](const Vec3& q) { return m.phi(q); }, p, h);
        CHECK(std::fabs(m.laplace0_phi(p) - lap_fd) < 1e-5);
        const double k_fd = std::exp(-2.0 * m.phi(p)) * (1.0 - lap_fd);
        CHECK(m.gauss_curvature(p) == doctest::Approx(k_fd).epsilon(1e-4));
    }
}

TEST_CASE("harmonic expansion eigenvalue identity") {
    // lap Y_lm = -l(l+1) Y_lm, checked against the FD oracle per mode.
    for (auto [l, mm] : {std::pair{1, 0}, {2, 2}, {4, -3}, {6, 5}, {8, -8}}) {
        HarmonicExpansion e({{l, mm, 1.0}});
        auto g = oracles::rng(100 + l * 10 + mm);
        const Vec3 p = oracles::random_unit(g);
        const double lap_fd =
            oracles::round_laplacian_fd([&](const Vec3& q) { return e.value(normalized(q)); }, p, 1e-3);
        const double expected = -l * (l + 1.0) * e.value(p);
        CHECK(std::fabs(lap_fd - expected) < 5e-4 * (std::fabs(expected) + 1.0));
    }
}

TEST_CASE("round geodesics are great circles and close after 2 pi") {
    const Metric m = Metric::round();
    auto g = oracles::rng(14);
    const Vec3 p = oracles::random_unit(g);
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    GeodesicState s{p, e1, 0.0};
    const GeodesicState out = m.geodesic_step(s, 2.0 * M_PI);
    CHECK(norm(out.point - p) < 1e-8);
    CHECK(norm(out.direction - e1) < 1e-8);
}

TEST_CASE("zero-length step is the identity") {
    for (const Metric& m : {Metric::round(), test_conformal()}) {
        auto g = oracles::rng(15);
        const Vec3 p = oracles::random_unit(g);
        Vec3 e1, e2;
        tangent_basis(p, e1, e2);
        GeodesicState s{p, m.g_normalize(p, e1), 0.0};
        const GeodesicState out = m.geodesic_step(s, 0.0);
        CHECK(norm(out.point - s.point) == 0.0);
        CHECK(norm(out.direction - s.direction) == 0.0);
    }
}

TEST_CASE("conformal geodesic step self-converges under tolerance tightening") {
    const Metric m = test_conformal();
    auto g = oracles::rng(16);
    const Vec3 p = oracles::random_unit(g);
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    GeodesicState s{p, m.g_normalize(p, normalized(e1 + 0.3 * e2)), 0.0};

    const GeodesicState a = m.geodesic_step(s, 1.0);
    Metric tight = m;
    OdeOptions opts = m.ode_options();
    opts.abs_tol = opts.rel_tol = 1e-12;
    opts.initial_step = 5e-4;
    tight.set_ode_options(opts);
    const GeodesicState b = tight.geodesic_step(s, 1.0);
    CHECK(norm(a.point - b.point) < 1e-9);
    CHECK(norm(a.direction - b.direction) < 1e-9);
}

TEST_CASE("unit speed and flow additivity") {
    const Metric m = test_conformal();
    auto g = oracles::rng(17);
    const Vec3 p = oracles::random_unit(g);
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    GeodesicState s{p, m.g_normalize(p, e2), 0.0};

    GeodesicState cur = s;
    for (int i = 0; i < 1000; ++i) {
        cur = m.geodesic_step(cur, 0.01);
        REQUIRE(std::fabs(m.g_norm(cur.point, cur.direction) - 1.0) < 1e-10);
        REQUIRE(std::fabs(norm(cur.point) - 1.0) < 1e-12);
        REQUIRE(std::fabs(dot(cur.point, cur.direction)) < 1e-10);
    }

    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const double t1 = u(g), t2 = u(g);
        const GeodesicState one = m.geodesic_step(s, t1 + t2);
        const GeodesicState two = m.geodesic_step(m.geodesic_step(s, t1), t2);
        CHECK(norm(one.point - two.point) < 1e-8);
        CHECK(norm(one.direction - two.direction) < 1e-8);
    }
}

TEST_CASE("round distance: closed forms") {
    const Metric m = Metric::round();
    auto g = oracles::rng(18);
    const Vec3 p = oracles::random_unit(g);
    CHECK(m.distance(p, -1.0 * p) == doctest::Approx(M_PI));
    CHECK(m.distance(p, p) == doctest::Approx(0.0));
    const Vec3 q = oracles::random_unit(g);
    CHECK(m.distance(p, q) == doctest::Approx(std::acos(dot(p, q))));
    CHECK(m.distance(p, q) == doctest::Approx(m.distance(q, p)));
}

TEST_CASE("conformal distance matches dense-graph shortest path") {
    const Metric m = test_conformal();
    auto g = oracles::rng(19);
    for (int i = 0; i < 3; ++i) {
        const Vec3 p = oracles::random_unit(g);
        Vec3 e1, e2;
        tangent_basis(p, e1, e2);
        std::uniform_real_distribution<double> u(0.2, 0.5);
        const double r = u(g);
        const Vec3 q = normalized(std::cos(r) * p + std::sin(r) * e1);
        const double d = m.distance(p, q);
        const double d_graph = oracles::graph_geodesic_distance(m, p, q);
        CHECK(std::fabs(d - d_graph) < 1e-4);
    }
}

TEST_CASE("distance symmetry and triangle inequality (conformal)") {
    const Metric m = test_conformal();
    auto g = oracles::rng(20);
    for (int i = 0; i < 4; ++i) {
        const Vec3 base = oracles::random_unit(g);
        Vec3 e1, e2;
        tangent_basis(base, e1, e2);
        std::uniform_real_distribution<double> u(-0.4, 0.4);
        auto nearby = [&] { return normalized(base + u(g) * e1 + u(g) * e2); };
        const Vec3 a = nearby(), b = nearby(), c = nearby();
        const double ab = m.distance(a, b);
        const double ba = m.distance(b, a);
        CHECK(std::fabs(ab - ba) < 1e-8);
        CHECK(ab <= m.distance(a, c) + m.distance(c, b) + 1e-8);
    }
}

TEST_CASE("connect returns consistent departure and arrival directions") {
    for (const Metric& m : {Metric::round(), test_conformal()}) {
        auto g = oracles::rng(21);
        const Vec3 p = oracles::random_unit(g);
        Vec3 e1, e2;
        tangent_basis(p, e1, e2);
        const Vec3 q = normalized(std::cos(0.4) * p + std::sin(0.4) * normalized(e1 + 0.5 * e2));
        const GeodesicConnection c = m.connect(p, q);
        const GeodesicState end = m.geodesic_step({p, c.depart_dir, 0.0}, c.length);
        CHECK(norm(end.point - q) < 1e-9);
        CHECK(norm(end.direction - c.arrive_dir) < 1e-9);
    }
}

TEST_CASE("round Jacobi transport closed form") {
    const Metric m = Metric::round();
    auto g = oracles::rng(22);
    const Vec3 p = oracles::random_unit(g);
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    GeodesicState s{p, e1, 0.0};
    for (double t : {0.3, 1.2, 2.9}) {
        const JacobiState j = m.jacobi_transport(s, {0.0, 1.0}, t);
        CHECK(j.value == doctest::Approx(std::sin(t)));
        CHECK(j.derivative == doctest::Approx(std::cos(t)));
    }
    const JacobiState z = m.jacobi_transport(s, {0.0, 0.0}, 1.0);
    CHECK(z.value == 0.0);
    CHECK(z.derivative == 0.0);
}

TEST_CASE("Jacobi transport: Wronskian conservation and linearity") {
    const Metric m = test_conformal();
    auto g = oracles::rng(23);
    const Vec3 p = oracles::random_unit(g);
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    GeodesicState s{p, m.g_normalize(p, e1), 0.0};

    for (double t : {0.5, 1.5, 3.0}) {
        const Mat2 w = m.jacobi_propagator(s, t);
        CHECK(std::fabs(w.det() - 1.0) < 1e-9);
    }

    const JacobiState j1 = m.jacobi_transport(s, {1.0, 0.25}, 1.0);
    const JacobiState j2 = m.jacobi_transport(s, {2.0, 0.5}, 1.0);
    CHECK(j2.value == doctest::Approx(2.0 * j1.value).epsilon(1e-10));
    CHECK(j2.derivative == doctest::Approx(2.0 * j1.derivative).epsilon(1e-10));
}

TEST_CASE("first conjugate time: round is pi, horizon respected") {
    const Metric m = Metric::round();
    auto g = oracles::rng(24);
    const Vec3 p = oracles::random_unit(g);
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    GeodesicState s{p, e1, 0.0};
    auto t1 = m.first_conjugate_time(s, 4.0);
    REQUIRE(t1.has_value());
    CHECK(*t1 == doctest::Approx(M_PI));
    CHECK(!m.first_conjugate_time(s, 3.0).has_value());
}

TEST_CASE("conformal conjugate time bracketed by integration refinements") {
    const Metric m = test_conformal();
    auto g = oracles::rng(25);
    for (int i = 0; i < 3; ++i) {
        const Vec3 p = oracles::random_unit(g);
        Vec3 e1, e2;
        tangent_basis(p, e1, e2);
        GeodesicState s{p, m.g_normalize(p, normalized(e1 + 0.2 * e2)), 0.0};
        auto t = m.first_conjugate_time(s, 4.5);
        REQUIRE(t.has_value());

        Metric tight = m;
        OdeOptions opts = m.ode_options();
        opts.abs_tol = opts.rel_tol = 1e-12;
        tight.set_ode_options(opts);
        auto t_ref = tight.first_conjugate_time(s, 4.5);
        REQUIRE(t_ref.has_value());
        CHECK(std::fabs(*t - *t_ref) < 1e-7);
        CHECK(*t > 2.0);
        CHECK(*t < 4.5);
    }
}
