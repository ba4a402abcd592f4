#include <cmath>

#include "billiards/errors.hpp"
#include "billiards/table.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace billiards;

namespace {

const Vec3 kPole{0.0, 0.0, 1.0};

Table circle_table(double alpha, int samples = 512) {
    TableBuildOptions opt;
    opt.samples = samples;
    return build_table(Metric::round(), kPole, alpha, {}, opt);
}

}  // namespace

TEST_CASE("round circle table: length and curvature closed forms") {
    const double alpha = M_PI / 4.0;
    const Table t = circle_table(alpha);
    CHECK(t.length() == doctest::Approx(2.0 * M_PI * std::sin(alpha)).epsilon(1e-12));
    for (double s : {0.0, 0.7, 2.2, t.length() * 0.99})
        CHECK(t.curvature_at(s) == doctest::Approx(1.0 / std::tan(alpha)).epsilon(1e-9));
    CHECK(t.curvature_at(1.0) == doctest::Approx(1.0).epsilon(1e-9));  // cot(pi/4) = 1
}

TEST_CASE("equator is rejected as not strictly convex") {
    CHECK_THROWS_AS(circle_table(M_PI / 2.0), Error);
    try {
        circle_table(M_PI / 2.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotConvex);
    }
}

TEST_CASE("gauss-bonnet residual is tiny for accepted tables") {
    const Table t = circle_table(0.6);
    CHECK(std::fabs(t.gauss_bonnet_residual()) < 1e-9);
    CHECK(t.boundary_curvature_integral() == doctest::Approx(2.0 * M_PI * std::cos(0.6)).epsilon(1e-10));
    CHECK(t.interior_curvature_integral() == doctest::Approx(2.0 * M_PI * (1.0 - std::cos(0.6))).epsilon(1e-10));

    const Table p = build_table(Metric::round(), kPole, 0.6, {{3, 0.01, 0.0}}, t.options());
    CHECK(std::fabs(p.gauss_bonnet_residual()) < 1e-6);
}

TEST_CASE("arclength parametrization: unit g-speed of frame tangent") {
    const Table t = build_table(Metric::round(), kPole, 0.7, {{2, 0.02, 0.0}, {3, 0.0, 0.015}});
    const Metric& m = t.metric();
    for (double s : {0.1, 1.0, 2.5, 4.0}) {
        const BoundaryFrame f = t.frame_at(s);
        CHECK(std::fabs(m.g_norm(f.point, f.tangent) - 1.0) < 1e-8);
        CHECK(std::fabs(m.g_norm(f.point, f.normal) - 1.0) < 1e-8);
        CHECK(std::fabs(dot(f.point, f.tangent)) < 1e-12);
    }
    const double h = 1e-6;
    for (double s : {0.3, 2.0}) {
        const Vec3 a = t.point_at(s - h), b = t.point_at(s + h);
        const double speed = t.metric().g_norm(t.point_at(s), (b - a) / (2.0 * h));
        CHECK(std::fabs(speed - 1.0) < 1e-6);
    }
}

TEST_CASE("curvature matches finite-difference Frenet oracle") {
    const Metric m = Metric::conformal({{2, 0, 0.02}, {3, 2, 0.015}});
    TableBuildOptions opt;
    opt.samples = 512;
    const Table t = build_table(m, kPole, 0.7, {{2, 0.01, 0.005}}, opt);

    auto kappa_fd = [&](double s) {
        const double h = 1e-4;
        const BoundaryFrame f0 = t.frame_at(s);
        const Vec3 pm = t.point_at(s - h), pp = t.point_at(s + h);
        const Vec3 d2 = (pp - 2.0 * f0.point + pm) / (h * h);
        Vec3 D = reject(d2, f0.point);
        const Vec3 gp = m.grad_phi(f0.point);
        const Vec3 Tv = f0.tangent;
        D += 2.0 * dot(gp, Tv) * Tv - dot(Tv, Tv) * gp;
        return m.g_dot(f0.point, D, f0.normal);
    };
    for (double s : {0.2, 1.1, 2.8, 3.9}) {
        CHECK(t.curvature_at(s) == doctest::Approx(kappa_fd(s)).epsilon(1e-5));
    }
}

TEST_CASE("psi <-> s maps are inverse") {
    const Table t = build_table(Metric::round(), kPole, 0.8, {{3, 0.03, -0.01}});
    for (double s : {0.0, 0.4, 1.9, 3.3, 4.9}) {
        CHECK(t.s_of_psi(t.psi_of_s(s)) == doctest::Approx(t.wrap_s(s)).epsilon(1e-10));
    }
    for (double psi : {0.1, 2.0, 4.4, 6.1}) {
        CHECK(t.psi_of_s(t.s_of_psi(psi)) == doctest::Approx(psi).epsilon(1e-10));
    }
}

TEST_CASE("normal perturbation: zero eps is the identity") {
    const Table t = circle_table(0.7);
    const Table p = normal_perturbation(t, 1.0, 0.0, 0.3);
    CHECK(p.profile().bumps.empty());
    CHECK(p.profile().radius == t.profile().radius);
}

TEST_CASE("normal perturbation: curvature shift, support, contact") {
    const Table t = circle_table(0.7);
    const double s0 = 1.0, eps = 0.01, width = t.length() / 20.0;
    const Table p = normal_perturbation(t, s0, eps, width);

    const double psi0 = t.psi_of_s(s0);
    CHECK(p.curvature_at_psi(psi0) - t.curvature_at_psi(psi0) == doctest::Approx(eps).epsilon(1e-6));

    Vec3 pt_old, dp_old, pt_new, dp_new;
    t.radial_point(psi0, pt_old, dp_old);
    p.radial_point(psi0, pt_new, dp_new);
    CHECK(norm(pt_new - pt_old) < 1e-12);
    CHECK(norm(normalized(dp_new) - normalized(dp_old)) < 1e-12);

    for (double off : {0.51 * width, width, 2.0 * width, -0.51 * width, -width}) {
        const double psi = t.psi_of_s(s0 + off);
        Vec3 a, da, b, db;
        t.radial_point(psi, a, da);
        p.radial_point(psi, b, db);
        CHECK(norm(a - b) < 1e-12);
    }

    const Table pp = normal_perturbation(p, s0, eps, width);
    CHECK(pp.curvature_at_psi(psi0) - t.curvature_at_psi(psi0) == doctest::Approx(2.0 * eps).epsilon(1e-5));
}

TEST_CASE("normal perturbation keeps convexity errors informative") {
    const Table t = circle_table(0.7);
    try {
        normal_perturbation(t, 0.5, -0.97 / std::tan(0.7), t.length() / 30.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK((e.kind() == ErrorKind::NotConvex || e.kind() == ErrorKind::NoConvergence));
    }
}

TEST_CASE("normal shift: distance, tangent transport, support") {
    const Table t = build_table(Metric::round(), kPole, 0.7, {{2, 0.015, 0.0}});
    // The curvature noise of a shift bump scales like delta / width^2, so
    // keep the shift small relative to the support.
    const double s0 = 2.0, delta = 1e-3, width = t.length() / 12.0;

    const Table sh = normal_shift(t, s0, delta, width);
    const double psi0 = t.psi_of_s(s0);

    Vec3 pt_old, dp_old, pt_new, dp_new;
    t.radial_point(psi0, pt_old, dp_old);
    sh.radial_point(psi0, pt_new, dp_new);

    CHECK(t.metric().distance(pt_old, pt_new) == doctest::Approx(delta).epsilon(1e-8));

    const double dr_old = t.profile().derivative(psi0);
    const double dr_new = sh.profile().derivative(psi0);
    const double j_old = std::sin(t.profile().value(psi0));
    const double j_new = std::sin(sh.profile().value(psi0));
    CHECK(std::atan2(j_new, dr_new) == doctest::Approx(std::atan2(j_old, dr_old)).epsilon(1e-9));

    const Table id = normal_shift(t, s0, 0.0, width);
    CHECK(id.profile().bumps.empty());
    for (double off : {0.51 * width, 1.5 * width}) {
        const double psi = t.psi_of_s(s0 + off);
        Vec3 a, da, b, db;
        t.radial_point(psi, a, da);
        sh.radial_point(psi, b, db);
        CHECK(norm(a - b) < 1e-12);
    }
}

TEST_CASE("conformal table builds and validates") {
    const Metric m = Metric::conformal({{2, 1, 0.02}, {1, 0, 0.01}});
    TableBuildOptions opt;
    opt.samples = 256;
    const Table t = build_table(m, kPole, 0.6, {}, opt);
    CHECK(std::fabs(t.gauss_bonnet_residual()) < 1e-6);
    CHECK(t.kappa_min_observed() > 0.5);
    CHECK(t.diameter() < m.injectivity_lower_bound());
    const BoundaryFrame f = t.frame_at(1.0);
    CHECK(std::fabs(norm(f.point) - 1.0) < 1e-12);
}
