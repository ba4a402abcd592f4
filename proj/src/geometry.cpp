#include "billiards/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "billiards/errors.hpp"

namespace billiards {

namespace {

constexpr double kPi = 3.14159265358979323846;

// State layout for the coupled geodesic + two Jacobi solutions:
// [x(3), w(3), Ja, Ja', Jb, Jb'].
constexpr std::size_t kFlowDim = 10;

Vec3 get3(const OdeState<kFlowDim>& y, std::size_t at) { return {y[at], y[at + 1], y[at + 2]}; }
void put3(OdeState<kFlowDim>& y, std::size_t at, const Vec3& v) {
    y[at] = v.x;
    y[at + 1] = v.y;
    y[at + 2] = v.z;
}

}  // namespace

void tangent_basis(const Vec3& p, Vec3& e1, Vec3& e2) {
    const Vec3 seed = std::fabs(p.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    e1 = normalized(reject(seed, p));
    e2 = cross(p, e1);
}

Metric::Metric(MetricKind kind, HarmonicExpansion expansion, OdeOptions ode)
    : kind_(kind), expansion_(std::move(expansion)), ode_(ode) {
    sample_curvature();
}

Metric Metric::round() { return Metric(MetricKind::Round, HarmonicExpansion{}, OdeOptions{}); }

Metric Metric::conformal(const std::vector<Harmonic>& harmonics, OdeOptions ode) {
    return Metric(MetricKind::Conformal, HarmonicExpansion(harmonics), ode);
}

double Metric::phi(const Vec3& p) const {
    if (expansion_.zero()) return 0.0;
    return expansion_.value(normalized(p));
}

Vec3 Metric::grad_phi(const Vec3& p) const {
    if (expansion_.zero()) return {};
    return expansion_.tangent_gradient(normalized(p));
}

double Metric::laplace0_phi(const Vec3& p) const {
    if (expansion_.zero()) return 0.0;
    return expansion_.sphere_laplacian(normalized(p));
}

double Metric::gauss_curvature(const Vec3& p) const {
    if (expansion_.zero()) return 1.0;
    const Vec3 u = normalized(p);
    return std::exp(-2.0 * expansion_.value(u)) * (1.0 - expansion_.sphere_laplacian(u));
}

void Metric::sample_curvature() {
    if (expansion_.zero()) {
        curvature_floor_ = curvature_ceiling_ = 1.0;
        max_abs_phi_ = 0.0;
        return;
    }
    // Dense latitude-longitude sweep; resolution generous for degree <= 8.
    const int n_lat = 181, n_lon = 360;
    double kmin = 1e300, kmax = -1e300, pmax = 0.0;
    for (int i = 0; i <= n_lat; ++i) {
        const double th = kPi * i / n_lat;
        for (int j = 0; j < n_lon; ++j) {
            const double ph = 2.0 * kPi * j / n_lon;
            const Vec3 p{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
            const double k = gauss_curvature(p);
            kmin = std::min(kmin, k);
            kmax = std::max(kmax, k);
            pmax = std::max(pmax, std::fabs(expansion_.value(p)));
        }
    }
    curvature_floor_ = kmin;
    curvature_ceiling_ = kmax;
    max_abs_phi_ = pmax;
    if (!(kmin > 0.0))
        throw Error(ErrorKind::NotConvex,
                    "Gaussian curvature not positive everywhere (sampled min " + std::to_string(kmin) + ")");
}

double Metric::injectivity_lower_bound() const {
    if (kind_ == MetricKind::Round) return kPi;
    // No conjugate point before pi / sqrt(K_max); closed-geodesic lengths
    // are controlled through the conformal factor.  Both bounds are
    // conservative for the small expansions this project uses, and tables
    // additionally run a direct conjugate-point audit.
    return std::min(kPi / std::sqrt(curvature_ceiling_), kPi * std::exp(-max_abs_phi_));
}

GeodesicState Metric::geodesic_step(const GeodesicState& state, double t) const {
    return flow_with_jacobi(state, t).state;
}

Metric::FlowWithJacobi Metric::flow_with_jacobi(const GeodesicState& start, double t) const {
    if (t < 0.0) throw Error(ErrorKind::IntegrationFailure, "negative arclength step");
    if (t == 0.0) return {start, Mat2::identity()};
    if (kind_ == MetricKind::Round) {
        const double c = std::cos(t), s = std::sin(t);
        GeodesicState out;
        out.point = c * start.point + s * start.direction;
        out.direction = c * start.direction - s * start.point;
        out.elapsed = start.elapsed + t;
        // K == 1: the (J, J') propagator is a rotation.
        return {out, Mat2{c, s, -s, c}};
    }

    OdeState<kFlowDim> y{};
    put3(y, 0, start.point);
    put3(y, 3, start.direction);
    y[6] = 1.0;  // Ja = (1, 0)
    y[9] = 1.0;  // Jb = (0, 1)

    auto rhs = [this](double, const OdeState<kFlowDim>& s, OdeState<kFlowDim>& dy) {
        const Vec3 x = normalized(get3(s, 0));
        const Vec3 w = get3(s, 3);
        const Vec3 gp = grad_phi(x);
        const double w2 = dot(w, w);
        const Vec3 acc = w2 * (gp - x) - 2.0 * dot(gp, w) * w;
        put3(dy, 0, w);
        put3(dy, 3, acc);
        const double K = gauss_curvature(x);
        dy[6] = s[7];
        dy[7] = -K * s[6];
        dy[8] = s[9];
        dy[9] = -K * s[8];
    };
    integrate<kFlowDim>(rhs, y, 0.0, t, ode_);

    GeodesicState out;
    out.point = normalized(get3(y, 0));
    Vec3 w = reject(get3(y, 3), out.point);
    // Restore the exact g-unit-speed invariant (roundoff-level correction).
    out.direction = w / (std::exp(phi(out.point)) * norm(w));
    out.elapsed = start.elapsed + t;
    return {out, Mat2{y[6], y[8], y[7], y[9]}};
}

std::optional<double> Metric::first_jacobi_zero(const GeodesicState& start, const JacobiState& j0,
                                                double horizon) const {
    if (!(horizon > 0.0)) throw Error(ErrorKind::IntegrationFailure, "horizon must be positive");
    if (j0.value == 0.0 && j0.derivative == 0.0) return std::nullopt;

    if (kind_ == MetricKind::Round) {
        // J(t) = J cos t + J' sin t.
        if (j0.value == 0.0) return horizon >= kPi ? std::optional<double>(kPi) : std::nullopt;
        double t0 = std::atan2(-j0.value, j0.derivative);  // tan t0 = -J/J'
        while (t0 <= 0.0) t0 += kPi;
        return t0 <= horizon ? std::optional<double>(t0) : std::nullopt;
    }

    OdeState<kFlowDim> y{};
    put3(y, 0, start.point);
    put3(y, 3, start.direction);
    y[6] = j0.value;
    y[7] = j0.derivative;

    auto rhs = [this](double, const OdeState<kFlowDim>& s, OdeState<kFlowDim>& dy) {
        const Vec3 x = normalized(get3(s, 0));
        const Vec3 w = get3(s, 3);
        const Vec3 gp = grad_phi(x);
        const double w2 = dot(w, w);
        put3(dy, 0, w);
        put3(dy, 3, w2 * (gp - x) - 2.0 * dot(gp, w) * w);
        const double K = gauss_curvature(x);
        dy[6] = s[7];
        dy[7] = -K * s[6];
        dy[8] = 0.0;
        dy[9] = 0.0;
    };

    double bracket_lo = -1.0, bracket_hi = -1.0;
    OdeState<kFlowDim> y_lo{};
    bool crossed = false;
    const double j_start = j0.value;
    integrate_observed<kFlowDim>(
        rhs, y, 0.0, horizon, ode_,
        [&](double tp, const OdeState<kFlowDim>& yp, double tc, const OdeState<kFlowDim>& yc) {
            const double a = yp[6], b = yc[6];
            // Skip the departure zero itself when J(0) == 0.
            if (j_start == 0.0 && tp == 0.0) {
                if (b == 0.0) return false;
                return false;
            }
            if (a == 0.0 || a * b <= 0.0) {
                bracket_lo = tp;
                bracket_hi = tc;
                y_lo = yp;
                crossed = true;
                return true;
            }
            return false;
        });
    if (!crossed) return std::nullopt;

    // Bisection by re-integration over the bracketing step.
    double lo = bracket_lo, hi = bracket_hi;
    double f_lo = y_lo[6];
    for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        OdeState<kFlowDim> ym = y_lo;
        OdeOptions local = ode_;
        local.initial_step = std::max(1e-6, (mid - bracket_lo) * 0.1);
        integrate<kFlowDim>(rhs, ym, bracket_lo, mid, local);
        if (f_lo * ym[6] <= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

GeodesicConnection Metric::connect(const Vec3& p_in, const Vec3& q_in) const {
    const Vec3 p = normalized(p_in), q = normalized(q_in);
    if (kind_ == MetricKind::Round) {
        GeodesicConnection c;
        const double cosd = std::clamp(dot(p, q), -1.0, 1.0);
        c.length = std::acos(cosd);
        Vec3 tp = reject(q, p);
        if (norm(tp) < 1e-14) {
            // Coincident or antipodal: distance is 0 or pi; any direction
            // serves for the degenerate antipodal family.
            Vec3 e1, e2;
            tangent_basis(p, e1, e2);
            c.depart_dir = e1;
            c.arrive_dir = (cosd > 0.0) ? e1 : normalized(reject(e1, q));
            return c;
        }
        c.depart_dir = normalized(tp);
        c.arrive_dir = normalized(reject(p, q)) * -1.0;
        return c;
    }
    return connect_conformal(p, q);
}

GeodesicConnection Metric::connect_conformal(const Vec3& p, const Vec3& q) const {
    // Shooting with Newton on the endpoint miss.  Unknowns: departure angle
    // xi in the tangent plane at p and arclength T.  The derivative of the
    // endpoint with respect to xi is the normal Jacobi field with
    // (J, J')(0) = (0, 1); with respect to T it is the velocity.
    Vec3 e1, e2;
    tangent_basis(p, e1, e2);
    const Vec3 chord = reject(q, p);
    if (norm(chord) < 1e-14) {
        if (dot(p, q) > 0.0) return {0.0, e1, e1, false};
        throw Error(ErrorKind::NoConvergence, "antipodal endpoints on a conformal metric");
    }

    const double xi_guess = std::atan2(dot(chord, e2), dot(chord, e1));
    const double round_len = std::acos(std::clamp(dot(p, q), -1.0, 1.0));
    // Conformal length scale adjusted by the factor at the midpoint chord.
    const double t_guess = round_len * std::exp(phi(normalized(p + q)));

    struct Shot {
        double xi, t;
        Vec3 end, end_dir, normal;
        double j, jp;  // (0,1)-Jacobi data at the endpoint
    };

    auto shoot = [&](double xi, double t) -> Shot {
        GeodesicState s0;
        s0.point = p;
        const Vec3 dir0 = std::cos(xi) * e1 + std::sin(xi) * e2;
        s0.direction = g_normalize(p, dir0);
        const FlowWithJacobi fw = flow_with_jacobi(s0, t);
        Shot sh;
        sh.xi = xi;
        sh.t = t;
        sh.end = fw.state.point;
        sh.end_dir = fw.state.direction;
        sh.normal = cross(fw.state.point, fw.state.direction);  // round-unit scaled later
        sh.j = fw.propagator.m01;   // J from (0,1) start
        sh.jp = fw.propagator.m11;  // J'
        return sh;
    };

    auto solve_from = [&](double xi0, double t0) -> std::optional<Shot> {
        double xi = xi0, t = std::max(t0, 1e-8);
        for (int it = 0; it < 60; ++it) {
            Shot sh = shoot(xi, t);
            const Vec3 miss = q - sh.end;
            // Solve the 2x2 system in the tangent plane at the endpoint:
            //   d(end)/dt  = velocity (ambient norm e^{-phi})
            //   d(end)/dxi = J * parallel-normal; the normal field along a
            //                geodesic is the rotated velocity, ambient norm
            //                e^{-phi}, and J is measured in g-units.
            const Vec3 a_t = sh.end_dir;
            const Vec3 a_xi = sh.normal * sh.j;
            const double m11 = dot(a_t, a_t), m12 = dot(a_t, a_xi);
            const double m22 = dot(a_xi, a_xi);
            const double r1 = dot(miss, a_t), r2 = dot(miss, a_xi);
            const double det = m11 * m22 - m12 * m12;
            if (std::fabs(det) < 1e-30) return std::nullopt;
            const double dt = (r1 * m22 - r2 * m12) / det;
            const double dxi = (m11 * r2 - m12 * r1) / det;
            const double step_cap = 0.5;
            t += std::clamp(dt, -step_cap, step_cap);
            xi += std::clamp(dxi, -step_cap, step_cap);
            if (!(t > 1e-10) || !(t < 2.0 * kPi)) return std::nullopt;
            if (norm(miss) < 1e-12 && std::fabs(dt) < 1e-12 && std::fabs(dxi) < 1e-12) {
                sh.xi = xi;
                sh.t = t;
                return sh;
            }
        }
        return std::nullopt;
    };

    std::vector<Shot> found;
    auto consider = [&](std::optional<Shot> s) {
        if (!s) return;
        for (const Shot& f : found)
            if (std::fabs(f.t - s->t) < 1e-8) return;
        found.push_back(*s);
    };

    consider(solve_from(xi_guess, t_guess));
    if (found.empty()) {
        // Bracketed restarts: fan the initial angle around the chord guess.
        for (double dxi : {-0.3, 0.3, -0.6, 0.6, -1.0, 1.0}) {
            consider(solve_from(xi_guess + dxi, t_guess));
            if (!found.empty()) break;
        }
    }
    if (found.empty())
        throw Error(ErrorKind::NoConvergence, "geodesic shooting failed after restarts");

    std::sort(found.begin(), found.end(), [](const Shot& a, const Shot& b) { return a.t < b.t; });
    const Shot& best = found.front();

    GeodesicConnection c;
    c.length = best.t;
    const Vec3 dir0 = std::cos(best.xi) * e1 + std::sin(best.xi) * e2;
    c.depart_dir = g_normalize(p, dir0);
    c.arrive_dir = best.end_dir;
    c.ambiguous = found.size() > 1 && std::fabs(found[1].t - found[0].t) < 1e-9;
    return c;
}

}  // namespace billiards
