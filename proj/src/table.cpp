#include "billiards/table.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "billiards/errors.hpp"
#include "billiards/ode.hpp"

namespace billiards {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_angle(double psi) {
    psi = std::fmod(psi, kTwoPi);
    return psi < 0.0 ? psi + kTwoPi : psi;
}

// Mollifier bump normalized to w(0) = 1: w(u) = e * exp(-1/(1-u^2)).
double bump_window(double u) {
    if (std::fabs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}
double bump_window_derivative(double u) {
    if (std::fabs(u) >= 1.0) return 0.0;
    const double d = 1.0 - u * u;
    return bump_window(u) * (-2.0 * u / (d * d));
}

// In-place iterative radix-2 FFT (n must be a power of two).
void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 1.0 : -1.0) * kTwoPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j], v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

// Antiderivative of the trigonometric interpolant of a smooth periodic
// sequence on [0, 2pi): S_j = integral from 0 to psi_j, total = full period.
void periodic_antiderivative(const std::vector<double>& f, std::vector<double>& S, double& total) {
    const std::size_t n = f.size();
    std::vector<std::complex<double>> F(n);
    for (std::size_t j = 0; j < n; ++j) F[j] = f[j];
    fft(F, false);

    const double mean = F[0].real() / static_cast<double>(n);
    std::vector<std::complex<double>> G(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        if (k == n / 2) continue;  // Nyquist coefficient is spectrally negligible here
        const double freq =
            (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
        G[k] = F[k] / std::complex<double>(0.0, freq);
    }
    std::complex<double> gsum(0.0);
    for (std::size_t k = 0; k < n; ++k) gsum += G[k];
    gsum /= static_cast<double>(n);

    fft(G, true);
    S.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double psi = kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        S[j] = mean * psi + (G[j] - gsum).real();
    }
    total = mean * kTwoPi;
}

// 4-point local cubic interpolation on a uniform periodic grid (x in grid units).
double cubic_periodic(const std::vector<double>& f, double x) {
    const int n = static_cast<int>(f.size());
    const double fl = std::floor(x);
    const double t = x - fl;
    const int i0 = ((static_cast<int>(fl) % n) + n) % n;
    const double fm1 = f[(i0 - 1 + n) % n], f0 = f[i0], f1 = f[(i0 + 1) % n], f2 = f[(i0 + 2) % n];
    const double wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm1 * fm1 + w0 * f0 + w1 * f1 + w2 * f2;
}

struct RayData {
    Vec3 point;
    Vec3 rdir;                 // g-unit radial direction at the endpoint
    Vec3 normal;               // parallel g-unit normal along the ray
    double j = 0.0, jp = 0.0;  // (0, 1) Jacobi data at the endpoint
    double areaK = 0.0;        // integral of K * j along the ray
};

RayData trace_ray(const Metric& metric, const Vec3& center, const Vec3& e1, const Vec3& e2, double psi,
                  double r) {
    const Vec3 dir0 = std::cos(psi) * e1 + std::sin(psi) * e2;  // round-unit
    RayData out;
    if (metric.kind() == MetricKind::Round) {
        const double c = std::cos(r), s = std::sin(r);
        out.point = c * center + s * dir0;
        out.rdir = c * dir0 - s * center;
        out.normal = cross(out.point, out.rdir);
        out.j = s;
        out.jp = c;
        out.areaK = 1.0 - c;
        return out;
    }

    // State: x, w, J, J', accumulated K * J.
    OdeState<9> y{};
    const Vec3 w0 = metric.g_normalize(center, dir0);
    y[0] = center.x;
    y[1] = center.y;
    y[2] = center.z;
    y[3] = w0.x;
    y[4] = w0.y;
    y[5] = w0.z;
    y[7] = 1.0;
    auto rhs = [&metric](double, const OdeState<9>& s, OdeState<9>& dy) {
        const Vec3 x = normalized(Vec3{s[0], s[1], s[2]});
        const Vec3 w{s[3], s[4], s[5]};
        const Vec3 gp = metric.grad_phi(x);
        const double w2 = dot(w, w);
        const Vec3 acc = w2 * (gp - x) - 2.0 * dot(gp, w) * w;
        dy[0] = w.x;
        dy[1] = w.y;
        dy[2] = w.z;
        dy[3] = acc.x;
        dy[4] = acc.y;
        dy[5] = acc.z;
        const double K = metric.gauss_curvature(x);
        dy[6] = s[7];
        dy[7] = -K * s[6];
        dy[8] = K * s[6];
    };
    integrate<9>(rhs, y, 0.0, r, metric.ode_options());

    out.point = normalized(Vec3{y[0], y[1], y[2]});
    Vec3 w = reject(Vec3{y[3], y[4], y[5]}, out.point);
    out.rdir = w / (std::exp(metric.phi(out.point)) * norm(w));
    out.normal = cross(out.point, out.rdir);
    out.j = y[6];
    out.jp = y[7];
    out.areaK = y[8];
    return out;
}

}  // namespace

double RadialProfile::value(double psi) const {
    double r = radius;
    for (const FourierTerm& t : fourier) r += t.a * std::cos(t.k * psi) + t.b * std::sin(t.k * psi);
    for (const ProfileBump& b : bumps) {
        const double d = std::remainder(psi - b.psi0, kTwoPi);
        const double u = d / b.half_width;
        if (std::fabs(u) < 1.0) r += bump_window(u) * (b.c0 + b.c1 * d + b.c2 * d * d);
    }
    return r;
}

double RadialProfile::derivative(double psi) const {
    double dr = 0.0;
    for (const FourierTerm& t : fourier)
        dr += t.k * (-t.a * std::sin(t.k * psi) + t.b * std::cos(t.k * psi));
    for (const ProfileBump& b : bumps) {
        const double d = std::remainder(psi - b.psi0, kTwoPi);
        const double u = d / b.half_width;
        if (std::fabs(u) < 1.0) {
            dr += bump_window_derivative(u) / b.half_width * (b.c0 + b.c1 * d + b.c2 * d * d) +
                  bump_window(u) * (b.c1 + 2.0 * b.c2 * d);
        }
    }
    return dr;
}

double Table::wrap_s(double s) const {
    s = std::fmod(s, length_);
    return s < 0.0 ? s + length_ : s;
}

double Table::s_of_psi(double psi) const {
    return cubic_periodic_s(wrap_angle(psi));
}

// s(psi) needs seam care: the stored table is the antiderivative on [0, 2pi)
// and jumps by L at the seam, so interpolation must unwrap across it.
double Table::cubic_periodic_s(double psi) const {
    const double x = psi / kTwoPi * n_;
    const int n = n_;
    const double fl = std::floor(x);
    const double t = x - fl;
    const int i0 = ((static_cast<int>(fl) % n) + n) % n;
    auto sval = [&](int k) {
        const int idx = i0 + k;
        const int w = ((idx % n) + n) % n;
        double v = s_of_psi_tab_[w];
        if (idx < 0) v -= length_;
        if (idx >= n) v += length_;
        return v;
    };
    const double fm1 = sval(-1), f0 = sval(0), f1 = sval(1), f2 = sval(2);
    const double wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm1 * fm1 + w0 * f0 + w1 * f1 + w2 * f2;
}

double Table::psi_of_s(double s) const {
    s = wrap_s(s);
    const auto it = std::upper_bound(s_of_psi_tab_.begin(), s_of_psi_tab_.end(), s);
    int i = static_cast<int>(it - s_of_psi_tab_.begin()) - 1;
    i = std::clamp(i, 0, n_ - 1);
    const double h = kTwoPi / n_;
    double psi = psi_[i] + (s - s_of_psi_tab_[i]) / sigma_[i];
    for (int k = 0; k < 4; ++k) {
        const double f = cubic_periodic_s(wrap_angle(psi)) - s;
        double diff = f;
        if (diff > length_ / 2.0) diff -= length_;
        if (diff < -length_ / 2.0) diff += length_;
        const double sg = cubic_periodic(sigma_, wrap_angle(psi) / kTwoPi * n_);
        psi -= diff / sg;
    }
    (void)h;
    return wrap_angle(psi);
}

void Table::radial_point(double psi, Vec3& point, Vec3& dpos_dpsi) const {
    const double r = profile_.value(psi);
    const RayData ray = trace_ray(metric_, center_, frame_e1_, frame_e2_, psi, r);
    point = ray.point;
    dpos_dpsi = profile_.derivative(psi) * ray.rdir + ray.j * ray.normal;
}

BoundaryFrame Table::frame_at(double s) const {
    const double psi = psi_of_s(s);
    const double r = profile_.value(psi);
    const RayData ray = trace_ray(metric_, center_, frame_e1_, frame_e2_, psi, r);
    const double rp = profile_.derivative(psi);
    const double sigma = std::hypot(rp, ray.j);
    BoundaryFrame f;
    f.point = ray.point;
    f.tangent = (rp * ray.rdir + ray.j * ray.normal) / sigma;
    f.normal = cross(f.point, f.tangent);
    return f;
}

double Table::curvature_at(double s) const {
    const double psi = psi_of_s(s);
    return cubic_periodic(kappa_, wrap_angle(psi) / kTwoPi * n_);
}

double Table::curvature_at_psi(double psi) const {
    return cubic_periodic(kappa_, wrap_angle(psi) / kTwoPi * n_);
}

double Table::round_polar_angle(const Vec3& x) const {
    const Vec3 u = normalized(x);
    return wrap_angle(std::atan2(dot(u, frame_e2_), dot(u, frame_e1_)));
}

double Table::round_polar_colat(const Vec3& x) const {
    return std::acos(std::clamp(dot(normalized(x), center_), -1.0, 1.0));
}

double Table::round_polar_radius(double psi0) const {
    const double t = wrap_angle(psi0 - rp_base_);
    const auto it = std::upper_bound(rp_angle_rel_.begin(), rp_angle_rel_.end(), t);
    int i = static_cast<int>(it - rp_angle_rel_.begin()) - 1;
    i = std::clamp(i, 0, n_ - 1);
    // Neville on 4 points around the bracket (the angle grid is slightly
    // non-uniform for conformal metrics).
    double xs[4], ys[4];
    for (int k = 0; k < 4; ++k) {
        const int idx = (i - 1 + k + n_) % n_;
        double xk = rp_angle_rel_[idx];
        if (i - 1 + k < 0) xk -= kTwoPi;
        if (i - 1 + k >= n_) xk += kTwoPi;
        xs[k] = xk;
        ys[k] = rp_colat_[idx];
    }
    for (int lvl = 1; lvl < 4; ++lvl)
        for (int k = 0; k < 4 - lvl; ++k)
            ys[k] = ((t - xs[k + lvl]) * ys[k] + (xs[k] - t) * ys[k + 1]) / (xs[k] - xs[k + lvl]);
    return ys[0];
}

Table build_table_impl(const Metric& metric, const Vec3& center_in, RadialProfile profile,
                       const TableBuildOptions& options, const Table* donor) {
    Table t;
    t.metric_ = metric;
    t.center_ = normalized(center_in);
    t.profile_ = std::move(profile);
    t.options_ = options;
    tangent_basis(t.center_, t.frame_e1_, t.frame_e2_);

    const int n = options.samples;
    if (n < 8 || (n & (n - 1)) != 0)
        throw Error(ErrorKind::ConfigError, "table.samples must be a power of two >= 8");
    t.n_ = n;

    t.psi_.resize(n);
    t.r_.resize(n);
    t.sigma_.resize(n);
    t.kappa_.resize(n);
    t.pos_.resize(n);
    t.rdir_.resize(n);
    t.nrm_.resize(n);
    t.tang_.resize(n);
    t.jac_.resize(n);
    t.jacp_.resize(n);
    t.area_k_.resize(n);
    t.rp_colat_.resize(n);

    std::vector<double> rp(n), rp_angle(n);
    const bool can_donate = donor != nullptr && donor->n_ == n &&
                            donor->metric_.kind() == metric.kind() &&
                            norm(donor->center_ - t.center_) == 0.0;

    for (int i = 0; i < n; ++i) {
        const double psi = kTwoPi * i / n;
        const double r = t.profile_.value(psi);
        const double dr = t.profile_.derivative(psi);
        if (!(r > 0.0))
            throw Error(ErrorKind::NotSimple, "radial profile not positive at psi=" + std::to_string(psi));
        t.psi_[i] = psi;
        t.r_[i] = r;
        rp[i] = dr;

        if (can_donate && donor->r_[i] == r) {
            t.pos_[i] = donor->pos_[i];
            t.rdir_[i] = donor->rdir_[i];
            t.nrm_[i] = donor->nrm_[i];
            t.jac_[i] = donor->jac_[i];
            t.jacp_[i] = donor->jacp_[i];
            t.area_k_[i] = donor->area_k_[i];
        } else {
            const RayData ray = trace_ray(metric, t.center_, t.frame_e1_, t.frame_e2_, psi, r);
            t.pos_[i] = ray.point;
            t.rdir_[i] = ray.rdir;
            t.nrm_[i] = ray.normal;
            t.jac_[i] = ray.j;
            t.jacp_[i] = ray.jp;
            t.area_k_[i] = ray.areaK;
        }
        t.tang_[i] = rp[i] * t.rdir_[i] + t.jac_[i] * t.nrm_[i];
        t.sigma_[i] = std::hypot(rp[i], t.jac_[i]);
        rp_angle[i] = t.round_polar_angle(t.pos_[i]);
        t.rp_colat_[i] = t.round_polar_colat(t.pos_[i]);
    }

    // Star-shape in round polar coordinates (needed by the inside test).
    t.rp_base_ = rp_angle[0];
    t.rp_angle_rel_.resize(n);
    for (int i = 0; i < n; ++i) t.rp_angle_rel_[i] = wrap_angle(rp_angle[i] - t.rp_base_);
    t.rp_angle_rel_[0] = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        if (!(t.rp_angle_rel_[i + 1] > t.rp_angle_rel_[i]))
            throw Error(ErrorKind::NotSimple, "boundary is not a round-polar graph around the center");
    }

    // Arclength table (antiderivative of sigma, spectrally accurate).
    periodic_antiderivative(t.sigma_, t.s_of_psi_tab_, t.length_);

    // Geodesic curvature: 6th-order differences of dP/dpsi, then the
    // conformal covariant derivative, projected on the inward normal.
    const double h = kTwoPi / n;
    double kmin = 1e300, kmax = -1e300;
    int kmin_at = 0;
    for (int i = 0; i < n; ++i) {
        auto T = [&](int k) { return t.tang_[(i + k + 8 * n) % n]; };
        const Vec3 dT =
            (T(-3) * -1.0 + T(-2) * 9.0 + T(-1) * -45.0 + T(1) * 45.0 + T(2) * -9.0 + T(3) * 1.0) /
            (60.0 * h);
        const Vec3 x = t.pos_[i];
        const Vec3 Tv = t.tang_[i];
        Vec3 D = reject(dT, x);
        if (metric.kind() == MetricKind::Conformal) {
            const Vec3 gp = metric.grad_phi(x);
            D += 2.0 * dot(gp, Tv) * Tv - dot(Tv, Tv) * gp;
        }
        const Vec3 ntilde = cross(x, Tv);
        const double e2phi = std::exp(2.0 * metric.phi(x));
        const double kappa = e2phi * dot(D, ntilde) / (t.sigma_[i] * t.sigma_[i] * t.sigma_[i]);
        t.kappa_[i] = kappa;
        if (kappa < kmin) {
            kmin = kappa;
            kmin_at = i;
        }
        kmax = std::max(kmax, kappa);
    }
    t.kappa_min_ = kmin;
    t.kappa_max_ = kmax;
    if (!(kmin >= options.kappa_min))
        throw Error(ErrorKind::NotConvex, "geodesic curvature " + std::to_string(kmin) + " at s=" +
                                              std::to_string(t.s_of_psi_tab_[kmin_at]) +
                                              " below threshold " + std::to_string(options.kappa_min));

    // Gauss-Bonnet: boundary term by periodic trapezoid, area term from the
    // per-ray accumulators.
    double bnd = 0.0, interior = 0.0;
    for (int i = 0; i < n; ++i) {
        bnd += t.kappa_[i] * t.sigma_[i];
        interior += t.area_k_[i];
    }
    t.boundary_curv_ = bnd * h;
    t.interior_curv_ = interior * h;
    if (std::fabs(t.gauss_bonnet_residual()) > options.gauss_bonnet_tol)
        throw Error(ErrorKind::IntegrationFailure,
                    "Gauss-Bonnet residual " + std::to_string(t.gauss_bonnet_residual()));

    if (options.check_diameter) {
        const int m = 32;
        double diam = 0.0;
        for (int i = 0; i < m; ++i)
            for (int k = i + 1; k < m; ++k)
                diam = std::max(diam, metric.distance(t.pos_[(i * n) / m], t.pos_[(k * n) / m]));
        t.diameter_ = diam;
        const double inj = metric.injectivity_lower_bound();
        if (!(diam < inj))
            throw Error(ErrorKind::ConjugateRisk,
                        "diameter " + std::to_string(diam) + " not below injectivity bound " +
                            std::to_string(inj));
    }
    return t;
}

Table build_table(const Metric& metric, const Vec3& center, double radius,
                  const std::vector<FourierTerm>& fourier, const TableBuildOptions& options) {
    RadialProfile p;
    p.radius = radius;
    p.fourier = fourier;
    return build_table_impl(metric, center, std::move(p), options, nullptr);
}

namespace {

// Support half-width in psi for a bump centered at arclength s0 with total
// arclength width w (kept strictly inside (s0 - w/2, s0 + w/2)).
double psi_half_width(const Table& t, double psi0, double s0, double width) {
    const double lo = t.psi_of_s(s0 - 0.5 * width);
    const double hi = t.psi_of_s(s0 + 0.5 * width);
    const double dlo = wrap_angle(psi0 - lo);
    const double dhi = wrap_angle(hi - psi0);
    return std::min(dlo, dhi);
}

}  // namespace

Table normal_perturbation(const Table& table, double s0, double eps, double width) {
    if (eps == 0.0) return table;
    if (!(width > 0.0 && width < table.length() / 4.0))
        throw Error(ErrorKind::ConfigError, "perturbation width must lie in (0, L/4)");
    const double psi0 = table.psi_of_s(s0);
    const double hw = psi_half_width(table, psi0, s0, width);
    const double kappa0 = table.curvature_at_psi(psi0);
    const double target = kappa0 + eps;

    auto kappa_for = [&](double c2) {
        RadialProfile p = table.profile();
        p.bumps.push_back({psi0, hw, 0.0, 0.0, c2});
        TableBuildOptions opt = table.options();
        opt.check_diameter = false;  // support is a thin arc, diameter unchanged
        const Table cand = build_table_impl(table.metric(), table.center(), std::move(p), opt, &table);
        return cand.curvature_at_psi(psi0);
    };

    // The curvature response at psi0 is linear in the quadratic bump
    // coefficient up to rebuild noise; secant converges in a few steps.
    double c_a = 0.0, f_a = kappa0;
    double c_b = -0.1 * eps;  // probe for slope scale and sign
    double f_b = kappa_for(c_b);
    for (int it = 0; it < 40 && std::fabs(f_b - target) > 1e-11 * std::max(1.0, std::fabs(target)); ++it) {
        const double slope = (f_b - f_a) / (c_b - c_a);
        const double c_next = c_b + (target - f_b) / slope;
        c_a = c_b;
        f_a = f_b;
        c_b = c_next;
        f_b = kappa_for(c_b);
    }
    if (std::fabs(f_b - target) > 1e-7)
        throw Error(ErrorKind::NoConvergence, "curvature calibration did not converge");

    RadialProfile p = table.profile();
    p.bumps.push_back({psi0, hw, 0.0, 0.0, c_b});
    return build_table_impl(table.metric(), table.center(), std::move(p), table.options(), &table);
}

Table normal_shift(const Table& table, double s0, double delta, double width) {
    if (delta == 0.0) return table;
    if (!(width > 0.0 && width < table.length() / 4.0))
        throw Error(ErrorKind::ConfigError, "perturbation width must lie in (0, L/4)");
    const double psi0 = table.psi_of_s(s0);
    const double hw = psi_half_width(table, psi0, s0, width);
    const double r0 = table.profile().value(psi0);
    const double dr0 = table.profile().derivative(psi0);

    // The (rdir, normal) frame is parallel along the radial ray, so keeping
    // the angle atan2(j, r') while r moves to r0 - delta preserves the
    // tangent direction up to parallel transport.
    Vec3 e1, e2;
    table.center_frame(e1, e2);
    const RayData ray_old = trace_ray(table.metric(), table.center(), e1, e2, psi0, r0);
    const RayData ray_new = trace_ray(table.metric(), table.center(), e1, e2, psi0, r0 - delta);
    const double c0 = -delta;
    const double c1 = dr0 * (ray_new.j / ray_old.j - 1.0);
    // The window itself contributes -2 c0 / h^2 to the second derivative at
    // psi0; cancel it so the shift does not inject stray curvature.
    const double c2 = c0 / (hw * hw);

    RadialProfile p = table.profile();
    p.bumps.push_back({psi0, hw, c0, c1, c2});
    return build_table_impl(table.metric(), table.center(), std::move(p), table.options(), &table);
}

}  // namespace billiards
