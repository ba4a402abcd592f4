// Strictly convex billiard tables: construction from a radial profile in
// geodesic polar coordinates, arclength reparametrization, geodesic
// curvature, validation (convexity, conjugate-point margin, Gauss-Bonnet),
// and compactly supported normal perturbations.
#pragma once

#include <memory>
#include <vector>

#include "billiards/geometry.hpp"

namespace billiards {

struct FourierTerm {
    int k = 0;
    double a = 0.0;  // a cos(k psi)
    double b = 0.0;  // b sin(k psi)
};

// C-infinity compactly supported profile modification with prescribed
// value/slope/curvature contact at psi0:
//   delta r(psi) = w(u) (c0 + c1 h u + c2 (h u)^2),  u = (psi - psi0)/h,
// with w the standard mollifier bump normalized to w(0) = 1, so that
// delta r(psi0) = c0, delta r'(psi0) = c1, delta r''(psi0) = 2 c2 - 2 c0/h^2.
struct ProfileBump {
    double psi0 = 0.0;
    double half_width = 0.0;  // h above, in psi units
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
};

struct RadialProfile {
    double radius = 0.0;  // constant term
    std::vector<FourierTerm> fourier;
    std::vector<ProfileBump> bumps;

    double value(double psi) const;
    double derivative(double psi) const;
};

struct TableBuildOptions {
    int samples = 1024;          // power of two
    double kappa_min = 1e-4;     // strict-convexity acceptance threshold
    double gauss_bonnet_tol = 1e-6;
    bool check_diameter = true;
};

struct BoundaryFrame {
    Vec3 point;
    Vec3 tangent;  // g-unit, counterclockwise (domain on the left)
    Vec3 normal;   // g-unit, inward
};

class Table {
public:
    const Metric& metric() const { return metric_; }
    const Vec3& center() const { return center_; }
    const RadialProfile& profile() const { return profile_; }
    const TableBuildOptions& options() const { return options_; }

    double length() const { return length_; }
    double diameter() const { return diameter_; }
    double kappa_min_observed() const { return kappa_min_; }
    double kappa_max_observed() const { return kappa_max_; }
    double boundary_curvature_integral() const { return boundary_curv_; }
    double interior_curvature_integral() const { return interior_curv_; }
    double gauss_bonnet_residual() const {
        return boundary_curv_ + interior_curv_ - 2.0 * 3.14159265358979323846;
    }

    double wrap_s(double s) const;
    double psi_of_s(double s) const;
    double s_of_psi(double psi) const;

    // Exact boundary data at arclength s (closed form on the round metric,
    // one radial-ray integration otherwise).
    BoundaryFrame frame_at(double s) const;
    Vec3 point_at(double s) const { return frame_at(s).point; }
    double curvature_at(double s) const;  // interpolated from dense samples
    double curvature_at_psi(double psi) const;

    // Center frame and radial data used by the first-return solver.
    void center_frame(Vec3& e1, Vec3& e2) const {
        e1 = frame_e1_;
        e2 = frame_e2_;
    }
    // Round-sphere polar radius of the boundary as a function of the
    // round polar angle around the center (equals the profile for the
    // round metric).  Used as the inside/outside indicator.
    double round_polar_radius(double psi0) const;
    double round_polar_angle(const Vec3& x) const;
    double round_polar_colat(const Vec3& x) const;

    // Dense boundary samples (diagnostics and seeding).
    int sample_count() const { return n_; }
    const std::vector<Vec3>& sample_points() const { return pos_; }

    // Evaluates the boundary point and dP/dpsi at an arbitrary psi by
    // tracing the radial geodesic.
    void radial_point(double psi, Vec3& point, Vec3& dpos_dpsi) const;

private:
    friend Table build_table_impl(const Metric&, const Vec3&, RadialProfile, const TableBuildOptions&,
                                  const Table* donor);

    double cubic_periodic_s(double psi) const;

    Metric metric_ = Metric::round();
    Vec3 center_;
    Vec3 frame_e1_, frame_e2_;  // g-orthonormal directions at the center
    RadialProfile profile_;
    TableBuildOptions options_;

    int n_ = 0;
    double length_ = 0.0, diameter_ = 0.0;
    double kappa_min_ = 0.0, kappa_max_ = 0.0;
    double boundary_curv_ = 0.0, interior_curv_ = 0.0;

    std::vector<double> psi_, r_, sigma_, s_of_psi_tab_, kappa_;
    std::vector<Vec3> pos_, rdir_, nrm_, tang_;
    std::vector<double> jac_, jacp_, area_k_;
    // Round polar angle/colatitude of the boundary samples; the angle is
    // stored unwrapped relative to sample 0 (monotone in psi).
    std::vector<double> rp_angle_rel_, rp_colat_;
    double rp_base_ = 0.0;
};

Table build_table(const Metric& metric, const Vec3& center, double radius,
                  const std::vector<FourierTerm>& fourier, const TableBuildOptions& options = {});

// Normal perturbation at arclength s0: position and tangent at s0 are kept,
// the geodesic curvature there shifts by eps, and the table is unchanged
// outside the arc of the given width (total arclength) around s0.
Table normal_perturbation(const Table& table, double s0, double eps, double width);

// Shifts the point at s0 by delta along the inward normal geodesic, keeping
// the tangent direction up to parallel transport along the radial ray.
Table normal_shift(const Table& table, double s0, double delta, double width);

}  // namespace billiards
