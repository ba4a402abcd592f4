// Riemannian structure on the sphere: curvature, geodesic flow, geodesic
// distance and Jacobi-field transport, for the round metric and for
// conformal metrics g = e^{2 phi} g0 with phi a finite real spherical
// harmonic expansion.
//
// Representation is extrinsic throughout: points are unit vectors in the
// ambient 3-space and tangent vectors live in the ambient tangent plane,
// so there are no chart seams or pole singularities.  The geodesic
// equation comes from the energy Lagrangian with a multiplier for the
// sphere constraint:
//     x'' = |x'|^2 (grad phi - x) - 2 (grad phi . x') x'
// where grad phi is the tangential gradient of the degree-0 homogeneous
// extension.  The integration parameter is g-arclength (g-unit initial
// speed is preserved).
#pragma once

#include <optional>
#include <vector>

#include "billiards/harmonics.hpp"
#include "billiards/mat2.hpp"
#include "billiards/ode.hpp"
#include "billiards/vec3.hpp"

namespace billiards {

enum class MetricKind { Round, Conformal };

struct SpherePoint {
    Vec3 position;  // unit vector, renormalized after every operation

    SpherePoint() = default;
    explicit SpherePoint(const Vec3& p) : position(normalized(p)) {}
};

struct GeodesicState {
    Vec3 point;      // on the sphere
    Vec3 direction;  // tangent, g-unit norm
    double elapsed = 0.0;
};

struct JacobiState {
    double value = 0.0;       // J
    double derivative = 0.0;  // J'
};

struct GeodesicConnection {
    double length = 0.0;
    Vec3 depart_dir;  // g-unit tangent at p pointing along the minimizer
    Vec3 arrive_dir;  // g-unit tangent at q (velocity of the incoming geodesic)
    bool ambiguous = false;
};

class Metric {
public:
    static Metric round();
    static Metric conformal(const std::vector<Harmonic>& harmonics, OdeOptions ode = {});

    MetricKind kind() const { return kind_; }
    const OdeOptions& ode_options() const { return ode_; }
    void set_ode_options(const OdeOptions& o) { ode_ = o; }

    // Conformal data.  All exact on the unit sphere (phi == 0 for Round).
    double phi(const Vec3& p) const;
    Vec3 grad_phi(const Vec3& p) const;          // tangential
    double laplace0_phi(const Vec3& p) const;    // round Laplace-Beltrami of phi
    double gauss_curvature(const Vec3& p) const; // K = e^{-2 phi} (1 - lap0 phi)

    // Certified-by-sampling positivity: min/max of K over a dense grid.
    // Throws NotConvex if the sampled minimum is <= 0.
    double curvature_floor() const { return curvature_floor_; }
    double curvature_ceiling() const { return curvature_ceiling_; }

    // Conservative lower bound for the injectivity radius used by table
    // validation (pi for the round metric).
    double injectivity_lower_bound() const;

    double g_norm(const Vec3& p, const Vec3& v) const { return std::exp(phi(p)) * norm(v); }
    double g_dot(const Vec3& p, const Vec3& a, const Vec3& b) const {
        const double e = std::exp(phi(p));
        return e * e * dot(a, b);
    }
    // Scales an ambient tangent vector to g-unit norm.
    Vec3 g_normalize(const Vec3& p, const Vec3& v) const { return v / g_norm(p, v); }

    // Flows the geodesic for g-arclength t (t >= 0).  Unit speed is
    // preserved; consecutive steps compose within integrator tolerance.
    GeodesicState geodesic_step(const GeodesicState& state, double t) const;

    // Geodesic flow together with the (J, J') propagator over [0, t].
    struct FlowWithJacobi {
        GeodesicState state;
        Mat2 propagator;  // maps (J, J')(0) -> (J, J')(t), det == 1
    };
    FlowWithJacobi flow_with_jacobi(const GeodesicState& start, double t) const;

    Mat2 jacobi_propagator(const GeodesicState& start, double t) const {
        return flow_with_jacobi(start, t).propagator;
    }
    JacobiState jacobi_transport(const GeodesicState& start, const JacobiState& j0, double t) const {
        const Vec2 out = jacobi_propagator(start, t) * Vec2{j0.value, j0.derivative};
        return {out.a, out.b};
    }

    // First zero of J with J(0) = j0 in (0, horizon]; located by sign change
    // plus bisection.  Conjugate time uses j0 = (0, 1).
    std::optional<double> first_jacobi_zero(const GeodesicState& start, const JacobiState& j0,
                                            double horizon) const;
    std::optional<double> first_conjugate_time(const GeodesicState& start, double horizon) const {
        return first_jacobi_zero(start, {0.0, 1.0}, horizon);
    }

    // Length of the minimizing geodesic between p and q plus departure and
    // arrival directions.  Solved in closed form for the round metric and
    // by shooting + Newton on the endpoint miss otherwise.
    GeodesicConnection connect(const Vec3& p, const Vec3& q) const;
    double distance(const Vec3& p, const Vec3& q) const { return connect(p, q).length; }

private:
    Metric(MetricKind kind, HarmonicExpansion expansion, OdeOptions ode);

    void sample_curvature();
    GeodesicConnection connect_conformal(const Vec3& p, const Vec3& q) const;

    MetricKind kind_ = MetricKind::Round;
    HarmonicExpansion expansion_;
    OdeOptions ode_;
    double curvature_floor_ = 1.0;
    double curvature_ceiling_ = 1.0;
    double max_abs_phi_ = 0.0;
};

// Spec-level free functions.
inline double gauss_curvature(const Metric& m, const SpherePoint& p) {
    return m.gauss_curvature(p.position);
}
inline GeodesicState geodesic_step(const Metric& m, const GeodesicState& s, double t) {
    return m.geodesic_step(s, t);
}
inline double geodesic_distance(const Metric& m, const SpherePoint& p, const SpherePoint& q) {
    return m.distance(p.position, q.position);
}
inline JacobiState jacobi_transport(const Metric& m, const GeodesicState& start, const JacobiState& j0,
                                    double t) {
    return m.jacobi_transport(start, j0, t);
}
inline std::optional<double> first_conjugate_time(const Metric& m, const GeodesicState& start,
                                                  double horizon) {
    return m.first_conjugate_time(start, horizon);
}

// Orthonormal (round) tangent frame at p; deterministic choice.
void tangent_basis(const Vec3& p, Vec3& e1, Vec3& e2);

}  // namespace billiards
