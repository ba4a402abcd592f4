// The billiard map F on M = boundary x (0, pi): first return of the
// geodesic flow to the table boundary, its inverse through time reversal,
// the generating function S = -distance and its exact partials, orbit
// iteration and the twist check.
#pragma once

#include <vector>

#include "billiards/table.hpp"

namespace billiards {

struct PhasePoint {
    double s = 0.0;      // arclength mod L
    double theta = 0.0;  // angle from the positive tangent, in (0, pi)
};

// Time reversal (s, theta) -> (s, pi - theta).
inline PhasePoint time_reversal(const PhasePoint& x) { return {x.s, 3.14159265358979323846 - x.theta}; }

struct ChordRecord {
    PhasePoint start;        // outgoing phase point
    PhasePoint end;          // outgoing phase point after the reflection at the far end
    double flight_length = 0.0;
    GeodesicState launch;    // state leaving the boundary (g-unit direction)
    GeodesicState arrival;   // state arriving at the far endpoint (pre-reflection)
};

struct BilliardOptions {
    double theta_min = 1e-4;   // grazing cutoff
    double march_step = 0.1;   // bracketing stride for the first-return search
    double horizon = 13.0;     // NoHit guard (roughly two sphere circumferences)
};

// One application of the billiard map.  Throws GrazingHit if the outgoing
// or returning angle falls below theta_min, NoHit if no return is found
// within the horizon.
ChordRecord billiard_map(const Table& table, const PhasePoint& x, const BilliardOptions& opts = {});

PhasePoint inverse_map(const Table& table, const PhasePoint& x, const BilliardOptions& opts = {});

// Chord between two prescribed boundary points (used by the generating
// function; does not reflect at the far end).
struct BoundaryChord {
    double length = 0.0;
    double cos_theta1 = 0.0;  // angle at s1 between tangent and departure
    double cos_theta2 = 0.0;  // angle at s2 between tangent and arrival velocity
    GeodesicState launch;
    GeodesicState arrival;
    bool ambiguous = false;
};
BoundaryChord boundary_chord(const Table& table, double s1, double s2);

// S(s1, s2) = -d(Gamma(s1), Gamma(s2)).
double generating_value(const Table& table, double s1, double s2);

// (dS/ds1, dS/ds2) = (cos theta1, -cos theta2), exact from the chord
// geometry (never by numerical differentiation).
std::pair<double, double> generating_partials(const Table& table, double s1, double s2);

struct OrbitSegment {
    std::vector<PhasePoint> points;     // x, Fx, ..., F^n x (may stop early)
    std::vector<double> flight_lengths; // one per completed bounce
    bool grazing_stop = false;
};
OrbitSegment iterate(const Table& table, const PhasePoint& x, int n, const BilliardOptions& opts = {});

struct TwistReport {
    double min_twist = 0.0;   // min ds1/dtheta over the sampled grid
    bool monotone = false;
    int samples = 0;
};
TwistReport twist_check(const Table& table, double s, int samples, const BilliardOptions& opts = {});

}  // namespace billiards
