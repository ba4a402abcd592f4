// Real spherical harmonics as homogeneous polynomials in the ambient
// coordinates.  A harmonic expansion evaluated this way has exact gradients
// (degree-0 homogeneous extension) and an exact Laplace-Beltrami image via
// the eigenvalue relation, which keeps curvature formulas free of
// interpolation error.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "billiards/vec3.hpp"

namespace billiards {

// Dense trivariate polynomial, exponents bounded by construction (degree <= 16).
class TriPoly {
public:
    struct Term {
        std::uint8_t i, j, k;  // x^i y^j z^k
        double c;
    };

    TriPoly() = default;
    explicit TriPoly(std::vector<Term> terms) : terms_(std::move(terms)) {}

    static TriPoly constant(double c) { return TriPoly({{0, 0, 0, c}}); }
    static TriPoly monomial(int i, int j, int k, double c) {
        return TriPoly({{static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j),
                         static_cast<std::uint8_t>(k), c}});
    }

    bool empty() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    double operator()(const Vec3& p) const {
        double acc = 0.0;
        for (const Term& t : terms_) acc += t.c * ipow(p.x, t.i) * ipow(p.y, t.j) * ipow(p.z, t.k);
        return acc;
    }

    Vec3 gradient(const Vec3& p) const {
        Vec3 g{};
        for (const Term& t : terms_) {
            const double px = ipow(p.x, t.i), py = ipow(p.y, t.j), pz = ipow(p.z, t.k);
            if (t.i > 0) g.x += t.c * t.i * ipow(p.x, t.i - 1) * py * pz;
            if (t.j > 0) g.y += t.c * t.j * px * ipow(p.y, t.j - 1) * pz;
            if (t.k > 0) g.z += t.c * t.k * px * py * ipow(p.z, t.k - 1);
        }
        return g;
    }

    TriPoly operator*(const TriPoly& o) const;
    TriPoly operator+(const TriPoly& o) const;
    TriPoly scaled(double a) const;

private:
    static double ipow(double x, unsigned n) {
        double r = 1.0;
        while (n) {
            if (n & 1u) r *= x;
            x *= x;
            n >>= 1u;
        }
        return r;
    }
    void compress();

    std::vector<Term> terms_;
};

// Orthonormal real spherical harmonic Y_{l,m} (geodesy convention, no
// Condon-Shortley phase,  integral of Y^2 over the unit sphere = 1),
// returned as the homogeneous degree-l solid polynomial whose restriction
// to the sphere is Y_{l,m}.
TriPoly real_solid_harmonic(int l, int m);

struct Harmonic {
    int l = 0;
    int m = 0;
    double coeff = 0.0;
};

// phi(x) = sum of coeff * Y_{l,m}(x), grouped by degree so that the
// degree-0 homogeneous extension and the sphere Laplacian are exact:
//   grad phi = sum_l (grad P_l - l P_l x)      on |x| = 1
//   lap  phi = -sum_l l (l+1) P_l              on |x| = 1
class HarmonicExpansion {
public:
    HarmonicExpansion() = default;
    explicit HarmonicExpansion(const std::vector<Harmonic>& terms);

    bool zero() const { return degrees_.empty(); }
    int max_degree() const;

    double value(const Vec3& unit_p) const;
    Vec3 tangent_gradient(const Vec3& unit_p) const;
    double sphere_laplacian(const Vec3& unit_p) const;

private:
    struct DegreeBlock {
        int l;
        TriPoly poly;
    };
    std::vector<DegreeBlock> degrees_;
};

}  // namespace billiards
