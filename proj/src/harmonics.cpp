#include "billiards/harmonics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

namespace billiards {

void TriPoly::compress() {
    std::map<std::tuple<int, int, int>, double> acc;
    for (const Term& t : terms_) acc[{t.i, t.j, t.k}] += t.c;
    terms_.clear();
    for (const auto& [key, c] : acc) {
        if (c != 0.0) {
            terms_.push_back({static_cast<std::uint8_t>(std::get<0>(key)),
                              static_cast<std::uint8_t>(std::get<1>(key)),
                              static_cast<std::uint8_t>(std::get<2>(key)), c});
        }
    }
}

TriPoly TriPoly::operator*(const TriPoly& o) const {
    std::vector<Term> out;
    out.reserve(terms_.size() * o.terms_.size());
    for (const Term& a : terms_)
        for (const Term& b : o.terms_)
            out.push_back({static_cast<std::uint8_t>(a.i + b.i), static_cast<std::uint8_t>(a.j + b.j),
                           static_cast<std::uint8_t>(a.k + b.k), a.c * b.c});
    TriPoly r(std::move(out));
    r.compress();
    return r;
}

TriPoly TriPoly::operator+(const TriPoly& o) const {
    std::vector<Term> out = terms_;
    out.insert(out.end(), o.terms_.begin(), o.terms_.end());
    TriPoly r(std::move(out));
    r.compress();
    return r;
}

TriPoly TriPoly::scaled(double a) const {
    std::vector<Term> out = terms_;
    for (Term& t : out) t.c *= a;
    return TriPoly(std::move(out));
}

namespace {

// r^l P_l^m(z/r) / rho^m as a polynomial in (z, r^2), homogenized with
// r^2 = x^2+y^2+z^2.  Standard three-term Legendre recurrence, no
// Condon-Shortley phase.
TriPoly legendre_block(int l, int m) {
    const TriPoly r2 = TriPoly::monomial(2, 0, 0, 1.0) + TriPoly::monomial(0, 2, 0, 1.0) +
                       TriPoly::monomial(0, 0, 2, 1.0);
    const TriPoly zz = TriPoly::monomial(0, 0, 1, 1.0);

    double dfact = 1.0;  // (2m-1)!!
    for (int i = 3; i <= 2 * m - 1; i += 2) dfact *= i;
    TriPoly pmm = TriPoly::constant(dfact);
    if (l == m) return pmm;

    TriPoly pm1 = zz.scaled(2.0 * m + 1.0) * pmm;
    if (l == m + 1) return pm1;

    TriPoly pl2 = pmm, pl1 = pm1, pl;
    for (int ll = m + 2; ll <= l; ++ll) {
        pl = (zz * pl1).scaled((2.0 * ll - 1.0) / (ll - m)) +
             (r2 * pl2).scaled(-(ll - 1.0 + m) / (ll - m));
        pl2 = pl1;
        pl1 = pl;
    }
    return pl1;
}

// Re/Im[(x+iy)^m].
TriPoly azimuthal_block(int m, bool sine) {
    TriPoly a = TriPoly::constant(1.0);  // Re
    TriPoly b;                           // Im
    const TriPoly px = TriPoly::monomial(1, 0, 0, 1.0);
    const TriPoly py = TriPoly::monomial(0, 1, 0, 1.0);
    for (int k = 0; k < m; ++k) {
        TriPoly na = px * a + py.scaled(-1.0) * b;
        TriPoly nb = px * b + py * a;
        a = std::move(na);
        b = std::move(nb);
    }
    return sine ? b : a;
}

}  // namespace

TriPoly real_solid_harmonic(int l, int m) {
    if (l < 0 || std::abs(m) > l) throw std::invalid_argument("real_solid_harmonic: bad (l, m)");
    const int am = std::abs(m);
    double norm = (2.0 * l + 1.0) / (4.0 * M_PI);
    for (int i = l - am + 1; i <= l + am; ++i) norm /= i;
    norm = std::sqrt(norm) * (m != 0 ? std::sqrt(2.0) : 1.0);

    TriPoly p = legendre_block(l, am);
    if (am > 0) p = p * azimuthal_block(am, m < 0);
    return p.scaled(norm);
}

HarmonicExpansion::HarmonicExpansion(const std::vector<Harmonic>& terms) {
    std::map<int, TriPoly> by_degree;
    for (const Harmonic& h : terms) {
        if (h.coeff == 0.0) continue;
        TriPoly p = real_solid_harmonic(h.l, h.m).scaled(h.coeff);
        auto it = by_degree.find(h.l);
        if (it == by_degree.end())
            by_degree.emplace(h.l, std::move(p));
        else
            it->second = it->second + p;
    }
    for (auto& [l, p] : by_degree)
        if (!p.empty()) degrees_.push_back({l, std::move(p)});
}

int HarmonicExpansion::max_degree() const {
    int d = 0;
    for (const auto& blk : degrees_) d = std::max(d, blk.l);
    return d;
}

double HarmonicExpansion::value(const Vec3& p) const {
    double acc = 0.0;
    for (const auto& blk : degrees_) acc += blk.poly(p);
    return acc;
}

Vec3 HarmonicExpansion::tangent_gradient(const Vec3& p) const {
    Vec3 g{};
    for (const auto& blk : degrees_) {
        // Gradient of the degree-0 extension P_l(x/|x|): at |x| = 1 it is
        // grad P_l - l P_l x by Euler's homogeneous relation.
        g += blk.poly.gradient(p) - static_cast<double>(blk.l) * blk.poly(p) * p;
    }
    return g;
}

double HarmonicExpansion::sphere_laplacian(const Vec3& p) const {
    double acc = 0.0;
    for (const auto& blk : degrees_) acc -= blk.l * (blk.l + 1.0) * blk.poly(p);
    return acc;
}

}  // namespace billiards
