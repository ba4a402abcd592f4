// 2x2 real matrices: Jacobi-field propagators and phase-space tangent maps.
#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace billiards {

struct Vec2 {
    double a = 0.0, b = 0.0;
    constexpr Vec2() = default;
    constexpr Vec2(double a_, double b_) : a(a_), b(b_) {}
    constexpr Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {a - o.a, b - o.b}; }
    constexpr Vec2 operator*(double s) const { return {s * a, s * b}; }
};

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double norm(const Vec2& v) { return std::hypot(v.a, v.b); }

struct Mat2 {
    // Row-major: [[m00, m01], [m10, m11]].
    double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;

    constexpr Mat2() = default;
    constexpr Mat2(double a, double b, double c, double d) : m00(a), m01(b), m10(c), m11(d) {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    constexpr double det() const { return m00 * m11 - m01 * m10; }
    constexpr double trace() const { return m00 + m11; }

    constexpr Vec2 operator*(const Vec2& v) const {
        return {m00 * v.a + m01 * v.b, m10 * v.a + m11 * v.b};
    }
    constexpr Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    constexpr Mat2 operator-(const Mat2& o) const {
        return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
    }
    constexpr Mat2 operator*(double s) const { return {s * m00, s * m01, s * m10, s * m11}; }

    Mat2 inverse() const {
        const double d = det();
        return {m11 / d, -m01 / d, -m10 / d, m00 / d};
    }

    double max_abs() const {
        return std::max(std::max(std::fabs(m00), std::fabs(m01)),
                        std::max(std::fabs(m10), std::fabs(m11)));
    }
};

inline std::ostream& operator<<(std::ostream& os, const Mat2& m) {
    return os << "[[" << m.m00 << ", " << m.m01 << "], [" << m.m10 << ", " << m.m11 << "]]";
}

}  // namespace billiards
