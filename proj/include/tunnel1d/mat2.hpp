#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

namespace tunnel1d {

using cdouble = std::complex<double>;

/// Amplitude pair (A, B): forward / backward coefficients of one region.
struct Vec2 {
  cdouble a{};
  cdouble b{};
};

/// Dense 2x2 complex matrix, row major.
struct Mat2 {
  cdouble m00{}, m01{}, m10{}, m11{};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  cdouble det() const { return m00 * m11 - m01 * m10; }

  double max_abs() const {
    return std::max(std::max(std::abs(m00), std::abs(m01)),
                    std::max(std::abs(m10), std::abs(m11)));
  }
};

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.m00 * r.m00 + l.m01 * r.m10, l.m00 * r.m01 + l.m01 * r.m11,
          l.m10 * r.m00 + l.m11 * r.m10, l.m10 * r.m01 + l.m11 * r.m11};
}

inline Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.m00 * v.a + m.m01 * v.b, m.m10 * v.a + m.m11 * v.b};
}

inline Mat2 operator*(cdouble s, const Mat2& m) {
  return {s * m.m00, s * m.m01, s * m.m10, s * m.m11};
}

inline Mat2 operator*(const Mat2& m, cdouble s) { return s * m; }

inline Mat2 operator+(const Mat2& l, const Mat2& r) {
  return {l.m00 + r.m00, l.m01 + r.m01, l.m10 + r.m10, l.m11 + r.m11};
}

inline Mat2 operator-(const Mat2& l, const Mat2& r) {
  return {l.m00 - r.m00, l.m01 - r.m01, l.m10 - r.m10, l.m11 - r.m11};
}

}  // namespace tunnel1d
