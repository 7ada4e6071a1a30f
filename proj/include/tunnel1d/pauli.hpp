#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>

#include "tunnel1d/mat2.hpp"

namespace tunnel1d {

/// Coefficients of a 2x2 complex matrix over the basis {sigma_0..sigma_3}
/// (identity plus the three Pauli matrices). The basis spans C^{2x2}, so
/// every finite 2x2 matrix has exactly one PauliVector and back.
struct PauliVector {
  cdouble c0{}, c1{}, c2{}, c3{};

  double max_abs() const {
    return std::max(std::max(std::abs(c0), std::abs(c1)),
                    std::max(std::abs(c2), std::abs(c3)));
  }

  cdouble operator[](int p) const {
    switch (p) {
      case 0: return c0;
      case 1: return c1;
      case 2: return c2;
      default: return c3;
    }
  }
};

/// sigma_p as a dense matrix, traditional orientation
/// (sigma_1 off-diagonal real, sigma_2 off-diagonal imaginary, sigma_3 diagonal).
inline Mat2 pauli_basis_matrix(int p) {
  const cdouble i(0.0, 1.0);
  switch (p) {
    case 0: return {1.0, 0.0, 0.0, 1.0};
    case 1: return {0.0, 1.0, 1.0, 0.0};
    case 2: return {0.0, -i, i, 0.0};
    case 3: return {1.0, 0.0, 0.0, -1.0};
    default: throw std::invalid_argument("pauli_basis_matrix: index must be 0..3");
  }
}

/// Sum c_p sigma_p.
inline Mat2 compose(const PauliVector& v) {
  const cdouble i(0.0, 1.0);
  return {v.c0 + v.c3, v.c1 - i * v.c2, v.c1 + i * v.c2, v.c0 - v.c3};
}

/// Trace projection onto the basis, c_p = Tr(sigma_p M) / 2.
/// The 1/2 compensates Tr(sigma_p sigma_p) = 2, so compose(decompose(M)) == M.
inline PauliVector decompose(const Mat2& m) {
  const cdouble i(0.0, 1.0);
  return {0.5 * (m.m00 + m.m11), 0.5 * (m.m01 + m.m10),
          0.5 * i * (m.m01 - m.m10), 0.5 * (m.m00 - m.m11)};
}

/// One entry of the multiplication table: sigma_p sigma_q = phase * sigma_index.
struct BasisProduct {
  int index;
  cdouble phase;
};

/// Product table from the defining identities
/// sigma_a sigma_b = delta_ab sigma_0 + i eps_abc sigma_c (a,b in 1..3),
/// with sigma_0 acting as the unit.
inline const BasisProduct& basis_product(int p, int q) {
  static const std::array<std::array<BasisProduct, 4>, 4> table = [] {
    std::array<std::array<BasisProduct, 4>, 4> t{};
    const cdouble one(1.0, 0.0), i(0.0, 1.0);
    for (int a = 0; a < 4; ++a) {
      t[0][a] = {a, one};
      t[a][0] = {a, one};
      t[a][a] = {0, one};
    }
    t[1][2] = {3, i};
    t[2][1] = {3, -i};
    t[2][3] = {1, i};
    t[3][2] = {1, -i};
    t[3][1] = {2, i};
    t[1][3] = {2, -i};
    return t;
  }();
  if (p < 0 || p > 3 || q < 0 || q > 3)
    throw std::invalid_argument("basis_product: indices must be 0..3");
  return table[p][q];
}

/// Closed-form index map phi(a, b) = (a + b(-1)^{a+b-1}) mod 4. Gives the
/// basis index of sigma_a sigma_b; the invariant suite pins it to the table.
inline int phi_index(int a, int b) {
  const int sign = ((a + b - 1) % 2 == 0) ? 1 : -1;
  const int raw = a + b * sign;
  return ((raw % 4) + 4) % 4;
}

/// Levi-Civita symbol for indices in 1..3 (zero whenever any index repeats).
inline int levi_civita(int a, int b, int c) {
  return (a - b) * (b - c) * (c - a) / 2;
}

/// Pauli coefficients of compose(a) * compose(b), as the 16-term sum over
/// the basis product table. Order matters: a is the left factor.
inline PauliVector multiply(const PauliVector& a, const PauliVector& b) {
  cdouble acc[4] = {};
  for (int p = 0; p < 4; ++p) {
    const cdouble ap = a[p];
    if (ap == cdouble{}) continue;
    for (int q = 0; q < 4; ++q) {
      const BasisProduct& bp = basis_product(p, q);
      acc[bp.index] += bp.phase * ap * b[q];
    }
  }
  return {acc[0], acc[1], acc[2], acc[3]};
}

/// A PauliVector with its magnitude factored out: the represented matrix is
/// exp(log_scale) * compose(unit), with max coefficient magnitude of unit
/// kept in [0.5, 1]. Keeps long ordered products inside double range even
/// when the true product magnitude is e^{+-10^4} or worse.
struct ScaledChain {
  PauliVector unit{};
  double log_scale = -std::numeric_limits<double>::infinity();

  static ScaledChain zero() { return {}; }

  static ScaledChain from(const PauliVector& v, double extra_log = 0.0) {
    ScaledChain c;
    c.unit = v;
    c.log_scale = extra_log;
    c.renormalize();
    return c;
  }

  bool is_zero() const { return std::isinf(log_scale) && log_scale < 0; }

  /// Right-multiply by the next factor; extra_log is a magnitude already
  /// factored out of `f` by the caller.
  void append(const PauliVector& f, double extra_log = 0.0) {
    if (is_zero()) return;
    unit = tunnel1d::multiply(unit, f);
    log_scale += extra_log;
    renormalize();
  }

  /// Matrix represented by the chain; overflows for |log_scale| beyond
  /// double range, callers in that regime must stay in log space.
  Mat2 value() const {
    if (is_zero()) return Mat2{};
    return std::exp(log_scale) * compose(unit);
  }

 private:
  void renormalize() {
    const double m = unit.max_abs();
    if (m == 0.0 || !std::isfinite(m)) {
      unit = PauliVector{};
      log_scale = -std::numeric_limits<double>::infinity();
      return;
    }
    const double inv = 1.0 / m;
    unit = {unit.c0 * inv, unit.c1 * inv, unit.c2 * inv, unit.c3 * inv};
    log_scale += std::log(m);
  }
};

/// Ordered product factors[0] * factors[1] * ... as a ScaledChain.
inline ScaledChain chain_multiply(std::span<const PauliVector> factors) {
  if (factors.empty())
    throw std::invalid_argument("chain_multiply: factor sequence is empty");
  ScaledChain chain = ScaledChain::from(factors[0]);
  for (std::size_t k = 1; k < factors.size(); ++k) chain.append(factors[k]);
  return chain;
}

}  // namespace tunnel1d
