#pragma once

// Uniform vocabulary over the scalar types the network code is generic over:
// plain doubles (reference evaluation) and tape variables (differentiable
// evaluation). Dual numbers over either layer on top of these in dual.hpp.

#include <cmath>

#include "tpinn/autodiff.hpp"

namespace tpinn {

inline double value_of(double x) noexcept { return x; }
inline double value_of(const ad::Var& x) { return x.value(); }

// A constant of the same kind as `like` (recorded on its tape for Var).
// ad::lift covers ad::Var through argument-dependent lookup.
inline double lift(double /*like*/, double c) noexcept { return c; }

inline double zero_like(double /*like*/) noexcept { return 0.0; }
inline ad::Var zero_like(const ad::Var& like) { return {like.tape(), like.tape().zero()}; }

inline double one_like(double /*like*/) noexcept { return 1.0; }
inline ad::Var one_like(const ad::Var& like) { return {like.tape(), like.tape().one()}; }

// Structural zero/one: known to be the cached constant nodes, so products and
// sums with them need not be recorded. Doubles are never structural.
inline bool is_structural_zero(double) noexcept { return false; }
inline bool is_structural_zero(const ad::Var& x) noexcept { return x.tape().is_zero(x.id()); }
inline bool is_structural_one(double) noexcept { return false; }
inline bool is_structural_one(const ad::Var& x) noexcept { return x.tape().is_one(x.id()); }

inline double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

inline double pow(double x, int n) {
  double v = 1.0;
  const bool neg = n < 0;
  unsigned k = neg ? static_cast<unsigned>(-static_cast<long long>(n)) : static_cast<unsigned>(n);
  double base = x;
  for (; k != 0; k >>= 1) {
    if (k & 1U) v *= base;
    base *= base;
  }
  return neg ? 1.0 / v : v;
}

// Sum, difference and product that skip structural zeros and ones.
template <class T>
T sparse_add(const T& a, const T& b) {
  if (is_structural_zero(a)) return b;
  if (is_structural_zero(b)) return a;
  return a + b;
}

template <class T>
T sparse_sub(const T& a, const T& b) {
  if (is_structural_zero(b)) return a;
  if (is_structural_zero(a)) return -b;
  return a - b;
}

template <class T>
T sparse_mul(const T& a, const T& b) {
  if (is_structural_zero(a)) return a;
  if (is_structural_zero(b)) return b;
  if (is_structural_one(a)) return b;
  if (is_structural_one(b)) return a;
  return a * b;
}

}  // namespace tpinn
