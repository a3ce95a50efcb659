#pragma once

// Forward-mode dual numbers whose primal and tangent parts are themselves
// scalars of type T. With T = ad::Var the tangent arithmetic lands on the
// tape, so a reverse sweep from any function of a tangent yields parameter
// gradients of input derivatives (forward-over-reverse). With T = double it
// is a plain forward-mode evaluator, independent of the tape.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <type_traits>

#include "tpinn/autodiff.hpp"
#include "tpinn/scalar.hpp"

namespace tpinn {

template <class T, std::size_t N = 1>
struct BasicDual {
  T primal{};
  std::array<T, N> tangent{};
};

using Dual = BasicDual<ad::Var, 1>;

template <class T, std::size_t N>
double value_of(const BasicDual<T, N>& x) {
  return value_of(x.primal);
}

template <class T, std::size_t N>
BasicDual<T, N> constant_dual(const T& primal) {
  BasicDual<T, N> d{primal, {}};
  for (auto& t : d.tangent) t = zero_like(primal);
  return d;
}

template <class T, std::size_t N>
BasicDual<T, N> lift(const BasicDual<T, N>& like, double c) {
  return constant_dual<T, N>(lift(like.primal, c));
}

template <class T, std::size_t N>
bool has_tangent(const BasicDual<T, N>& x) {
  for (const auto& t : x.tangent) {
    if (!is_structural_zero(t)) return true;
  }
  return false;
}

// Chain rule with a slope of type T: tangent_i = slope * t_i.
template <class T, std::size_t N>
BasicDual<T, N> chain(const T& primal, const T& slope, const BasicDual<T, N>& in) {
  BasicDual<T, N> out{primal, {}};
  for (std::size_t i = 0; i < N; ++i) out.tangent[i] = sparse_mul(slope, in.tangent[i]);
  return out;
}

// Chain rule with a constant slope.
template <class T, std::size_t N>
BasicDual<T, N> chain_const(const T& primal, double slope, const BasicDual<T, N>& in) {
  BasicDual<T, N> out{primal, {}};
  for (std::size_t i = 0; i < N; ++i) {
    const T& t = in.tangent[i];
    if (slope == 0.0 || is_structural_zero(t)) {
      out.tangent[i] = zero_like(primal);
    } else if (slope == 1.0) {
      out.tangent[i] = t;
    } else {
      out.tangent[i] = t * lift(primal, slope);
    }
  }
  return out;
}

template <class T, std::size_t N>
BasicDual<T, N> operator+(const BasicDual<T, N>& a, const BasicDual<T, N>& b) {
  BasicDual<T, N> r{a.primal + b.primal, {}};
  for (std::size_t i = 0; i < N; ++i) r.tangent[i] = sparse_add(a.tangent[i], b.tangent[i]);
  return r;
}

template <class T, std::size_t N>
BasicDual<T, N> operator-(const BasicDual<T, N>& a, const BasicDual<T, N>& b) {
  BasicDual<T, N> r{a.primal - b.primal, {}};
  for (std::size_t i = 0; i < N; ++i) r.tangent[i] = sparse_sub(a.tangent[i], b.tangent[i]);
  return r;
}

template <class T, std::size_t N>
BasicDual<T, N> operator-(const BasicDual<T, N>& a) {
  BasicDual<T, N> r{-a.primal, {}};
  for (std::size_t i = 0; i < N; ++i) {
    r.tangent[i] = is_structural_zero(a.tangent[i]) ? a.tangent[i] : -a.tangent[i];
  }
  return r;
}

template <class T, std::size_t N>
BasicDual<T, N> operator*(const BasicDual<T, N>& a, const BasicDual<T, N>& b) {
  BasicDual<T, N> r{a.primal * b.primal, {}};
  for (std::size_t i = 0; i < N; ++i) {
    r.tangent[i] = sparse_add(sparse_mul(a.primal, b.tangent[i]), sparse_mul(a.tangent[i], b.primal));
  }
  return r;
}

template <class T, std::size_t N>
BasicDual<T, N> operator/(const BasicDual<T, N>& a, const BasicDual<T, N>& b) {
  const T q = a.primal / b.primal;
  BasicDual<T, N> r{q, {}};
  for (std::size_t i = 0; i < N; ++i) {
    const T num = sparse_sub(a.tangent[i], sparse_mul(q, b.tangent[i]));
    r.tangent[i] = is_structural_zero(num) ? num : num / b.primal;
  }
  return r;
}

// Mixed forms with a bare T (a parameter with zero tangent).
template <class T, std::size_t N>
BasicDual<T, N> operator*(const T& a, const BasicDual<T, N>& b) {
  BasicDual<T, N> r{a * b.primal, {}};
  for (std::size_t i = 0; i < N; ++i) r.tangent[i] = sparse_mul(a, b.tangent[i]);
  return r;
}

template <class T, std::size_t N>
BasicDual<T, N> operator*(const BasicDual<T, N>& a, const T& b) {
  return b * a;
}

template <class T, std::size_t N>
BasicDual<T, N> operator+(const T& a, const BasicDual<T, N>& b) {
  return {a + b.primal, b.tangent};
}

template <class T, std::size_t N>
BasicDual<T, N> operator+(const BasicDual<T, N>& a, const T& b) {
  return {a.primal + b, a.tangent};
}

template <class T, std::size_t N>
BasicDual<T, N> operator-(const BasicDual<T, N>& a, const T& b) {
  return {a.primal - b, a.tangent};
}

template <class T, std::size_t N>
BasicDual<T, N> operator-(const T& a, const BasicDual<T, N>& b) {
  BasicDual<T, N> r{a - b.primal, {}};
  for (std::size_t i = 0; i < N; ++i) {
    r.tangent[i] = is_structural_zero(b.tangent[i]) ? b.tangent[i] : -b.tangent[i];
  }
  return r;
}

template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator+(const BasicDual<T, N>& a, double b) {
  return a + lift(a.primal, b);
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator+(double a, const BasicDual<T, N>& b) {
  return lift(b.primal, a) + b;
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator-(const BasicDual<T, N>& a, double b) {
  return a - lift(a.primal, b);
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator-(double a, const BasicDual<T, N>& b) {
  return lift(b, a) - b;
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator*(const BasicDual<T, N>& a, double b) {
  return chain_const(a.primal * lift(a.primal, b), b, a);
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator*(double a, const BasicDual<T, N>& b) {
  return b * a;
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator/(const BasicDual<T, N>& a, double b) {
  return a / lift(a, b);
}
template <class T, std::size_t N>
  requires(!std::is_same_v<T, double>)
BasicDual<T, N> operator/(double a, const BasicDual<T, N>& b) {
  return lift(b, a) / b;
}

template <class T, std::size_t N>
BasicDual<T, N> exp(const BasicDual<T, N>& a) {
  using std::exp;
  const T e = exp(a.primal);
  return chain(e, e, a);
}

template <class T, std::size_t N>
BasicDual<T, N> log(const BasicDual<T, N>& a) {
  using std::log;
  BasicDual<T, N> r{log(a.primal), {}};
  for (std::size_t i = 0; i < N; ++i) {
    const T& t = a.tangent[i];
    r.tangent[i] = is_structural_zero(t) ? t : t / a.primal;
  }
  return r;
}

template <class T, std::size_t N>
BasicDual<T, N> tanh(const BasicDual<T, N>& a) {
  using std::tanh;
  const T y = tanh(a.primal);
  if (!has_tangent(a)) return constant_dual<T, N>(y);
  return chain(y, 1.0 - y * y, a);
}

template <class T, std::size_t N>
BasicDual<T, N> relu(const BasicDual<T, N>& a) {
  return chain_const(relu(a.primal), value_of(a.primal) > 0.0 ? 1.0 : 0.0, a);
}

template <class T, std::size_t N>
BasicDual<T, N> pow(const BasicDual<T, N>& a, int n) {
  const T y = pow(a.primal, n);
  if (n == 0 || !has_tangent(a)) return constant_dual<T, N>(y);
  return chain(y, pow(a.primal, n - 1) * lift(a.primal, static_cast<double>(n)), a);
}

// Seeds: the active input gets tangent = the tape's constant-1 node, every
// other input the constant-0 node.
Dual seed(const ad::Var& x, bool active);

// Evaluates `program` on dual inputs after validating that exactly one input
// is seeded with the unit tangent and the rest with the zero tangent.
// Throws SeedError otherwise.
Dual dual_forward(std::span<const Dual> inputs,
                  const std::function<Dual(std::span<const Dual>)>& program);

}  // namespace tpinn
