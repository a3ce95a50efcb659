#pragma once

// Scalar reverse-mode automatic differentiation on an append-only tape.
//
// Every value produced during a forward pass is recorded as a Node whose
// parents carry strictly smaller ids, so the tape is topologically ordered by
// construction and a reverse sweep is a single pass in descending id order.
// Forward-mode tangents (see dual.hpp) are recorded on the same tape as
// ordinary nodes, which makes input derivatives differentiable with respect to
// parameters.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpinn/error.hpp"

namespace tpinn::ad {

using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Exp,
  Log,
  Tanh,
  Relu,    // max(x, 0); derivative at exactly 0 is 0
  PowInt,  // x^n for a fixed integer n stored on the node
};

std::string_view op_name(Op op);

constexpr int arity(Op op) noexcept {
  switch (op) {
    case Op::Constant:
    case Op::Variable:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return 2;
    default:
      return 1;
  }
}

struct Node {
  double value = 0.0;
  double adjoint = 0.0;
  std::array<NodeId, 2> parents{kNoNode, kNoNode};
  std::int32_t exponent = 0;
  Op op = Op::Constant;
};

class Gradient;

class Tape {
 public:
  Tape() = default;

  // Low-level entry point: appends a node with a caller-supplied value.
  // Parents must already be on the tape and their count must match the op.
  NodeId record(Op op, std::span<const NodeId> parents, double value, int exponent = 0);

  NodeId constant(double value) { return push(Op::Constant, kNoNode, kNoNode, value); }
  NodeId variable(double value) { return push(Op::Variable, kNoNode, kNoNode, value); }

  // Record an op and compute its value from the parents.
  NodeId apply(Op op, NodeId a);
  NodeId apply(Op op, NodeId a, NodeId b);
  NodeId pow_int(NodeId a, int n);

  // Cached constants used as structural zero/one tangents.
  NodeId zero();
  NodeId one();
  bool is_zero(NodeId id) const noexcept { return id == zero_; }
  bool is_one(NodeId id) const noexcept { return id == one_; }

  bool contains(NodeId id) const noexcept { return id < nodes_.size(); }
  const Node& node(NodeId id) const;
  double value(NodeId id) const { return node(id).value; }
  double adjoint(NodeId id) const { return node(id).adjoint; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  NodeId next_id() const noexcept { return static_cast<NodeId>(nodes_.size()); }

  // Drops all nodes but keeps the allocation, so one tape can be reused per epoch.
  void clear() noexcept;
  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  friend Gradient reverse_sweep(Tape& tape, NodeId root);

  NodeId push(Op op, NodeId a, NodeId b, double value, int exponent = 0) {
    if (!std::isfinite(value)) [[unlikely]] {
      throw_non_finite(op, value);
    }
    Node& n = nodes_.emplace_back();
    n.value = value;
    n.parents = {a, b};
    n.exponent = exponent;
    n.op = op;
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  [[noreturn]] void throw_non_finite(Op op, double value) const;
  [[noreturn]] void throw_missing(NodeId id) const;

  std::vector<Node> nodes_;
  NodeId zero_ = kNoNode;
  NodeId one_ = kNoNode;
};

inline NodeId Tape::apply(Op op, NodeId a) {
  const double x = node(a).value;
  switch (op) {
    case Op::Neg: return push(op, a, kNoNode, -x);
    case Op::Exp: return push(op, a, kNoNode, std::exp(x));
    case Op::Log: return push(op, a, kNoNode, std::log(x));
    case Op::Tanh: return push(op, a, kNoNode, std::tanh(x));
    case Op::Relu: return push(op, a, kNoNode, x > 0.0 ? x : 0.0);
    default: break;
  }
  throw GraphError("op " + std::string(op_name(op)) + " is not a unary op");
}

inline NodeId Tape::apply(Op op, NodeId a, NodeId b) {
  const double x = node(a).value;
  const double y = node(b).value;
  switch (op) {
    case Op::Add: return push(op, a, b, x + y);
    case Op::Sub: return push(op, a, b, x - y);
    case Op::Mul: return push(op, a, b, x * y);
    case Op::Div: return push(op, a, b, x / y);
    default: break;
  }
  throw GraphError("op " + std::string(op_name(op)) + " is not a binary op");
}

inline const Node& Tape::node(NodeId id) const {
  if (id >= nodes_.size()) [[unlikely]] throw_missing(id);
  return nodes_[id];
}

inline NodeId Tape::zero() {
  if (zero_ == kNoNode) zero_ = constant(0.0);
  return zero_;
}

inline NodeId Tape::one() {
  if (one_ == kNoNode) one_ = constant(1.0);
  return one_;
}

// Adjoints of the variable nodes after a reverse sweep, keyed by node id.
class Gradient {
 public:
  Gradient() = default;
  Gradient(std::vector<NodeId> ids, std::vector<double> adjoints)
      : ids_(std::move(ids)), adjoints_(std::move(adjoints)) {}

  // Throws GraphError if id was not a variable on the swept tape.
  double operator[](NodeId id) const;
  bool contains(NodeId id) const;

  std::span<const NodeId> variables() const noexcept { return ids_; }
  std::span<const double> adjoints() const noexcept { return adjoints_; }
  std::size_t size() const noexcept { return ids_.size(); }

 private:
  std::vector<NodeId> ids_;  // ascending
  std::vector<double> adjoints_;
};

// Seeds d(root)/d(root) = 1 and propagates adjoints in reverse id order.
// Adjoints on the tape are reset first; node values are never modified.
Gradient reverse_sweep(Tape& tape, NodeId root);

// Handle to a node, carrying its tape so arithmetic can be written inline.
class Var {
 public:
  Var() = default;
  Var(Tape& tape, NodeId id) : tape_(&tape), id_(id) {}

  Tape& tape() const noexcept { return *tape_; }
  NodeId id() const noexcept { return id_; }
  double value() const { return tape_->value(id_); }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = kNoNode;
};

inline Var constant(Tape& tape, double v) { return {tape, tape.constant(v)}; }
inline Var variable(Tape& tape, double v) { return {tape, tape.variable(v)}; }

namespace detail {
[[noreturn]] void throw_tape_mismatch();

inline Var binary(Op op, const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) [[unlikely]] throw_tape_mismatch();
  return {a.tape(), a.tape().apply(op, a.id(), b.id())};
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) { return detail::binary(Op::Add, a, b); }
inline Var operator-(const Var& a, const Var& b) { return detail::binary(Op::Sub, a, b); }
inline Var operator*(const Var& a, const Var& b) { return detail::binary(Op::Mul, a, b); }
inline Var operator/(const Var& a, const Var& b) { return detail::binary(Op::Div, a, b); }
inline Var operator-(const Var& a) { return {a.tape(), a.tape().apply(Op::Neg, a.id())}; }

inline Var lift(const Var& like, double c) {
  Tape& t = like.tape();
  if (c == 0.0) return {t, t.zero()};
  if (c == 1.0) return {t, t.one()};
  return {t, t.constant(c)};
}

inline Var operator+(const Var& a, double b) { return a + lift(a, b); }
inline Var operator+(double a, const Var& b) { return lift(b, a) + b; }
inline Var operator-(const Var& a, double b) { return a - lift(a, b); }
inline Var operator-(double a, const Var& b) { return lift(b, a) - b; }
inline Var operator*(const Var& a, double b) { return a * lift(a, b); }
inline Var operator*(double a, const Var& b) { return lift(b, a) * b; }
inline Var operator/(const Var& a, double b) { return a / lift(a, b); }
inline Var operator/(double a, const Var& b) { return lift(b, a) / b; }

inline Var exp(const Var& a) { return {a.tape(), a.tape().apply(Op::Exp, a.id())}; }
inline Var log(const Var& a) { return {a.tape(), a.tape().apply(Op::Log, a.id())}; }
inline Var tanh(const Var& a) { return {a.tape(), a.tape().apply(Op::Tanh, a.id())}; }
inline Var relu(const Var& a) { return {a.tape(), a.tape().apply(Op::Relu, a.id())}; }
inline Var pow(const Var& a, int n) { return {a.tape(), a.tape().pow_int(a.id(), n)}; }

// A differentiable program over a list of variable nodes.
using Program = std::function<Var(Tape&, std::span<const Var>)>;

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// The central difference re-records the program on a fresh tape at each
// perturbed point.
double grad_check(const Program& program, std::span<const double> point, double step);

// Value and reverse-mode gradient of a program at a point.
std::pair<double, std::vector<double>> value_and_gradient(const Program& program,
                                                          std::span<const double> point);

}  // namespace tpinn::ad
