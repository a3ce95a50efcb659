#include "tpinn/autodiff.hpp"

#include <algorithm>
#include <sstream>

namespace tpinn::ad {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Variable: return "variable";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Log: return "ln";
    case Op::Tanh: return "tanh";
    case Op::Relu: return "max0";
    case Op::PowInt: return "powi";
  }
  return "unknown";
}

void Tape::throw_non_finite(Op op, double value) const {
  std::ostringstream os;
  os << "non-finite value " << value << " from op " << op_name(op) << " at node " << nodes_.size();
  throw RecordError(os.str());
}

void Tape::throw_missing(NodeId id) const {
  throw GraphError("node " + std::to_string(id) + " is not on the tape (size " + std::to_string(nodes_.size()) +
                   ")");
}

NodeId Tape::record(Op op, std::span<const NodeId> parents, double value, int exponent) {
  if (static_cast<int>(parents.size()) != arity(op)) {
    throw GraphError("op " + std::string(op_name(op)) + " expects " + std::to_string(arity(op)) +
                     " parents, got " + std::to_string(parents.size()));
  }
  for (NodeId p : parents) {
    if (!contains(p)) {
      throw GraphError("parent " + std::to_string(p) + " is not on the tape");
    }
  }
  const NodeId a = parents.size() > 0 ? parents[0] : kNoNode;
  const NodeId b = parents.size() > 1 ? parents[1] : kNoNode;
  return push(op, a, b, value, op == Op::PowInt ? exponent : 0);
}

NodeId Tape::pow_int(NodeId a, int n) {
  const double x = node(a).value;
  double v = 1.0;
  // Repeated multiplication keeps integer powers exact where they can be.
  const unsigned k = n < 0 ? static_cast<unsigned>(-static_cast<long long>(n)) : static_cast<unsigned>(n);
  double base = x;
  for (unsigned e = k; e != 0; e >>= 1) {
    if (e & 1U) v *= base;
    base *= base;
  }
  if (n < 0) v = 1.0 / v;
  return push(Op::PowInt, a, kNoNode, v, n);
}

void Tape::clear() noexcept {
  nodes_.clear();
  zero_ = kNoNode;
  one_ = kNoNode;
}

namespace detail {
void throw_tape_mismatch() { throw GraphError("operands live on different tapes"); }
}  // namespace detail

double Gradient::operator[](NodeId id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) {
    throw GraphError("node " + std::to_string(id) + " is not a variable of this gradient");
  }
  return adjoints_[static_cast<std::size_t>(it - ids_.begin())];
}

bool Gradient::contains(NodeId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

Gradient reverse_sweep(Tape& tape, NodeId root) {
  if (!tape.contains(root)) {
    throw GraphError("root " + std::to_string(root) + " is not on the tape (size " +
                     std::to_string(tape.size()) + ")");
  }
  auto& nodes = tape.nodes_;
  for (Node& n : nodes) n.adjoint = 0.0;
  nodes[root].adjoint = 1.0;

  for (std::size_t i = root + 1; i-- > 0;) {
    const Node& n = nodes[i];
    const double g = n.adjoint;
    if (g == 0.0) continue;
    const NodeId a = n.parents[0];
    const NodeId b = n.parents[1];
    switch (n.op) {
      case Op::Constant:
      case Op::Variable:
        break;
      case Op::Add:
        nodes[a].adjoint += g;
        nodes[b].adjoint += g;
        break;
      case Op::Sub:
        nodes[a].adjoint += g;
        nodes[b].adjoint -= g;
        break;
      case Op::Mul: {
        const double va = nodes[a].value;
        const double vb = nodes[b].value;
        nodes[a].adjoint += g * vb;
        nodes[b].adjoint += g * va;
        break;
      }
      case Op::Div: {
        const double vb = nodes[b].value;
        nodes[a].adjoint += g / vb;
        nodes[b].adjoint -= g * n.value / vb;
        break;
      }
      case Op::Neg:
        nodes[a].adjoint -= g;
        break;
      case Op::Exp:
        nodes[a].adjoint += g * n.value;
        break;
      case Op::Log:
        nodes[a].adjoint += g / nodes[a].value;
        break;
      case Op::Tanh:
        nodes[a].adjoint += g * (1.0 - n.value * n.value);
        break;
      case Op::Relu:
        if (nodes[a].value > 0.0) nodes[a].adjoint += g;
        break;
      case Op::PowInt: {
        const int k = n.exponent;
        if (k != 0) {
          const double x = nodes[a].value;
          // n * x^(n-1), computed without dividing by x so x = 0 stays finite for n >= 1.
          double p = 1.0;
          const int e = k - 1;
          const unsigned m = e < 0 ? static_cast<unsigned>(-e) : static_cast<unsigned>(e);
          double base = x;
          for (unsigned r = m; r != 0; r >>= 1) {
            if (r & 1U) p *= base;
            base *= base;
          }
          if (e < 0) p = 1.0 / p;
          nodes[a].adjoint += g * k * p;
        }
        break;
      }
    }
  }

  std::vector<NodeId> ids;
  std::vector<double> adjoints;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].op == Op::Variable) {
      ids.push_back(static_cast<NodeId>(i));
      adjoints.push_back(nodes[i].adjoint);
    }
  }
  return Gradient(std::move(ids), std::move(adjoints));
}

std::pair<double, std::vector<double>> value_and_gradient(const Program& program,
                                                          std::span<const double> point) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(point.size());
  for (double p : point) vars.push_back(variable(tape, p));
  const Var out = program(tape, vars);
  const Gradient grad = reverse_sweep(tape, out.id());
  std::vector<double> g(point.size());
  for (std::size_t i = 0; i < vars.size(); ++i) g[i] = grad[vars[i].id()];
  return {out.value(), std::move(g)};
}

double grad_check(const Program& program, std::span<const double> point, double step) {
  if (!(step > 0.0)) throw ConfigError("grad_check step must be positive");
  const auto [value, analytic] = value_and_gradient(program, point);
  (void)value;

  auto eval = [&](std::span<const double> p) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(p.size());
    for (double v : p) vars.push_back(variable(tape, v));
    return program(tape, vars).value();
  };

  std::vector<double> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double x0 = probe[i];
    probe[i] = x0 + step;
    const double fp = eval(probe);
    probe[i] = x0 - step;
    const double fm = eval(probe);
    probe[i] = x0;
    const double fd = (fp - fm) / (2.0 * step);
    const double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace tpinn::ad
