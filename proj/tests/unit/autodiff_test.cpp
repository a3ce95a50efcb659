#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tpinn/autodiff.hpp"
#include "tpinn/dual.hpp"
#include "tpinn/error.hpp"
#include "tpinn/mlp.hpp"
#include "tpinn/rng.hpp"

using namespace tpinn;
using ad::Op;
using ad::Tape;
using ad::Var;

TEST(Tape, RecordsProductOfConstants) {
  Tape tape;
  auto a = tape.constant(3.0);
  auto b = tape.constant(4.0);
  std::vector<ad::NodeId> parents{a, b};
  auto m = tape.record(Op::Mul, parents, 12.0);
  EXPECT_EQ(tape.value(m), 12.0);
  EXPECT_EQ(tape.size(), 3u);
}

TEST(Tape, PowerByInteger) {
  Tape tape;
  auto x = tape.variable(2.0);
  EXPECT_EQ(tape.value(tape.pow_int(x, 3)), 8.0);
  EXPECT_EQ(tape.value(tape.pow_int(x, 0)), 1.0);
  EXPECT_EQ(tape.value(tape.pow_int(x, -2)), 0.25);
}

TEST(Tape, DivisionByZeroIsRecordError) {
  Tape tape;
  Var one = ad::constant(tape, 1.0);
  Var zero = ad::constant(tape, 0.0);
  EXPECT_THROW(one / zero, RecordError);
  std::vector<ad::NodeId> parents{one.id()};
  EXPECT_THROW(tape.record(Op::Exp, parents, std::nan("")), RecordError);
}

TEST(Tape, RecordRejectsBadParents) {
  Tape tape;
  auto a = tape.constant(1.0);
  std::vector<ad::NodeId> missing{a, 7};
  EXPECT_THROW(tape.record(Op::Add, missing, 1.0), GraphError);
  std::vector<ad::NodeId> one{a};
  EXPECT_THROW(tape.record(Op::Add, one, 1.0), GraphError);
}

TEST(Tape, ParentsPrecedeChildren) {
  Tape tape;
  Var x = ad::variable(tape, 0.7);
  Var y = ad::variable(tape, -1.3);
  Var f = ad::tanh(x * y + ad::exp(x) / (y * y)) - ad::pow(x, 3);
  (void)f;
  const auto nodes = tape.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int k = 0; k < ad::arity(nodes[i].op); ++k) EXPECT_LT(nodes[i].parents[k], i);
  }
}

TEST(ReverseSweep, ProductRule) {
  Tape tape;
  Var x = ad::variable(tape, 3.0);
  Var y = ad::variable(tape, 4.0);
  auto g = ad::reverse_sweep(tape, (x * y).id());
  EXPECT_EQ(g[x.id()], 4.0);
  EXPECT_EQ(g[y.id()], 3.0);
  EXPECT_EQ(g.size(), 2u);
}

TEST(ReverseSweep, TanhAtZero) {
  Tape tape;
  Var x = ad::variable(tape, 0.0);
  Var f = ad::tanh(x);
  auto g = ad::reverse_sweep(tape, f.id());
  EXPECT_EQ(g[x.id()], 1.0);
  EXPECT_EQ(tape.adjoint(f.id()), 1.0);
}

TEST(ReverseSweep, MatchesCentralDifferences) {
  ad::Program prog = [](Tape&, std::span<const Var> v) { return ad::pow(v[0], 2) * ad::exp(v[1]); };
  std::vector<double> p{1.5, 0.3};
  auto [val, grad] = ad::value_and_gradient(prog, p);
  const double h = 1e-6;
  auto f = [](double x, double y) { return x * x * std::exp(y); };
  const double fx = (f(1.5 + h, 0.3) - f(1.5 - h, 0.3)) / (2 * h);
  const double fy = (f(1.5, 0.3 + h) - f(1.5, 0.3 - h)) / (2 * h);
  EXPECT_NEAR(grad[0] / fx, 1.0, 1e-6);
  EXPECT_NEAR(grad[1] / fy, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(val, f(1.5, 0.3));
}

TEST(ReverseSweep, UnknownRoot) {
  Tape tape;
  ad::variable(tape, 1.0);
  EXPECT_THROW(ad::reverse_sweep(tape, 5), GraphError);
}

TEST(ReverseSweep, LeavesValuesAlone) {
  Tape tape;
  Var x = ad::variable(tape, 0.4);
  Var f = ad::log(x + 2.0) * ad::relu(x - 0.1);
  std::vector<double> before;
  for (const auto& n : tape.nodes()) before.push_back(n.value);
  ad::reverse_sweep(tape, f.id());
  ad::reverse_sweep(tape, f.id());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(tape.nodes()[i].value, before[i]);
}

TEST(ReverseSweep, ReluKinkHasZeroSlope) {
  Tape tape;
  Var x = ad::variable(tape, 0.0);
  auto g = ad::reverse_sweep(tape, ad::relu(x).id());
  EXPECT_EQ(g[x.id()], 0.0);
}

TEST(ReverseSweep, NonVariableLookupThrows) {
  Tape tape;
  Var x = ad::variable(tape, 2.0);
  Var c = ad::constant(tape, 5.0);
  auto g = ad::reverse_sweep(tape, (x * c).id());
  EXPECT_THROW(g[c.id()], GraphError);
}

TEST(ReverseSweep, MixedTapesRejected) {
  Tape a, b;
  Var x = ad::variable(a, 1.0);
  Var y = ad::variable(b, 1.0);
  EXPECT_THROW(x + y, GraphError);
}

// Random expression over three variables, deterministic in the seed.
static Var random_program(Tape& tape, std::span<const Var> v, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Var> pool(v.begin(), v.end());
  for (int i = 0; i < 12; ++i) {
    const Var& a = pool[rng.below(pool.size())];
    const Var& b = pool[rng.below(pool.size())];
    switch (rng.below(6)) {
      case 0: pool.push_back(a + b); break;
      case 1: pool.push_back(a - b); break;
      case 2: pool.push_back(a * b); break;
      case 3: pool.push_back(ad::tanh(a)); break;
      case 4: pool.push_back(ad::exp(0.3 * a)); break;
      default: pool.push_back(a / (b * b + 1.0)); break;
    }
  }
  (void)tape;
  return pool.back();
}

TEST(ReverseSweep, AdjointsAreLinear) {
  const std::vector<double> pt{0.3, -0.8, 1.1};
  for (std::uint64_t s = 1; s <= 20; ++s) {
    auto f = [s](Tape& t, std::span<const Var> v) { return random_program(t, v, s); };
    auto g = [s](Tape& t, std::span<const Var> v) { return random_program(t, v, s + 1000); };
    auto combo = [&](Tape& t, std::span<const Var> v) { return 2.5 * f(t, v) - 0.75 * g(t, v); };
    auto gf = ad::value_and_gradient(f, pt).second;
    auto gg = ad::value_and_gradient(g, pt).second;
    auto gc = ad::value_and_gradient(combo, pt).second;
    for (std::size_t i = 0; i < pt.size(); ++i) {
      const double want = 2.5 * gf[i] - 0.75 * gg[i];
      EXPECT_NEAR(gc[i], want, 1e-12 * std::max(1.0, std::abs(want))) << "seed " << s;
    }
  }
}

TEST(ReverseSweep, Deterministic) {
  auto run = [] {
    Tape tape;
    std::vector<Var> v{ad::variable(tape, 0.2), ad::variable(tape, 0.9), ad::variable(tape, -0.4)};
    Var f = random_program(tape, v, 77);
    auto g = ad::reverse_sweep(tape, f.id());
    std::vector<double> out(tape.nodes().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = tape.nodes()[i].value;
    out.insert(out.end(), g.adjoints().begin(), g.adjoints().end());
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(DualForward, Square) {
  Tape tape;
  Var x = ad::variable(tape, 3.0);
  std::vector<Dual> in{seed(x, true)};
  Dual y = dual_forward(in, [](std::span<const Dual> d) { return d[0] * d[0]; });
  EXPECT_EQ(y.tangent[0].value(), 6.0);
  EXPECT_EQ(y.primal.value(), 9.0);
}

TEST(DualForward, PolynomialSeededInT) {
  Tape tape;
  std::vector<Dual> in{seed(ad::variable(tape, 2.0), false), seed(ad::variable(tape, 1.0), true)};
  Dual y = dual_forward(in, [](std::span<const Dual> d) { return d[0] * d[1] + d[1] * d[1]; });
  EXPECT_EQ(y.tangent[0].value(), 4.0);
}

TEST(DualForward, SeedValidation) {
  Tape tape;
  Var x = ad::variable(tape, 1.0);
  Var t = ad::variable(tape, 2.0);
  auto id = [](std::span<const Dual> d) { return d[0]; };
  std::vector<Dual> both{seed(x, true), seed(t, true)};
  EXPECT_THROW(dual_forward(both, id), SeedError);
  std::vector<Dual> none{seed(x, false), seed(t, false)};
  EXPECT_THROW(dual_forward(none, id), SeedError);
}

TEST(DualForward, TangentIsDifferentiable) {
  // d/dw of d/dx (w x^3) = 3 x^2
  Tape tape;
  Var w = ad::variable(tape, 0.7);
  Var x = ad::variable(tape, 1.2);
  std::vector<Dual> in{seed(x, true)};
  Dual y = dual_forward(in, [&](std::span<const Dual> d) { return w * (d[0] * d[0] * d[0]); });
  auto g = ad::reverse_sweep(tape, y.tangent[0].id());
  EXPECT_NEAR(g[w.id()], 3 * 1.2 * 1.2, 1e-14);
  EXPECT_NEAR(g[x.id()], 6 * 0.7 * 1.2, 1e-14);
}

TEST(DualForward, MlpTangentMatchesFiniteDifference) {
  std::vector<std::size_t> dims{2, 8, 8, 1};
  Rng rng(3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Mlp net = init_glorot(dims, 100 + s, {ActivationKind::Tanh});
    const double x0 = rng.uniform(-1, 1), t0 = rng.uniform(-1, 1);
    for (bool along_x : {true, false}) {
      Tape tape;
      Dual xd = seed(ad::variable(tape, x0), along_x);
      Dual td = seed(ad::variable(tape, t0), !along_x);
      Dual u = forward(net, xd, td);
      const double h = 1e-5;
      const double fd = along_x ? (forward(net, x0 + h, t0) - forward(net, x0 - h, t0)) / (2 * h)
                                : (forward(net, x0, t0 + h) - forward(net, x0, t0 - h)) / (2 * h);
      const double an = u.tangent[0].value();
      EXPECT_LE(std::abs(an - fd) / std::max(1.0, std::abs(an)), 1e-5);
    }
  }
}

TEST(DualForward, AgreesWithReverseDirectionalDerivative) {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    Rng rng(s);
    std::vector<double> pt{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Mlp net = init_glorot(std::vector<std::size_t>{2, 6, 1}, s, {ActivationKind::Swish});
    ad::Program prog = [&](Tape&, std::span<const Var> v) { return forward(net, v[0], v[1]); };
    auto grad = ad::value_and_gradient(prog, pt).second;
    for (int k = 0; k < 2; ++k) {
      Tape tape;
      Dual u = forward(net, seed(ad::variable(tape, pt[0]), k == 0), seed(ad::variable(tape, pt[1]), k == 1));
      EXPECT_NEAR(u.tangent[0].value(), grad[k], 1e-10 * std::max(1.0, std::abs(grad[k])));
    }
  }
}

TEST(GradCheck, LinearIsExact) {
  ad::Program prog = [](Tape&, std::span<const Var> v) { return v[0] * 1.7 + v[1] * -0.4 + 0.3; };
  std::vector<double> p{0.5, -2.0};
  EXPECT_LT(ad::grad_check(prog, p, 1e-5), 1e-10);
}

TEST(GradCheck, ConstantProgram) {
  ad::Program prog = [](Tape& t, std::span<const Var>) { return ad::constant(t, 4.0); };
  std::vector<double> p{1.0, 2.0};
  EXPECT_EQ(ad::grad_check(prog, p, 1e-5), 0.0);
}

TEST(GradCheck, TwoLayerTanhMlp) {
  std::vector<std::size_t> dims{2, 3, 2, 1};
  ASSERT_EQ(parameter_count(dims), 20u);
  Mlp net = init_glorot(dims, 9, {ActivationKind::Tanh});
  ad::Program prog = [&](Tape& t, std::span<const Var> v) {
    return forward<Var, Var>(net.dims(), net.activation(), v, ad::constant(t, 0.3), ad::constant(t, -0.6));
  };
  std::vector<double> p(net.params().begin(), net.params().end());
  EXPECT_LT(ad::grad_check(prog, p, 1e-5), 1e-4);
}

TEST(GradCheck, RejectsNonPositiveStep) {
  ad::Program prog = [](Tape&, std::span<const Var> v) { return v[0]; };
  std::vector<double> p{1.0};
  EXPECT_THROW(ad::grad_check(prog, p, 0.0), ConfigError);
}
