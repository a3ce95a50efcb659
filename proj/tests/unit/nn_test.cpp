#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "tpinn/activation.hpp"
#include "tpinn/autodiff.hpp"
#include "tpinn/checkpoint.hpp"
#include "tpinn/error.hpp"
#include "tpinn/mlp.hpp"
#include "tpinn/rng.hpp"

using namespace tpinn;

namespace {

double eval(ActivationKind k, double x) { return activation_eval(k, x); }

// Slope of the activation from a taped evaluation.
double taped_slope(ActivationKind k, double x) {
  ad::Tape tape;
  ad::Var v = ad::variable(tape, x);
  ad::Var y = activate(Activation{k}, v);
  return ad::reverse_sweep(tape, y.id())[v.id()];
}

double dual_slope(ActivationKind k, double x) {
  BasicDual<double, 1> d{x, {1.0}};
  return activate(Activation{k}, d).tangent[0];
}

}  // namespace

TEST(Activation, ClosedForms) {
  EXPECT_EQ(eval(ActivationKind::Relu, -1.0), 0.0);
  EXPECT_EQ(eval(ActivationKind::Relu, 2.0), 2.0);
  EXPECT_EQ(eval(ActivationKind::Sigmoid, 0.0), 0.5);
  EXPECT_EQ(eval(ActivationKind::Swish, 0.0), 0.0);
  EXPECT_NEAR(eval(ActivationKind::Elu, -20.0), std::exp(-20.0) - 1.0, 1e-15);
  EXPECT_NEAR(eval(ActivationKind::Elu, -20.0), -0.9999999979, 1e-10);
  EXPECT_DOUBLE_EQ(eval(ActivationKind::LeakyRelu, -3.0), -0.03);
  EXPECT_EQ(eval(ActivationKind::LeakyRelu, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(eval(ActivationKind::Tanh, 0.5), std::tanh(0.5));
  Activation elu{ActivationKind::Elu, 0.01, 2.0};
  EXPECT_NEAR(activation_eval(elu, -1.0), 2.0 * (std::exp(-1.0) - 1.0), 1e-15);
}

TEST(Activation, SigmoidStableForLargeInputs) {
  EXPECT_EQ(eval(ActivationKind::Sigmoid, 800.0), 1.0);
  EXPECT_GT(eval(ActivationKind::Sigmoid, -700.0), 0.0);
  EXPECT_TRUE(std::isfinite(eval(ActivationKind::Swish, -800.0)));
}

TEST(Activation, NamesRoundTrip) {
  EXPECT_EQ(kAllActivations.size(), 6u);
  for (auto k : kAllActivations) EXPECT_EQ(parse_activation(activation_name(k)), k);
  EXPECT_EQ(activation_names_joined(), "relu, tanh, sigmoid, leaky_relu, elu, swish");
  try {
    parse_activation("bogus");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("leaky_relu"), std::string::npos);
  }
}

TEST(Activation, RangesOnRandomPoints) {
  Rng rng(11);
  double swish_min = 1e9;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(-20, 20);
    const double th = eval(ActivationKind::Tanh, x);
    // tanh rounds to +-1 for |x| > ~19
    if (std::abs(x) < 18) {
      EXPECT_GT(th, -1.0);
      EXPECT_LT(th, 1.0);
    }
    const double sg = eval(ActivationKind::Sigmoid, x);
    if (std::abs(x) < 30) {
      EXPECT_GT(sg, 0.0);
      EXPECT_LT(sg, 1.0);
    }
    EXPECT_GE(eval(ActivationKind::Relu, x), 0.0);
    swish_min = std::min(swish_min, eval(ActivationKind::Swish, x));
  }
  EXPECT_GE(swish_min, -0.2785 - 1e-3);
  // fine grid near the minimizer x ~ -1.2785
  double grid_min = 1e9;
  for (int i = 0; i <= 20000; ++i) grid_min = std::min(grid_min, eval(ActivationKind::Swish, -3.0 + i * 1e-4));
  EXPECT_NEAR(grid_min, -0.2785, 1e-3);
}

TEST(Activation, DerivativesMatchFiniteDifferences) {
  Rng rng(5);
  for (auto k : kAllActivations) {
    for (int i = 0; i < 100; ++i) {
      double x = rng.uniform(1e-2, 5.0);
      if (rng.below(2)) x = -x;
      const double h = 1e-6;
      const double fd = (eval(k, x + h) - eval(k, x - h)) / (2 * h);
      const double tap = taped_slope(k, x);
      const double dual = dual_slope(k, x);
      const double scale = std::max(1e-3, std::abs(fd));
      EXPECT_LE(std::abs(tap - fd) / scale, 1e-6) << activation_name(k) << " x=" << x;
      EXPECT_LE(std::abs(dual - fd) / scale, 1e-6) << activation_name(k) << " x=" << x;
    }
  }
}

TEST(Activation, Monotone) {
  for (auto k : kAllActivations) {
    const double lo = k == ActivationKind::Swish ? 0.0 : -6.0;
    double prev = eval(k, lo);
    for (int i = 1; i <= 1200; ++i) {
      const double y = eval(k, lo + i * 0.01);
      EXPECT_GE(y, prev) << activation_name(k);
      prev = y;
    }
  }
}

TEST(Mlp, ParameterCount) {
  std::vector<std::size_t> dims{2, 16, 16, 1};
  EXPECT_EQ(parameter_count(dims), 337u);
  Mlp net = init_glorot(dims, 42);
  EXPECT_EQ(net.get_params().size(), 337u);
}

TEST(Mlp, GlorotDeterministicAndBounded) {
  std::vector<std::size_t> dims{2, 16, 16, 1};
  EXPECT_EQ(init_glorot(dims, 42).get_params(), init_glorot(dims, 42).get_params());
  EXPECT_NE(init_glorot(dims, 42).get_params(), init_glorot(dims, 43).get_params());

  std::vector<std::size_t> small{2, 16, 1};
  Mlp net = init_glorot(small, 7);
  const double bound = std::sqrt(6.0 / 18.0);
  auto l0 = net.layer(0);
  for (double w : l0.weights) EXPECT_LE(std::abs(w), bound);
  for (double b : l0.biases) EXPECT_EQ(b, 0.0);
  auto l1 = net.layer(1);
  for (double w : l1.weights) EXPECT_LE(std::abs(w), std::sqrt(6.0 / 17.0));
}

TEST(Mlp, DimsValidation) {
  EXPECT_THROW(init_glorot(std::vector<std::size_t>{}, 1), ConfigError);
  EXPECT_THROW(init_glorot(std::vector<std::size_t>{2}, 1), ConfigError);
  EXPECT_THROW(init_glorot(std::vector<std::size_t>{3, 4, 1}, 1), ConfigError);
  EXPECT_THROW(init_glorot(std::vector<std::size_t>{2, 0, 1}, 1), ConfigError);
  EXPECT_EQ(parse_dims("2,16,16,1"), (std::vector<std::size_t>{2, 16, 16, 1}));
  EXPECT_THROW(parse_dims("2,x,1"), ConfigError);
  EXPECT_EQ(format_dims(parse_dims("2,8,1")), "2,8,1");
}

TEST(Mlp, ZeroNetOutputsZero) {
  Mlp net = Mlp::zeros(std::vector<std::size_t>{2, 5, 3, 1});
  EXPECT_EQ(forward(net, 0.3, -7.0), 0.0);
  EXPECT_EQ(forward(net, 100.0, 2.0), 0.0);
}

TEST(Mlp, SingleLinearLayer) {
  DenseLayer l{2, 1, {1.0, 1.0}, {0.0}};
  Mlp net({l}, {});
  EXPECT_EQ(forward(net, 0.25, 2.5), 2.75);
  ad::Tape tape;
  auto u = forward(net, ad::variable(tape, 1.0), ad::variable(tape, 2.0));
  EXPECT_EQ(u.value(), 3.0);
}

TEST(Mlp, ScalingLinearNetWeights) {
  // LeakyRelu with slope 1 is the identity.
  Activation ident{ActivationKind::LeakyRelu, 1.0, 1.0};
  Mlp net = init_glorot(std::vector<std::size_t>{2, 4, 4, 1}, 3, ident);
  auto p = net.get_params();
  const double y = forward(net, 0.7, -0.2);
  // zero biases: doubling the output layer doubles u, doubling all three layers gives 8x
  auto q = p;
  for (std::size_t i = 12 + 20; i < q.size(); ++i) q[i] *= 2.0;  // output layer
  Mlp doubled = net;
  doubled.set_params(q);
  EXPECT_NEAR(forward(doubled, 0.7, -0.2), 2.0 * y, 1e-12);
  for (double& v : p) v *= 2.0;
  Mlp all = net;
  all.set_params(p);
  EXPECT_NEAR(forward(all, 0.7, -0.2), 8.0 * y, 1e-12);
}

TEST(Mlp, ParamsRoundTrip) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 6, 1}, 8, {ActivationKind::Elu});
  Mlp copy = net;
  copy.set_params(net.get_params());
  EXPECT_EQ(copy, net);
  auto p = net.get_params();
  p.pop_back();
  EXPECT_THROW(copy.set_params(p), ShapeError);
  auto bad = net.get_params();
  bad[0] = std::nan("");
  EXPECT_THROW(copy.set_params(bad), ConfigError);
}

TEST(Mlp, ParamOrderIsLayerMajorRowMajor) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 3, 1}, 4);
  auto p = net.get_params();
  auto l0 = net.layer(0);
  EXPECT_EQ(l0.weight(1, 0), p[2]);
  EXPECT_EQ(l0.weight(2, 1), p[5]);
  EXPECT_EQ(l0.biases[0], p[6]);
  EXPECT_EQ(net.layer(1).weights[0], p[9]);
}

TEST(Mlp, ForwardShapeMismatch) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 3, 1}, 4);
  std::vector<double> wrong(5, 0.0);
  EXPECT_THROW((forward<double, double>(net, wrong, 0.0, 0.0)), ShapeError);
  DenseLayer a{2, 3, std::vector<double>(6), std::vector<double>(3)};
  DenseLayer b{4, 1, std::vector<double>(4), std::vector<double>(1)};
  EXPECT_THROW(Mlp({a, b}, {}), ShapeError);
}

TEST(Mlp, TapedDualAndPlainAgree) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 8, 8, 1}, 21, {ActivationKind::Sigmoid});
  ad::Tape tape;
  auto v = forward(net, ad::variable(tape, 0.2), ad::variable(tape, 0.9));
  EXPECT_EQ(v.value(), forward(net, 0.2, 0.9));
  auto d = forward(net, seed(ad::variable(tape, 0.2), true), seed(ad::variable(tape, 0.9), false));
  EXPECT_EQ(d.primal.value(), forward(net, 0.2, 0.9));
}

TEST(Mlp, GoldenSeed42TanhOutput) {
  Mlp net = init_glorot(std::vector<std::size_t>{2, 8, 1}, 42, {ActivationKind::Tanh});
  EXPECT_NEAR(forward(net, 0.5, 0.5), -0.12519683393630732, 1e-14);
}

TEST(Checkpoint, JsonRoundTripsBitExact) {
  train::Surrogate s;
  s.net = init_glorot(std::vector<std::size_t>{2, 5, 5, 1}, 99, {ActivationKind::LeakyRelu, 0.02, 1.0});
  s.c = 1.2345678901234567;
  s.norm.x = {0.1, 3.0};
  s.norm.y = {-2.0, 1.0 / 3.0};
  Checkpoint ck{s, 99};
  Checkpoint back = checkpoint_from_json(checkpoint_to_json(ck));
  EXPECT_EQ(back.model.net, s.net);
  EXPECT_EQ(back.model.c, s.c);
  EXPECT_EQ(back.model.norm, s.norm);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(checkpoint_to_json(back), checkpoint_to_json(ck));
  EXPECT_THROW(checkpoint_from_json("{\"dims\": [2,1]}"), FormatError);
  EXPECT_THROW(checkpoint_from_json("not json"), FormatError);
}
