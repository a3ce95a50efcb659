#pragma once

// PINN objective with a learnable advection velocity, Adam, and metrics.
//
// The network maps normalized coordinates (x~, t~) in [0, 1]^2 to a
// normalized target u~ in [0, 1]. The physics residual is evaluated in the
// original coordinate units, so with x = sx x~ + x0 and t = st t~ + t0
//
//   r = u~_t~ / st + c u~_x~ / sx
//
// and c is the velocity in original (x per t) units.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpinn/activation.hpp"
#include "tpinn/autodiff.hpp"
#include "tpinn/dataset.hpp"
#include "tpinn/mlp.hpp"

namespace tpinn::train {

// Which lattice input plays the spatial role. Default: strut diameter -> x,
// unit cell -> t ("d:x,s:t").
enum class CoordinateMap { StrutX, StrutT };

std::string_view map_name(CoordinateMap map);
CoordinateMap parse_map(std::string_view text);  // "d:x,s:t" or "d:t,s:x"

struct Sample {
  double x = 0.0;
  double t = 0.0;
  double y = 0.0;
};

std::vector<Sample> to_samples(const data::LatticeDataset& ds, CoordinateMap map);

struct TrainConfig {
  std::size_t epochs = 2000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda_physics = 1.0;
  std::vector<std::size_t> dims{2, 16, 16, 1};
  Activation activation{ActivationKind::Tanh};
  std::uint64_t seed = 42;
  double c_init = 1.0;
  bool c_learnable = true;
  CoordinateMap map = CoordinateMap::StrutX;

  // Throws ConfigError.
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update in place. Throws ShapeError when the
// parameter, gradient and state lengths disagree.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg);

struct LossBreakdown {
  double data_loss = 0.0;
  double physics_loss = 0.0;
  double total = 0.0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct AffineMap {
  double shift = 0.0;
  double scale = 1.0;

  double apply(double v) const { return (v - shift) / scale; }
  double invert(double v) const { return v * scale + shift; }
  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

// Min/max scaling of each column to [0, 1]. A constant column keeps scale 1.
struct NormalizationSpec {
  AffineMap x;
  AffineMap t;
  AffineMap y;

  static NormalizationSpec fit(std::span<const Sample> samples);
  Sample apply(const Sample& s) const { return {x.apply(s.x), t.apply(s.t), y.apply(s.y)}; }
  std::vector<Sample> apply(std::span<const Sample> samples) const;
  friend bool operator==(const NormalizationSpec&, const NormalizationSpec&) = default;
};

// Original-coordinate length of one normalized unit along x and t.
struct CoordinateScale {
  double x = 1.0;
  double t = 1.0;
};

template <class S>
struct InputDerivatives {
  S u;
  S u_x;
  S u_t;
};

// Network output and its exact input derivatives. The taped form shares one
// primal pass between the x- and t-seeded tangents; everything stays
// differentiable with respect to `params`.
InputDerivatives<ad::Var> input_derivatives(const Mlp& net, std::span<const ad::Var> params, const ad::Var& x,
                                            const ad::Var& t);
// Tape-free forward-mode evaluation with the stored parameters.
InputDerivatives<double> input_derivatives(const Mlp& net, double x, double t);
InputDerivatives<double> input_derivatives(const Mlp& net, std::span<const double> params, double x, double t);

struct LossTerms {
  ad::Var data;
  ad::Var physics;
  ad::Var total;
};

// data = mean (u - y)^2, physics = mean r^2, total = data + lambda physics.
// The batch holds normalized samples. Throws ConfigError on an empty batch.
LossTerms record_pinn_loss(ad::Tape& tape, const Mlp& net, std::span<const ad::Var> params, const ad::Var& c,
                           std::span<const Sample> batch, double lambda, CoordinateScale scale = {});

LossBreakdown pinn_loss(const Mlp& net, std::span<const Sample> batch, double c, double lambda,
                        CoordinateScale scale = {});

// Same objective computed with double-valued duals, no tape involved.
LossBreakdown reference_pinn_loss(const Mlp& net, std::span<const double> params, double c,
                                  std::span<const Sample> batch, double lambda, CoordinateScale scale = {});

struct LossGradient {
  LossBreakdown loss;
  std::vector<double> params;  // d total / d parameter, flat order
  double c = 0.0;              // d total / d c
};

LossGradient pinn_loss_gradient(ad::Tape& tape, const Mlp& net, double c, std::span<const Sample> batch,
                                double lambda, CoordinateScale scale = {});

// Max over parameters and c of |analytic - central difference| / max(1, |analytic|),
// the central differences taken on reference_pinn_loss.
double pinn_gradient_check(const Mlp& net, double c, std::span<const Sample> batch, double lambda,
                           CoordinateScale scale = {}, double step = 1e-5);

// Smallest |pre-activation| over every hidden unit of net at (x, t).
double min_hidden_preactivation(const Mlp& net, double x, double t);

struct GateTrial {
  std::uint64_t seed = 0;
  double c = 0.0;
  double max_rel_error = 0.0;
};

// One randomized gradient-gate trial: a Glorot net with randomized biases, a
// random velocity and coordinate scale, and a batch drawn so that every hidden
// pre-activation stays at least `margin` away from zero (ReLU-family kinks).
GateTrial gradient_gate_trial(std::span<const std::size_t> dims, Activation act, std::uint64_t seed,
                              std::size_t batch_size = 8, double margin = 1e-3, double step = 1e-5);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;
  double c = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

// A trained network together with the scaling it expects.
struct Surrogate {
  Mlp net;
  NormalizationSpec norm;
  double c = 0.0;
  CoordinateMap map = CoordinateMap::StrutX;

  // Original units in, original units out.
  double predict(double x, double t) const;
};

struct TrainResult {
  Surrogate model;
  std::vector<EpochRecord> curve;
};

// Full-batch Adam for cfg.epochs steps on the given (original-unit) samples.
// The loss recorded for epoch k is evaluated at the parameters the k-th step
// starts from. Throws DivergenceError when the loss or gradient stops being finite.
TrainResult train(std::span<const Sample> samples, const TrainConfig& cfg);
TrainResult train(const data::LatticeDataset& ds, const TrainConfig& cfg);

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
};

// Metrics in original units. Throws ConfigError on an empty test set.
Metrics evaluate(const Surrogate& model, std::span<const Sample> test);
Metrics evaluate(const Surrogate& model, const data::LatticeDataset& test);
// Metrics on the normalized target scale of the model.
Metrics evaluate_normalized(const Surrogate& model, std::span<const Sample> test);

// Header "epoch,total_loss,data_loss,physics_loss,c", 17 significant digits.
std::string loss_curve_csv(std::span<const EpochRecord> curve);

}  // namespace tpinn::train
