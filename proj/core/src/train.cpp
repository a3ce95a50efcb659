#include "tpinn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tpinn/dual.hpp"
#include "tpinn/error.hpp"
#include "tpinn/numfmt.hpp"
#include "tpinn/rng.hpp"
#include "tpinn/scalar.hpp"

namespace tpinn::train {

std::string_view map_name(CoordinateMap map) { return map == CoordinateMap::StrutX ? "d:x,s:t" : "d:t,s:x"; }

CoordinateMap parse_map(std::string_view text) {
  if (text == "d:x,s:t" || text == "s:t,d:x") return CoordinateMap::StrutX;
  if (text == "d:t,s:x" || text == "s:x,d:t") return CoordinateMap::StrutT;
  throw ConfigError("bad coordinate map '" + std::string(text) + "'; expected d:x,s:t or d:t,s:x");
}

std::vector<Sample> to_samples(const data::LatticeDataset& ds, CoordinateMap map) {
  std::vector<Sample> out;
  out.reserve(ds.size());
  for (const auto& r : ds.rows()) {
    if (map == CoordinateMap::StrutX) {
      out.push_back({r.strut_diameter, r.unit_cell, r.yield_stress});
    } else {
      out.push_back({r.unit_cell, r.strut_diameter, r.yield_stress});
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (!(lambda_physics >= 0.0) || !std::isfinite(lambda_physics)) {
    throw ConfigError("lambda_physics must be non-negative");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (!std::isfinite(c_init)) throw ConfigError("c_init must be finite");
  validate_dims(dims);
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("Adam: " + std::to_string(params.size()) + " parameters, " + std::to_string(grads.size()) +
                     " gradients, state of " + std::to_string(state.m.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

namespace {

AffineMap fit_column(std::span<const Sample> samples, double Sample::*field) {
  double lo = samples.front().*field;
  double hi = lo;
  for (const Sample& s : samples) {
    lo = std::min(lo, s.*field);
    hi = std::max(hi, s.*field);
  }
  const double span = hi - lo;
  return {lo, span > 0.0 ? span : 1.0};
}

}  // namespace

NormalizationSpec NormalizationSpec::fit(std::span<const Sample> samples) {
  if (samples.empty()) throw ConfigError("cannot fit normalization on an empty sample set");
  return {fit_column(samples, &Sample::x), fit_column(samples, &Sample::t), fit_column(samples, &Sample::y)};
}

std::vector<Sample> NormalizationSpec::apply(std::span<const Sample> samples) const {
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(apply(s));
  return out;
}

template <class P, class T>
InputDerivatives<T> derivatives_impl(const Mlp& net, std::span<const P> params, const T& x, const T& t) {
  using D = BasicDual<T, 2>;
  const D dx{x, {one_like(x), zero_like(x)}};
  const D dt{t, {zero_like(t), one_like(t)}};
  const D out = forward<P, D>(net, params, dx, dt);
  return {out.primal, out.tangent[0], out.tangent[1]};
}

InputDerivatives<ad::Var> input_derivatives(const Mlp& net, std::span<const ad::Var> params, const ad::Var& x,
                                            const ad::Var& t) {
  return derivatives_impl<ad::Var, ad::Var>(net, params, x, t);
}

InputDerivatives<double> input_derivatives(const Mlp& net, std::span<const double> params, double x, double t) {
  return derivatives_impl<double, double>(net, params, x, t);
}

InputDerivatives<double> input_derivatives(const Mlp& net, double x, double t) {
  return input_derivatives(net, net.params(), x, t);
}

namespace {

void check_batch(std::span<const Sample> batch) {
  if (batch.empty()) throw ConfigError("loss batch is empty");
}

}  // namespace

// The residual is scaled by st so each point costs two nodes:
//   st r = u_t + (c st / sx) u_x,  physics = mean (st r)^2 / st^2.
LossTerms record_pinn_loss(ad::Tape& tape, const Mlp& net, std::span<const ad::Var> params, const ad::Var& c,
                           std::span<const Sample> batch, double lambda, CoordinateScale scale) {
  check_batch(batch);
  const ad::Var k = scale.t == scale.x ? c : c * (scale.t / scale.x);
  ad::Var data_sum = ad::Var(tape, tape.zero());
  ad::Var phys_sum = ad::Var(tape, tape.zero());
  for (const Sample& s : batch) {
    const ad::Var x = ad::lift(data_sum, s.x);
    const ad::Var t = ad::lift(data_sum, s.t);
    const auto d = input_derivatives(net, params, x, t);
    const ad::Var e = d.u - s.y;
    const ad::Var r = d.u_t + k * d.u_x;
    data_sum = data_sum + e * e;
    phys_sum = phys_sum + r * r;
  }
  const double n = static_cast<double>(batch.size());
  LossTerms out;
  out.data = data_sum * (1.0 / n);
  out.physics = phys_sum * (1.0 / (n * scale.t * scale.t));
  out.total = lambda == 0.0 ? out.data : out.data + out.physics * lambda;
  return out;
}

LossBreakdown pinn_loss(const Mlp& net, std::span<const Sample> batch, double c, double lambda,
                        CoordinateScale scale) {
  ad::Tape tape;
  const auto params = record_parameters(tape, net.params());
  const auto terms = record_pinn_loss(tape, net, params, ad::constant(tape, c), batch, lambda, scale);
  return {terms.data.value(), terms.physics.value(), terms.total.value()};
}

LossBreakdown reference_pinn_loss(const Mlp& net, std::span<const double> params, double c,
                                  std::span<const Sample> batch, double lambda, CoordinateScale scale) {
  check_batch(batch);
  double data_sum = 0.0;
  double phys_sum = 0.0;
  for (const Sample& s : batch) {
    const auto d = input_derivatives(net, params, s.x, s.t);
    const double e = d.u - s.y;
    const double r = d.u_t / scale.t + c * d.u_x / scale.x;
    data_sum += e * e;
    phys_sum += r * r;
  }
  const double n = static_cast<double>(batch.size());
  LossBreakdown out;
  out.data_loss = data_sum / n;
  out.physics_loss = phys_sum / n;
  out.total = out.data_loss + lambda * out.physics_loss;
  return out;
}

LossGradient pinn_loss_gradient(ad::Tape& tape, const Mlp& net, double c, std::span<const Sample> batch,
                                double lambda, CoordinateScale scale) {
  tape.clear();
  const auto params = record_parameters(tape, net.params());
  const ad::Var cv = ad::variable(tape, c);
  const auto terms = record_pinn_loss(tape, net, params, cv, batch, lambda, scale);
  const ad::Gradient grad = ad::reverse_sweep(tape, terms.total.id());
  LossGradient out;
  out.loss = {terms.data.value(), terms.physics.value(), terms.total.value()};
  out.params.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out.params[i] = grad[params[i].id()];
  out.c = grad[cv.id()];
  return out;
}

double pinn_gradient_check(const Mlp& net, double c, std::span<const Sample> batch, double lambda,
                           CoordinateScale scale, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  ad::Tape tape;
  const LossGradient g = pinn_loss_gradient(tape, net, c, batch, lambda, scale);

  auto rel = [](double analytic, double fd) {
    return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
  };
  std::vector<double> p = net.get_params();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double p0 = p[i];
    p[i] = p0 + step;
    const double fp = reference_pinn_loss(net, p, c, batch, lambda, scale).total;
    p[i] = p0 - step;
    const double fm = reference_pinn_loss(net, p, c, batch, lambda, scale).total;
    p[i] = p0;
    worst = std::max(worst, rel(g.params[i], (fp - fm) / (2.0 * step)));
  }
  const double fp = reference_pinn_loss(net, p, c + step, batch, lambda, scale).total;
  const double fm = reference_pinn_loss(net, p, c - step, batch, lambda, scale).total;
  worst = std::max(worst, rel(g.c, (fp - fm) / (2.0 * step)));
  return worst;
}

double min_hidden_preactivation(const Mlp& net, double x, double t) {
  const auto dims = net.dims();
  const auto p = net.params();
  std::vector<double> in{x, t}, out;
  double smallest = std::numeric_limits<double>::infinity();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t n_in = dims[l], n_out = dims[l + 1];
    const std::size_t bias_off = off + n_in * n_out;
    out.assign(n_out, 0.0);
    for (std::size_t j = 0; j < n_out; ++j) {
      double z = p[bias_off + j];
      for (std::size_t k = 0; k < n_in; ++k) z += p[off + j * n_in + k] * in[k];
      if (l + 2 < dims.size()) {
        smallest = std::min(smallest, std::abs(z));
        z = activate(net.activation(), z);
      }
      out[j] = z;
    }
    off = bias_off + n_out;
    in.swap(out);
  }
  return smallest;
}

GateTrial gradient_gate_trial(std::span<const std::size_t> dims, Activation act, std::uint64_t seed,
                              std::size_t batch_size, double margin, double step) {
  Rng rng(seed);
  Mlp net = init_glorot(dims, seed, act);
  std::vector<double> p = net.get_params();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    off += dims[l] * dims[l + 1];
    for (std::size_t j = 0; j < dims[l + 1]; ++j) p[off + j] = rng.uniform(-0.5, 0.5);
    off += dims[l + 1];
  }
  net.set_params(p);

  std::vector<Sample> batch;
  std::size_t attempts = 0;
  while (batch.size() < batch_size) {
    if (++attempts > 100000) throw ConfigError("could not sample a batch away from activation kinks");
    const Sample s{rng.uniform(), rng.uniform(), rng.uniform()};
    if (min_hidden_preactivation(net, s.x, s.t) > margin) batch.push_back(s);
  }
  GateTrial trial;
  trial.seed = seed;
  trial.c = rng.uniform(0.5, 2.0);
  const CoordinateScale scale{rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0)};
  trial.max_rel_error = pinn_gradient_check(net, trial.c, batch, 1.0, scale, step);
  return trial;
}

double Surrogate::predict(double x, double t) const {
  return norm.y.invert(forward(net, norm.x.apply(x), norm.t.apply(t)));
}

TrainResult train(std::span<const Sample> samples, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw ConfigError("training set is empty");

  TrainResult result;
  Surrogate& model = result.model;
  model.norm = NormalizationSpec::fit(samples);
  model.map = cfg.map;
  model.net = init_glorot(cfg.dims, cfg.seed, cfg.activation);
  model.c = cfg.c_init;

  const std::vector<Sample> batch = model.norm.apply(samples);
  const CoordinateScale scale{model.norm.x.scale, model.norm.t.scale};

  const std::size_t n_net = model.net.parameter_count();
  std::vector<double> theta = model.net.get_params();
  if (cfg.c_learnable) theta.push_back(model.c);
  AdamState adam(theta.size());
  std::vector<double> grads(theta.size());

  ad::Tape tape;
  result.curve.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    tape.clear();
    const double c_now = cfg.c_learnable ? theta[n_net] : model.c;
    LossTerms terms;
    std::vector<ad::Var> params;
    ad::Var cv;
    try {
      params = record_parameters(tape, std::span<const double>(theta).first(n_net));
      cv = cfg.c_learnable ? ad::variable(tape, c_now) : ad::constant(tape, c_now);
      terms = record_pinn_loss(tape, model.net, params, cv, batch, cfg.lambda_physics, scale);
    } catch (const RecordError& e) {
      throw DivergenceError(epoch, e.what());
    }
    const ad::Gradient grad = ad::reverse_sweep(tape, terms.total.id());
    for (std::size_t i = 0; i < n_net; ++i) grads[i] = grad[params[i].id()];
    if (cfg.c_learnable) grads[n_net] = grad[cv.id()];
    for (double g : grads) {
      if (!std::isfinite(g)) throw DivergenceError(epoch, "non-finite gradient");
    }

    result.curve.push_back({epoch, {terms.data.value(), terms.physics.value(), terms.total.value()}, c_now});
    adam_step(theta, grads, adam, cfg);
    for (double p : theta) {
      if (!std::isfinite(p)) throw DivergenceError(epoch, "non-finite parameter after Adam step");
    }
  }

  model.net.set_params(std::span<const double>(theta).first(n_net));
  if (cfg.c_learnable) model.c = theta[n_net];
  return result;
}

TrainResult train(const data::LatticeDataset& ds, const TrainConfig& cfg) {
  const auto samples = to_samples(ds, cfg.map);
  return train(samples, cfg);
}

namespace {

void check_test(std::span<const Sample> test) {
  if (test.empty()) throw ConfigError("test set is empty");
}

}  // namespace

Metrics evaluate(const Surrogate& model, std::span<const Sample> test) {
  check_test(test);
  Metrics m;
  for (const Sample& s : test) {
    const double e = model.predict(s.x, s.t) - s.y;
    m.mse += e * e;
    m.mae += std::abs(e);
  }
  const double n = static_cast<double>(test.size());
  m.mse /= n;
  m.mae /= n;
  return m;
}

Metrics evaluate(const Surrogate& model, const data::LatticeDataset& test) {
  const auto samples = to_samples(test, model.map);
  return evaluate(model, samples);
}

Metrics evaluate_normalized(const Surrogate& model, std::span<const Sample> test) {
  check_test(test);
  Metrics m;
  for (const Sample& s : test) {
    const Sample n = model.norm.apply(s);
    const double e = forward(model.net, n.x, n.t) - n.y;
    m.mse += e * e;
    m.mae += std::abs(e);
  }
  const double n = static_cast<double>(test.size());
  m.mse /= n;
  m.mae /= n;
  return m;
}

std::string loss_curve_csv(std::span<const EpochRecord> curve) {
  std::string out = "epoch,total_loss,data_loss,physics_loss,c\n";
  for (const EpochRecord& r : curve) {
    out += std::to_string(r.epoch);
    out += ',';
    out += format_g17(r.loss.total);
    out += ',';
    out += format_g17(r.loss.data_loss);
    out += ',';
    out += format_g17(r.loss.physics_loss);
    out += ',';
    out += format_g17(r.c);
    out += '\n';
  }
  return out;
}

}  // namespace tpinn::train
