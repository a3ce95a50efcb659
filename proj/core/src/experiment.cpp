#include "tpinn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "tpinn/digest.hpp"
#include "tpinn/error.hpp"
#include "tpinn/numfmt.hpp"
#include "tpinn/pde.hpp"
#include "tpinn/rng.hpp"

namespace tpinn::experiment {

using nlohmann::json;

namespace {

constexpr std::array<ReferenceValue, 6> kReference{{
    {ActivationKind::Relu, 4.393951, 1.658419},
    {ActivationKind::Tanh, 4.396555, 1.658940},
    {ActivationKind::Sigmoid, 4.370328, 1.653357},
    {ActivationKind::LeakyRelu, 4.378629, 1.655049},
    {ActivationKind::Elu, 4.366074, 1.652316},
    {ActivationKind::Swish, 4.395654, 1.658550},
}};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::span<const ReferenceValue> reference_values() { return kReference; }

std::optional<ReferenceValue> reference_for(ActivationKind kind) {
  for (const auto& r : kReference) {
    if (r.activation == kind) return r;
  }
  return std::nullopt;
}

void SweepConfig::validate() const {
  if (activations.empty()) throw ConfigError("sweep needs at least one activation");
  std::set<ActivationKind> seen;
  for (ActivationKind k : activations) {
    if (!seen.insert(k).second) {
      throw ConfigError("activation '" + std::string(activation_name(k)) + "' listed twice");
    }
  }
  if (trials_per_activation < 1) throw ConfigError("trials_per_activation must be at least 1");
  base.validate();
}

namespace {

SweepRow run_trials(ActivationKind kind, std::span<const train::Sample> train_set,
                    std::span<const train::Sample> test_set, const SweepConfig& cfg) {
  SweepRow row;
  row.activation = kind;
  const auto start = std::chrono::steady_clock::now();
  try {
    for (std::size_t trial = 0; trial < cfg.trials_per_activation; ++trial) {
      train::TrainConfig tc = cfg.base;
      tc.activation.kind = kind;
      tc.seed = cfg.base.seed + trial;
      const auto result = train::train(train_set, tc);
      const auto metrics = train::evaluate(result.model, test_set);
      row.mse += metrics.mse;
      row.mae += metrics.mae;
      row.final_c += result.model.c;
    }
    const double n = static_cast<double>(cfg.trials_per_activation);
    row.mse /= n;
    row.mae /= n;
    row.final_c /= n;
  } catch (const DivergenceError& e) {
    row.diverged = true;
    row.note = e.what();
    row.mse = row.mae = row.final_c = kNaN;
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

SweepReport run_sweep(const data::LatticeDataset& ds, const SweepConfig& cfg) {
  cfg.validate();
  const auto samples = train::to_samples(ds, cfg.base.map);
  const auto [train_idx, test_idx] = data::split_indices(samples.size(), cfg.train_fraction, cfg.base.seed);
  if (train_idx.empty() || test_idx.empty()) {
    throw ConfigError("dataset of " + std::to_string(samples.size()) + " rows is too small to split");
  }
  std::vector<train::Sample> train_set;
  std::vector<train::Sample> test_set;
  for (std::size_t i : train_idx) train_set.push_back(samples[i]);
  for (std::size_t i : test_idx) test_set.push_back(samples[i]);

  SweepReport report;
  report.meta.seed = cfg.base.seed;
  report.meta.dims = cfg.base.dims;
  report.meta.epochs = cfg.base.epochs;
  report.meta.lambda_physics = cfg.base.lambda_physics;
  report.meta.learning_rate = cfg.base.learning_rate;
  report.meta.trials_per_activation = cfg.trials_per_activation;
  report.meta.n_train = train_set.size();
  report.meta.n_test = test_set.size();
  report.meta.map = std::string(train::map_name(cfg.base.map));
  report.meta.dataset_hash = sha256_hex(data::to_csv(ds));

  const std::size_t n = cfg.activations.size();
  report.rows.resize(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        report.rows[i] = run_trials(cfg.activations[i], train_set, test_set, cfg);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

namespace {

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_meta(const SweepMetadata& a, const SweepMetadata& b) {
  return a.seed == b.seed && a.dims == b.dims && a.epochs == b.epochs && a.lambda_physics == b.lambda_physics &&
         a.learning_rate == b.learning_rate && a.trials_per_activation == b.trials_per_activation &&
         a.n_train == b.n_train && a.n_test == b.n_test && a.map == b.map && a.dataset_hash == b.dataset_hash;
}

bool same_rows(const SweepReport& a, const SweepReport& b, bool with_time) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const SweepRow& x = a.rows[i];
    const SweepRow& y = b.rows[i];
    if (x.activation != y.activation || !same_number(x.mse, y.mse) || !same_number(x.mae, y.mae) ||
        !same_number(x.final_c, y.final_c) || x.diverged != y.diverged || x.note != y.note) {
      return false;
    }
    if (with_time && !same_number(x.wall_seconds, y.wall_seconds)) return false;
  }
  return true;
}

}  // namespace

bool same_results(const SweepReport& a, const SweepReport& b) {
  return same_meta(a.meta, b.meta) && same_rows(a, b, false);
}

bool operator==(const SweepReport& a, const SweepReport& b) {
  return same_meta(a.meta, b.meta) && same_rows(a, b, true);
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + std::string(text) + "'; expected csv, json or markdown");
}

std::string_view format_extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

namespace {

std::string fixed6(double v) { return std::isfinite(v) ? format_fixed(v, 6) : "nan"; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string render_csv(const SweepReport& r) {
  std::string out = "activation,mse,mae,wall_seconds,final_c\n";
  for (const auto& row : r.rows) {
    out += activation_name(row.activation);
    out += ',' + fixed6(row.mse) + ',' + fixed6(row.mae) + ',' + fixed6(row.wall_seconds) + ',' +
           fixed6(row.final_c) + '\n';
  }
  return out;
}

json report_json(const SweepReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"activation", std::string(activation_name(row.activation))},
                    {"mse", number_or_null(row.mse)},
                    {"mae", number_or_null(row.mae)},
                    {"wall_seconds", row.wall_seconds},
                    {"final_c", number_or_null(row.final_c)},
                    {"diverged", row.diverged},
                    {"note", row.note}});
  }
  json ref = json::array();
  for (const auto& v : kReference) {
    ref.push_back({{"activation", std::string(activation_name(v.activation))}, {"mse", v.mse}, {"mae", v.mae}});
  }
  const auto& m = r.meta;
  json meta = {{"seed", m.seed},
               {"dims", m.dims},
               {"epochs", m.epochs},
               {"lambda_physics", m.lambda_physics},
               {"learning_rate", m.learning_rate},
               {"trials_per_activation", m.trials_per_activation},
               {"n_train", m.n_train},
               {"n_test", m.n_test},
               {"map", m.map},
               {"dataset_hash", m.dataset_hash},
               {"dataset_hash_algorithm", "sha256"},
               {"paper_reference", ref}};
  return {{"rows", rows}, {"metadata", meta}};
}

std::string render_markdown(const SweepReport& r) {
  std::string out;
  out += "| Activation Function | MSE | MAE | Reference MSE | Reference MAE | c | Wall time (s) |\n";
  out += "|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& row : r.rows) {
    const auto ref = reference_for(row.activation);
    out += "| " + std::string(activation_label(row.activation));
    if (row.diverged) out += " (diverged)";
    out += " | " + fixed6(row.mse) + " | " + fixed6(row.mae) + " | " + (ref ? fixed6(ref->mse) : "-") + " | " +
           (ref ? fixed6(ref->mae) : "-") + " | " + fixed6(row.final_c) + " | " + fixed6(row.wall_seconds) +
           " |\n";
  }
  const auto& m = r.meta;
  out += "\n";
  out += "MSE in MPa^2, MAE in MPa, on " + std::to_string(m.n_test) + " held-out rows (" +
         std::to_string(m.n_train) + " training). dims " + format_dims(m.dims) + ", " + std::to_string(m.epochs) +
         " epochs, lambda " + format_shortest(m.lambda_physics) + ", lr " + format_shortest(m.learning_rate) +
         ", seed " + std::to_string(m.seed) + ", map " + m.map + ".\n";
  out += "Dataset sha256 " + m.dataset_hash + ".\n";
  out += "Reference columns are published values for a different, unpublished dataset; shown for comparison only.\n";
  return out;
}

}  // namespace

std::string render_report(const SweepReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return report_json(report).dump(2) + "\n";
    case ReportFormat::Markdown: return render_markdown(report);
  }
  return {};
}

SweepReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    SweepReport r;
    for (const auto& row : j.at("rows")) {
      SweepRow s;
      s.activation = parse_activation(row.at("activation").get<std::string>());
      s.mse = number_from(row.at("mse"));
      s.mae = number_from(row.at("mae"));
      s.wall_seconds = row.at("wall_seconds").get<double>();
      s.final_c = number_from(row.at("final_c"));
      s.diverged = row.value("diverged", false);
      s.note = row.value("note", std::string());
      r.rows.push_back(std::move(s));
    }
    const json& m = j.at("metadata");
    r.meta.seed = m.at("seed").get<std::uint64_t>();
    r.meta.dims = m.at("dims").get<std::vector<std::size_t>>();
    r.meta.epochs = m.at("epochs").get<std::size_t>();
    r.meta.lambda_physics = m.at("lambda_physics").get<double>();
    r.meta.learning_rate = m.at("learning_rate").get<double>();
    r.meta.trials_per_activation = m.at("trials_per_activation").get<std::size_t>();
    r.meta.n_train = m.at("n_train").get<std::size_t>();
    r.meta.n_test = m.at("n_test").get<std::size_t>();
    r.meta.map = m.at("map").get<std::string>();
    r.meta.dataset_hash = m.at("dataset_hash").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

void emit_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report '" + path.string() + "'");
  out << render_report(report, format);
  if (!out) throw IoError("failed writing report '" + path.string() + "'");
}

std::string metric_bars_csv(const SweepReport& report) {
  std::string out = "activation,metric,value\n";
  for (const auto& row : report.rows) {
    out += std::string(activation_name(row.activation)) + ",mse," + fixed6(row.mse) + '\n';
    out += std::string(activation_name(row.activation)) + ",mae," + fixed6(row.mae) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// decision-boundary demo

namespace {

// log(1 + e^z) without overflow.
ad::Var softplus(const ad::Var& z) {
  const double v = z.value();
  const ad::Var neg_abs = v >= 0.0 ? -z : z;
  return relu(z) + log(1.0 + exp(neg_abs));
}

}  // namespace

DemoResult decision_boundary_demo(std::uint64_t seed, ActivationKind activation, const DemoConfig& cfg) {
  if (cfg.points_per_class == 0 || cfg.hidden == 0 || cfg.grid < 2 || cfg.epochs == 0) {
    throw ConfigError("decision boundary demo needs points, hidden units, epochs and a grid");
  }
  DemoResult out;
  Rng rng(seed);
  for (int label = 0; label < 2; ++label) {
    const double cx = label == 0 ? -cfg.center_offset : cfg.center_offset;
    for (std::size_t i = 0; i < cfg.points_per_class; ++i) {
      const double x1 = rng.normal(cx, cfg.sigma);
      const double x2 = rng.normal(0.0, cfg.sigma);
      out.points.push_back({x1, x2, label});
    }
  }

  const std::vector<std::size_t> dims{2, cfg.hidden, 1};
  Mlp net = init_glorot(dims, seed, Activation{activation});
  std::vector<double> theta = net.get_params();
  train::TrainConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  train::AdamState adam(theta.size());
  std::vector<double> grads(theta.size());
  ad::Tape tape;
  const double inv_n = 1.0 / static_cast<double>(out.points.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    tape.clear();
    const auto params = record_parameters(tape, theta);
    ad::Var sum(tape, tape.zero());
    for (const auto& p : out.points) {
      const ad::Var z = forward<ad::Var, ad::Var>(net.dims(), net.activation(), std::span<const ad::Var>(params),
                                                  ad::lift(sum, p.x1), ad::lift(sum, p.x2));
      // Binary cross-entropy on the logit: softplus(z) - y z.
      sum = sum + (p.label == 1 ? softplus(-z) : softplus(z));
    }
    const ad::Var loss = sum * inv_n;
    const auto grad = ad::reverse_sweep(tape, loss.id());
    for (std::size_t i = 0; i < params.size(); ++i) grads[i] = grad[params[i].id()];
    out.final_loss = loss.value();
    train::adam_step(theta, grads, adam, adam_cfg);
  }
  net.set_params(theta);

  auto probability = [&](double x1, double x2) { return sigmoid(forward(net, x1, x2)); };

  std::size_t correct = 0;
  double lo1 = out.points.front().x1, hi1 = lo1, lo2 = out.points.front().x2, hi2 = lo2;
  for (const auto& p : out.points) {
    const int predicted = probability(p.x1, p.x2) >= 0.5 ? 1 : 0;
    if (predicted == p.label) ++correct;
    lo1 = std::min(lo1, p.x1);
    hi1 = std::max(hi1, p.x1);
    lo2 = std::min(lo2, p.x2);
    hi2 = std::max(hi2, p.x2);
  }
  out.train_accuracy = static_cast<double>(correct) / static_cast<double>(out.points.size());

  const double m1 = cfg.margin * (hi1 - lo1);
  const double m2 = cfg.margin * (hi2 - lo2);
  const auto g1 = pde::linspace(lo1 - m1, hi1 + m1, cfg.grid);
  const auto g2 = pde::linspace(lo2 - m2, hi2 + m2, cfg.grid);
  out.grid.reserve(cfg.grid * cfg.grid);
  for (double a : g1) {
    for (double b : g2) out.grid.push_back({a, b, probability(a, b)});
  }
  out.net = std::move(net);
  return out;
}

std::string demo_grid_csv(const DemoResult& result) {
  std::string out = "x1,x2,probability\n";
  out.reserve(out.size() + result.grid.size() * 60);
  for (const auto& g : result.grid) {
    out += format_g17(g.x1) + ',' + format_g17(g.x2) + ',' + format_g17(g.probability) + '\n';
  }
  return out;
}

}  // namespace tpinn::experiment
