#pragma once

// Activation-function sweep, its report renderings, and the two-cluster
// decision-boundary demo.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpinn/activation.hpp"
#include "tpinn/dataset.hpp"
#include "tpinn/train.hpp"

namespace tpinn::experiment {

struct SweepConfig {
  std::vector<ActivationKind> activations{kAllActivations.begin(), kAllActivations.end()};
  train::TrainConfig base;
  std::size_t trials_per_activation = 1;
  double train_fraction = 0.8;
  // Worker threads; trials share only the immutable dataset and config.
  std::size_t threads = 1;

  // Nonempty, duplicate-free activation list; ConfigError otherwise.
  void validate() const;
};

// Published MSE (MPa^2) / MAE (MPa) per activation, carried in every report
// for side-by-side display. Not an acceptance target.
struct ReferenceValue {
  ActivationKind activation;
  double mse;
  double mae;
};
std::span<const ReferenceValue> reference_values();
std::optional<ReferenceValue> reference_for(ActivationKind kind);

struct SweepRow {
  ActivationKind activation = ActivationKind::Relu;
  double mse = 0.0;  // MPa^2
  double mae = 0.0;  // MPa
  double wall_seconds = 0.0;
  double final_c = 0.0;
  bool diverged = false;
  std::string note;  // divergence message when diverged
};

struct SweepMetadata {
  std::uint64_t seed = 0;
  std::vector<std::size_t> dims;
  std::size_t epochs = 0;
  double lambda_physics = 0.0;
  double learning_rate = 0.0;
  std::size_t trials_per_activation = 1;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::string map;
  std::string dataset_hash;  // SHA-256 of the canonical dataset CSV
};

struct SweepReport {
  std::vector<SweepRow> rows;
  SweepMetadata meta;
};

// Rows are returned in the requested activation order whatever order the
// trials finish in. A diverging trial yields a row marked diverged.
SweepReport run_sweep(const data::LatticeDataset& ds, const SweepConfig& cfg);

// Equality of everything except wall-clock time.
bool same_results(const SweepReport& a, const SweepReport& b);
bool operator==(const SweepReport& a, const SweepReport& b);

enum class ReportFormat { Csv, Json, Markdown };
ReportFormat parse_report_format(std::string_view text);
std::string_view format_extension(ReportFormat f);

// csv: activation,mse,mae,wall_seconds,final_c with 6 decimals.
// json: the full report plus a "paper_reference" table in the metadata.
// markdown: a table with reference MSE/MAE columns beside the measured ones.
std::string render_report(const SweepReport& report, ReportFormat format);
SweepReport report_from_json(std::string_view text);
// Throws IoError when the path cannot be written.
void emit_report(const SweepReport& report, ReportFormat format, const std::filesystem::path& path);
// Bar-chart data: activation,metric,value for both metrics.
std::string metric_bars_csv(const SweepReport& report);

struct DemoConfig {
  std::size_t points_per_class = 100;
  double center_offset = 1.5;  // clusters at (-offset, 0) and (+offset, 0)
  double sigma = 0.5;
  std::size_t hidden = 10;
  std::size_t epochs = 300;
  double learning_rate = 0.05;
  std::size_t grid = 200;
  double margin = 0.1;  // fraction of the data extent added on each side
};

struct LabeledPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  int label = 0;  // 0 or 1
};

struct GridProbability {
  double x1 = 0.0;
  double x2 = 0.0;
  double probability = 0.0;
};

struct DemoResult {
  std::vector<LabeledPoint> points;
  Mlp net;  // outputs the logit
  double train_accuracy = 0.0;
  double final_loss = 0.0;
  std::vector<GridProbability> grid;
};

// Two Gaussian clusters, a [2, hidden, 1] classifier (sigmoid of the output
// logit) trained on binary cross-entropy with Adam, then class-1 probability
// on a grid over the data bounding box.
DemoResult decision_boundary_demo(std::uint64_t seed, ActivationKind activation, const DemoConfig& cfg = {});
std::string demo_grid_csv(const DemoResult& result);  // x1,x2,probability

}  // namespace tpinn::experiment
