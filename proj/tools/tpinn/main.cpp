// tpinn: command-line driver for synthesis, training, sweeps, PDE grids,
// gradient checks and the decision-boundary demo.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tpinn/activation.hpp"
#include "tpinn/checkpoint.hpp"
#include "tpinn/dataset.hpp"
#include "tpinn/error.hpp"
#include "tpinn/experiment.hpp"
#include "tpinn/mlp.hpp"
#include "tpinn/numfmt.hpp"
#include "tpinn/pde.hpp"
#include "tpinn/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tpinn;

namespace {

enum Exit : int { kOk = 0, kGate = 1, kBadInput = 2, kDiverged = 3 };

struct Globals {
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  bool quiet = false;
};

struct SynthArgs {
  std::string input;
  std::size_t n = 1000;
  std::string targets = "interp";
  std::string out;
};

struct TrainArgs {
  std::string data;
  std::string activation = "relu";
  std::size_t epochs = 2000;
  double lr = 1e-3;
  double lambda = 1.0;
  std::string dims = "2,16,16,1";
  std::string map = "d:x,s:t";
  double c_init = 1.0;
  bool fixed_c = false;
  double train_fraction = 0.8;
};

struct SweepArgs {
  std::string data;
  std::size_t epochs = 2000;
  std::string format = "markdown";
  std::string activations = "relu,tanh,sigmoid,leaky_relu,elu,swish";
  double lr = 1e-3;
  double lambda = 1.0;
  std::string dims = "2,16,16,1";
  std::string map = "d:x,s:t";
  double train_fraction = 0.8;
  std::size_t threads = 1;
};

struct GridArgs {
  std::string g = "sine:1";
  double c = 1.0;
  std::string x = "0:2pi:101";
  std::string t = "0:2:101";
  double source = 0.0;
  std::string out;
};

struct GradArgs {
  std::string dims = "2,8,1";
  std::string activation = "tanh";
  std::size_t trials = 10;
  double tol = 1e-4;
};

struct DemoArgs {
  std::string activation = "tanh";
  std::size_t epochs = 300;
  double lr = 0.05;
  std::string out;
};

class Output {
 public:
  explicit Output(bool quiet) : quiet_(quiet) {}
  template <class... A>
  void line(const A&... parts) const {
    if (quiet_) return;
    (std::cout << ... << parts) << '\n';
  }

 private:
  bool quiet_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

fs::path resolve(const std::string& explicit_path, const fs::path& dir, const char* fallback) {
  return explicit_path.empty() ? dir / fallback : fs::path(explicit_path);
}

void write_manifest(const fs::path& dir, const std::string& command, const Globals& g, json options) {
  json m;
  m["command"] = command;
  m["seed"] = g.seed;
  m["out_dir"] = g.out_dir;
  m["quiet"] = g.quiet;
  m["options"] = std::move(options);
  write_text(dir / "run_manifest.json", m.dump(2) + "\n");
}

std::vector<ActivationKind> parse_activation_list(const std::string& text) {
  std::vector<ActivationKind> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.push_back(parse_activation(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int run_synth(const Globals& g, const SynthArgs& a) {
  Output out(g.quiet);
  const auto dir = prepare_out_dir(g.out_dir);
  const auto target_path = resolve(a.out, dir, "synthetic.csv");
  if (a.targets != "interp" && a.targets != "poly") {
    throw ConfigError("--targets must be interp or poly, got '" + a.targets + "'");
  }
  write_manifest(dir, "synth", g,
                 {{"input", a.input}, {"n", a.n}, {"targets", a.targets}, {"out", target_path.string()}});

  const auto raw = data::load_csv(a.input);
  std::optional<data::PolynomialModel> model;
  std::string r2 = "unavailable (fewer than 10 independent rows)";
  try {
    model = data::fit_polynomial(raw);
    r2 = format_fixed(data::r_squared(*model, raw), 6);
  } catch (const RankError&) {
    if (a.targets == "poly") throw;
  }
  const auto synth = a.targets == "poly"
                         ? data::interpolate_dataset(raw, a.n, data::TargetSource::Polynomial, &*model)
                         : data::interpolate_dataset(raw, a.n);
  data::save_csv(synth, target_path);
  out.line("rows: ", synth.size());
  out.line("polynomial R^2 on raw data: ", r2);
  out.line("wrote ", target_path.string());
  return kOk;
}

train::TrainConfig train_config(const Globals& g, const std::string& activation, std::size_t epochs, double lr,
                                double lambda, const std::string& dims, const std::string& map) {
  train::TrainConfig cfg;
  cfg.activation = Activation{parse_activation(activation)};
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.lambda_physics = lambda;
  cfg.dims = parse_dims(dims);
  cfg.map = train::parse_map(map);
  cfg.seed = g.seed;
  cfg.validate();
  return cfg;
}

int run_train(const Globals& g, const TrainArgs& a) {
  Output out(g.quiet);
  const auto dir = prepare_out_dir(g.out_dir);
  auto cfg = train_config(g, a.activation, a.epochs, a.lr, a.lambda, a.dims, a.map);
  cfg.c_init = a.c_init;
  cfg.c_learnable = !a.fixed_c;
  write_manifest(dir, "train", g,
                 {{"data", a.data},
                  {"activation", a.activation},
                  {"epochs", a.epochs},
                  {"lr", a.lr},
                  {"lambda", a.lambda},
                  {"dims", a.dims},
                  {"map", a.map},
                  {"c_init", a.c_init},
                  {"fixed_c", a.fixed_c},
                  {"train_fraction", a.train_fraction}});

  const auto ds = data::load_csv(a.data);
  const auto [train_set, test_set] = data::train_test_split(ds, a.train_fraction, g.seed);
  const auto result = train::train(train_set, cfg);
  const auto test = train::to_samples(test_set, cfg.map);
  const auto m = train::evaluate(result.model, test);
  const auto mn = train::evaluate_normalized(result.model, test);

  save_checkpoint(Checkpoint{result.model, g.seed}, dir / "model.json");
  write_text(dir / "loss_curve.csv", train::loss_curve_csv(result.curve));
  json metrics{{"mse", m.mse},
               {"mae", m.mae},
               {"c", result.model.c},
               {"normalized_mse", mn.mse},
               {"normalized_mae", mn.mae},
               {"n_train", train_set.size()},
               {"n_test", test_set.size()}};
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  out.line("test mse ", format_fixed(m.mse, 6), " MPa^2, mae ", format_fixed(m.mae, 6), " MPa, c ",
           format_fixed(result.model.c, 6));
  out.line("wrote ", (dir / "model.json").string(), ", loss_curve.csv, metrics.json");
  return kOk;
}

int run_sweep_cmd(const Globals& g, const SweepArgs& a) {
  Output out(g.quiet);
  const auto dir = prepare_out_dir(g.out_dir);
  experiment::SweepConfig cfg;
  cfg.base = train_config(g, "tanh", a.epochs, a.lr, a.lambda, a.dims, a.map);
  cfg.activations = parse_activation_list(a.activations);
  cfg.train_fraction = a.train_fraction;
  cfg.threads = a.threads;
  cfg.validate();
  const auto format = experiment::parse_report_format(a.format);
  write_manifest(dir, "sweep", g,
                 {{"data", a.data},
                  {"epochs", a.epochs},
                  {"format", a.format},
                  {"activations", a.activations},
                  {"lr", a.lr},
                  {"lambda", a.lambda},
                  {"dims", a.dims},
                  {"map", a.map},
                  {"train_fraction", a.train_fraction},
                  {"threads", a.threads}});

  const auto ds = data::load_csv(a.data);
  const auto report = experiment::run_sweep(ds, cfg);
  const auto path = dir / ("report." + std::string(experiment::format_extension(format)));
  experiment::emit_report(report, format, path);
  write_text(dir / "metric_bars.csv", experiment::metric_bars_csv(report));
  for (const auto& r : report.rows) {
    if (r.diverged) {
      out.line(activation_name(r.activation), ": diverged (", r.note, ")");
    } else {
      out.line(activation_name(r.activation), ": mse ", format_fixed(r.mse, 6), " mae ", format_fixed(r.mae, 6));
    }
  }
  out.line("wrote ", path.string());
  return kOk;
}

int run_grid(const Globals& g, const GridArgs& a) {
  Output out(g.quiet);
  const auto dir = prepare_out_dir(g.out_dir);
  const auto target_path = resolve(a.out, dir, "pde_grid.csv");
  const auto xr = pde::parse_range(a.x);
  const auto tr = pde::parse_range(a.t);
  // the solution grid always starts at t = 0
  if (tr.min != 0.0) throw ConfigError("time range must start at 0, got " + format_shortest(tr.min));
  pde::TransportProblem p;
  p.c = a.c;
  p.g = pde::Profile::parse(a.g);
  p.source = a.source;
  p.x_min = xr.min;
  p.x_max = xr.max;
  p.t_max = tr.max;
  p.validate();
  write_manifest(dir, "pde-grid", g,
                 {{"g", a.g}, {"c", a.c}, {"x", a.x}, {"t", a.t}, {"source", a.source}, {"out", target_path.string()}});

  const auto grid = pde::solve_grid(p, xr.count, tr.count);
  write_text(target_path, pde::grid_to_csv(grid));
  out.line("rows: ", grid.xs.size() * grid.ts.size());
  out.line("mass at t=", format_shortest(grid.ts.front()), ": ", format_g17(pde::mass_integral(grid, 0)));
  out.line("mass at t=", format_shortest(grid.ts.back()), ": ",
           format_g17(pde::mass_integral(grid, grid.ts.size() - 1)));
  out.line("wrote ", target_path.string());
  return kOk;
}

int run_gradcheck(const Globals& g, const GradArgs& a) {
  Output out(g.quiet);
  const auto dir = prepare_out_dir(g.out_dir);
  const auto dims = parse_dims(a.dims);
  validate_dims(dims);
  const auto kinds = a.activation == "all" ? std::vector<ActivationKind>(kAllActivations.begin(), kAllActivations.end())
                                           : parse_activation_list(a.activation);
  if (kinds.empty()) throw ConfigError("no activation given");
  if (a.trials == 0) throw ConfigError("--trials must be at least 1");
  write_manifest(dir, "gradcheck", g,
                 {{"dims", a.dims}, {"activation", a.activation}, {"trials", a.trials}, {"tol", a.tol}});

  bool ok = true;
  for (auto kind : kinds) {
    for (std::size_t i = 0; i < a.trials; ++i) {
      const auto trial = train::gradient_gate_trial(dims, Activation{kind}, g.seed + i);
      const bool pass = trial.max_rel_error <= a.tol;
      ok = ok && pass;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-10s trial %2zu  max rel error %.3e  %s", std::string(activation_name(kind)).c_str(),
                    i + 1, trial.max_rel_error, pass ? "ok" : "FAIL");
      out.line(buf);
    }
  }
  if (!ok) {
    std::cerr << "gradient check exceeded tolerance " << a.tol << "\n";
    return kGate;
  }
  return kOk;
}

int run_demo(const Globals& g, const DemoArgs& a) {
  Output out(g.quiet);
  const auto dir = prepare_out_dir(g.out_dir);
  const auto target_path = resolve(a.out, dir, "decision_grid.csv");
  const auto kind = parse_activation(a.activation);
  if (a.epochs == 0) throw ConfigError("--epochs must be at least 1");
  write_manifest(dir, "demo-classifier", g,
                 {{"activation", a.activation}, {"epochs", a.epochs}, {"lr", a.lr}, {"out", target_path.string()}});
  experiment::DemoConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  const auto r = experiment::decision_boundary_demo(g.seed, kind, cfg);
  write_text(target_path, experiment::demo_grid_csv(r));
  out.line("training accuracy: ", format_fixed(r.train_accuracy, 4));
  out.line("grid rows: ", r.grid.size());
  out.line("wrote ", target_path.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string names = activation_names_joined();
  CLI::App app{"Physics-informed surrogate training for lattice yield stress"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "tpinn 0.1.0");

  Globals g;
  app.add_option("--seed", g.seed, "Seed for initialization, splits and sampling")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for outputs and run_manifest.json")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Resample a raw lattice CSV to a synthetic dataset");
  synth->add_option("--input", sa.input, "Raw dataset CSV")->required();
  synth->add_option("--n", sa.n, "Synthetic row count")->capture_default_str();
  synth->add_option("--targets", sa.targets, "interp (interpolate yield stress) or poly (cubic fit)")
      ->capture_default_str();
  synth->add_option("--out", sa.out, "Output CSV (default OUT_DIR/synthetic.csv)");

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Train one surrogate");
  trn->add_option("--data", ta.data, "Dataset CSV")->required();
  trn->add_option("--activation", ta.activation, "Hidden activation: " + names)->capture_default_str();
  trn->add_option("--epochs", ta.epochs, "Full-batch Adam steps")->capture_default_str();
  trn->add_option("--lr", ta.lr, "Adam learning rate")->capture_default_str();
  trn->add_option("--lambda", ta.lambda, "Physics loss weight")->capture_default_str();
  trn->add_option("--dims", ta.dims, "Layer sizes, first 2 and last 1")->capture_default_str();
  trn->add_option("--map", ta.map, "Coordinate roles: d:x,s:t or d:t,s:x")->capture_default_str();
  trn->add_option("--c-init", ta.c_init, "Initial advection velocity")->capture_default_str();
  trn->add_flag("--fixed-c", ta.fixed_c, "Keep c at --c-init");
  trn->add_option("--train-fraction", ta.train_fraction, "Share of rows used for training")->capture_default_str();

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Train one model per activation and report MSE/MAE");
  sweep->add_option("--data", wa.data, "Dataset CSV")->required();
  sweep->add_option("--epochs", wa.epochs, "Full-batch Adam steps per model")->capture_default_str();
  sweep->add_option("--format", wa.format, "Report format: csv, json or markdown")->capture_default_str();
  sweep->add_option("--activations", wa.activations, "Comma-separated subset of: " + names)->capture_default_str();
  sweep->add_option("--lr", wa.lr, "Adam learning rate")->capture_default_str();
  sweep->add_option("--lambda", wa.lambda, "Physics loss weight")->capture_default_str();
  sweep->add_option("--dims", wa.dims, "Layer sizes")->capture_default_str();
  sweep->add_option("--map", wa.map, "Coordinate roles: d:x,s:t or d:t,s:x")->capture_default_str();
  sweep->add_option("--train-fraction", wa.train_fraction, "Share of rows used for training")->capture_default_str();
  sweep->add_option("--threads", wa.threads, "Concurrent trials")->capture_default_str();

  GridArgs ga;
  auto* grid = app.add_subcommand("pde-grid", "Exact transport solution on a grid (x,t,u CSV)");
  grid->add_option("--g", ga.g, "Initial profile: sine:K, gaussian:CENTER:WIDTH or poly:C0,C1,...")
      ->capture_default_str();
  grid->add_option("--c", ga.c, "Advection velocity")->capture_default_str();
  grid->add_option("--x", ga.x, "Space range MIN:MAX:COUNT (MIN/MAX may end in pi)")->capture_default_str();
  grid->add_option("--t", ga.t, "Time range 0:MAX:COUNT")->capture_default_str();
  grid->add_option("--source", ga.source, "Constant source term")->capture_default_str();
  grid->add_option("--out", ga.out, "Output CSV (default OUT_DIR/pde_grid.csv)");

  GradArgs ca;
  auto* grad = app.add_subcommand("gradcheck", "Compare PINN loss gradients with central differences");
  grad->add_option("--dims", ca.dims, "Layer sizes")->capture_default_str();
  grad->add_option("--activation", ca.activation, "One or more of: " + names + " (or all)")->capture_default_str();
  grad->add_option("--trials", ca.trials, "Random nets per activation")->capture_default_str();
  grad->add_option("--tol", ca.tol, "Maximum relative error")->capture_default_str();

  DemoArgs da;
  auto* demo = app.add_subcommand("demo-classifier", "Two-cluster classifier and its probability grid");
  demo->add_option("--activation", da.activation, "Hidden activation: " + names)->capture_default_str();
  demo->add_option("--epochs", da.epochs, "Adam steps")->capture_default_str();
  demo->add_option("--lr", da.lr, "Adam learning rate")->capture_default_str();
  demo->add_option("--out", da.out, "Output CSV (default OUT_DIR/decision_grid.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*synth) return run_synth(g, sa);
    if (*trn) return run_train(g, ta);
    if (*sweep) return run_sweep_cmd(g, wa);
    if (*grid) return run_grid(g, ga);
    if (*grad) return run_gradcheck(g, ca);
    if (*demo) return run_demo(g, da);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
