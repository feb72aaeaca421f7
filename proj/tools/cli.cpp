#include "cli.hpp"

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "rnnode/datasets.hpp"
#include "rnnode/errors.hpp"
#include "rnnode/model_io.hpp"
#include "rnnode/odeflow.hpp"
#include "rnnode/replicator.hpp"
#include "rnnode/svg.hpp"
#include "rnnode/training.hpp"
#include "rnnode/verify.hpp"
#include "run_config.hpp"

namespace rnnode::cli {
namespace {

// Defaults for the low-dimensional experiments.
constexpr double kDefaultGridStep = 1e-3;
constexpr double kDefaultTolerance = 1e-6;

// Raised for argument combinations CLI11 cannot express; maps to exit 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !std::isfinite(v)) {
      throw UsageError("cannot parse '" + item + "' as a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw UsageError("empty vector argument");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Optimizer optimizer_from_string(const std::string& tag) {
  if (tag == "sgd") return Optimizer::sgd;
  if (tag == "momentum" || tag == "sgd_momentum") return Optimizer::sgd_momentum;
  throw ConfigError("unknown optimizer '" + tag + "' (expected sgd or momentum)");
}

RunConfig config_or_empty(const std::optional<std::string>& path) {
  return path ? load_run_config(*path) : RunConfig{};
}

std::string require_path(const std::optional<std::string>& flag, const std::optional<std::string>& config,
                         const char* what) {
  if (flag) return *flag;
  if (config) return *config;
  throw UsageError(std::string("missing ") + what);
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string generator;
  std::string output;
  std::size_t per_class = 1000;
  std::size_t classes = 3;
  double sigma = 0.7;
  double radius = 2.5;
  std::size_t n = 1000;
  std::optional<double> noise;
  std::uint64_t seed = 0;
  std::string images;
  std::string labels;
  std::size_t limit = 0;
  std::optional<std::uint64_t> shuffle_seed;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  Dataset d;
  if (a.generator == "blobs") {
    d = gen_blobs(a.per_class, circle_centers(a.classes, a.radius), a.sigma, a.seed);
  } else if (a.generator == "rings") {
    d = gen_two_class(TwoClassKind::concentric_rings, a.n, a.noise.value_or(0.1), a.seed);
  } else if (a.generator == "arcs") {
    d = gen_two_class(TwoClassKind::interleaved_arcs, a.n, a.noise.value_or(0.1), a.seed);
  } else if (a.generator == "mnist") {
    if (a.images.empty() || a.labels.empty()) throw UsageError("gen mnist needs --images and --labels");
    d = load_idx(a.images, a.labels);
    d.name = "mnist";
    if (a.shuffle_seed) d = shuffle_split(d, 1.0, *a.shuffle_seed).first;
    if (a.limit > 0) d = take(d, a.limit);
  } else {
    throw UsageError("unknown generator '" + a.generator + "'");
  }
  save_csv(d, a.output);
  out << "D=" << d.size() << " M=" << d.input_dim << " N=" << d.num_labels << '\n';
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::optional<std::string> config;
  std::optional<std::string> data;
  std::optional<std::string> model;
  std::optional<std::string> history;
  std::optional<std::size_t> state_dim;
  std::optional<std::vector<std::size_t>> hidden_widths;
  std::optional<std::string> embed_activation;
  std::optional<std::string> hidden_activation;
  std::optional<double> tau;
  std::optional<std::size_t> n_steps;
  std::optional<double> learning_rate;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> optimizer;
  std::optional<double> momentum;
  std::optional<std::uint64_t> seed;
  std::optional<double> init_scale;
  std::optional<double> clip_norm;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_empty(a.config);
  const std::string data_path = require_path(a.data, cfg.io.data, "--data");
  const std::string model_path = require_path(a.model, cfg.io.model, "-o/--model");
  const std::optional<std::string> history_path = a.history ? a.history : cfg.io.history;

  const Dataset data = load_csv(data_path);

  const Architecture base_arch;
  const TrainConfig base;
  Architecture arch;
  arch.input_dim = data.input_dim;
  arch.num_labels = data.num_labels;
  arch.state_dim = resolve(a.state_dim, cfg.arch.state_dim, base_arch.state_dim);
  arch.hidden_widths = resolve(a.hidden_widths, cfg.arch.hidden_widths, base_arch.hidden_widths);
  arch.embed_activation =
      activation_from_string(resolve(a.embed_activation, cfg.arch.embed_activation, std::string("tanh")));
  arch.hidden_activation =
      activation_from_string(resolve(a.hidden_activation, cfg.arch.hidden_activation, std::string("tanh")));
  arch.tau = resolve(a.tau, cfg.arch.tau, base_arch.tau);
  arch.n_steps = resolve(a.n_steps, cfg.arch.n_steps, base_arch.n_steps);
  arch.validate();

  TrainConfig tc;
  tc.learning_rate = resolve(a.learning_rate, cfg.train.learning_rate, base.learning_rate);
  tc.epochs = resolve(a.epochs, cfg.train.epochs, base.epochs);
  tc.batch_size = resolve(a.batch_size, cfg.train.batch_size, base.batch_size);
  tc.optimizer = optimizer_from_string(resolve(a.optimizer, cfg.train.optimizer, std::string(base.optimizer == Optimizer::sgd ? "sgd" : "momentum")));
  tc.momentum = resolve(a.momentum, cfg.train.momentum, base.momentum);
  tc.seed = resolve(a.seed, cfg.train.seed, base.seed);
  tc.init_scale = resolve(a.init_scale, cfg.train.init_scale, base.init_scale);
  tc.clip_norm = resolve(a.clip_norm, cfg.train.clip_norm, base.clip_norm);
  tc.validate(data.size());

  const bool quiet = a.quiet;
  const TrainResult result = train(tc, data, arch, [&out, quiet](const EpochRecord& r) {
    if (!quiet) out << "epoch " << r.epoch << " loss " << r.loss << " train_error " << r.train_error << '\n';
  });
  save_model(result.spec, model_path);
  if (history_path) write_history_csv(result.history, *history_path);
  if (result.diverged) {
    out << "training diverged (" << result.divergence_message << "); saved last finite model\n";
    return kTrainingDiverged;
  }
  const double final_loss = result.history.empty() ? result.initial_loss : result.history.back().loss;
  const Evaluation ev = evaluate(result.spec, data, result.spec.n_steps);
  out << "final_loss " << final_loss << '\n';
  out << "train_error " << static_cast<double>(ev.misclassified) / static_cast<double>(data.size()) << '\n';
  out << "misclassified " << ev.misclassified << " of " << data.size() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& model_path, const std::string& data_path, std::ostream& out) {
  const RnnOdeSpec spec = load_model(model_path);
  const Dataset data = load_csv(data_path);
  const Evaluation ev = evaluate(spec, data, spec.n_steps);
  out << "misclassified " << ev.misclassified << " of " << data.size() << '\n';
  out << "accuracy " << ev.accuracy << '\n';
  out << "confusion (rows: true label, columns: predicted)\n";
  for (const auto& row : ev.confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- shared input/grid handling

struct InputArgs {
  std::optional<std::string> input;
  std::optional<std::string> data;
  std::size_t sample = 0;
  std::size_t samples = 1;
};

std::vector<Vector> resolve_inputs(const InputArgs& a, const RnnOdeSpec& spec, const std::optional<std::string>& cfg_data,
                                   bool many) {
  std::vector<Vector> inputs;
  if (a.input) {
    inputs.push_back(parse_vector(*a.input));
  } else if (a.data || cfg_data) {
    const Dataset data = load_csv(a.data ? *a.data : *cfg_data);
    const std::size_t count = many ? a.samples : 1;
    if (a.sample + count > data.size()) throw UsageError("sample range exceeds dataset size");
    for (std::size_t j = 0; j < count; ++j) inputs.push_back(data.inputs[a.sample + j]);
  } else {
    throw UsageError("provide --input or --data");
  }
  for (const auto& x : inputs) {
    if (static_cast<std::size_t>(x.size()) != spec.input_dim()) {
      throw UsageError("input has length " + std::to_string(x.size()) + " but model expects " +
                       std::to_string(spec.input_dim()));
    }
  }
  return inputs;
}

struct GridArgs {
  std::optional<std::string> config;
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<std::string> method;
};

std::pair<TimeGrid, Method> resolve_grid(const GridArgs& a, const RunConfig& cfg, double default_horizon) {
  const double horizon = resolve(a.horizon, cfg.grid.horizon, default_horizon);
  const double step = resolve(a.step, cfg.grid.step, kDefaultGridStep);
  const Method method = method_from_string(resolve(a.method, cfg.grid.method, std::string("rk4")));
  return {TimeGrid(horizon, step), method};
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::optional<std::string> model;
  InputArgs input;
  GridArgs grid;
  double tolerance = kDefaultTolerance;
  std::optional<std::string> report;
  std::optional<std::string> deviation_csv;
  bool no_augmented = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_empty(a.grid.config);
  const RnnOdeSpec spec = load_model(require_path(a.model, cfg.io.model, "--model"));
  const auto inputs = resolve_inputs(a.input, spec, cfg.io.data, true);
  const auto [grid, method] = resolve_grid(a.grid, cfg, spec.horizon);
  const std::string report_path = a.report ? *a.report : cfg.io.report.value_or("verify_report.json");
  const std::string csv_path =
      a.deviation_csv ? *a.deviation_csv : cfg.io.deviation_csv.value_or(report_path + ".deviation.csv");

  const EquivalenceReport report = verify_equivalence(spec, inputs, grid, method, !a.no_augmented);
  write_deviation_csv(report, csv_path);
  {
    std::ofstream f(report_path);
    if (!f) throw FormatError("cannot open '" + report_path + "' for writing");
    f << report_to_json(report, csv_path, a.tolerance) << '\n';
  }
  out << "sup_deviation " << report.sup_deviation << '\n';
  out << "mean_deviation " << report.mean_deviation << '\n';
  out << "simplex_drift_max " << report.simplex_drift_max << '\n';
  if (report.augmented_sup_deviation) {
    out << "augmented_sup_deviation " << *report.augmented_sup_deviation << '\n';
  } else if (!report.augmented_note.empty()) {
    out << "augmented form skipped: " << report.augmented_note << '\n';
  }
  const bool passed = report.sup_deviation <= a.tolerance;
  out << (passed ? "PASS" : "FAIL") << " (tolerance " << a.tolerance << ")\n";
  return passed ? kOk : kVerificationFailed;
}

// ---------------------------------------------------------------- trace

struct TraceArgs {
  std::optional<std::string> model;
  InputArgs input;
  GridArgs grid;
  std::string hidden_csv = "hidden.csv";
  std::string output_csv = "output.csv";
  std::optional<std::string> svg;
};

int cmd_trace(const TraceArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_empty(a.grid.config);
  const RnnOdeSpec spec = load_model(require_path(a.model, cfg.io.model, "--model"));
  if (a.svg && spec.num_labels() != 3) {
    throw UsageError("--svg draws the 3-label simplex; this model has " + std::to_string(spec.num_labels()) +
                     " labels");
  }
  const auto inputs = resolve_inputs(a.input, spec, cfg.io.data, false);
  const auto [grid, method] = resolve_grid(a.grid, cfg, spec.horizon);
  const CascadeRun run = integrate_cascade(spec, inputs.front(), grid, method);
  write_trajectory_csv(run.hidden, a.hidden_csv);
  write_trajectory_csv(run.output, a.output_csv);
  if (a.svg) write_ternary_svg({TernaryPath{run.output.states, "#1f77b4"}}, *a.svg, "y(t)");
  out << "points " << grid.size() << '\n';
  out << "label " << classify(run.output.final_state()) << '\n';
  out << "final_y";
  for (Eigen::Index i = 0; i < run.output.final_state().size(); ++i) out << ' ' << run.output.final_state()(i);
  out << '\n';
  return kOk;
}

// ---------------------------------------------------------------- demo-game

struct GameArgs {
  std::string game;
  std::string p0 = "0.5,0.25,0.25";
  double horizon = 50.0;
  double step = kDefaultGridStep;
  std::string method = "rk4";
  std::string csv = "game.csv";
  std::optional<std::string> svg;
};

int cmd_demo_game(const GameArgs& a, std::ostream& out) {
  Matrix payoff(3, 3);
  if (a.game == "dominant") {
    payoff << 1, 0, 0, 0, 0, 0, 0, 0, 0;
  } else if (a.game == "rps") {
    payoff << 0, -1, 1, 1, 0, -1, -1, 1, 0;
  } else {
    throw UsageError("unknown game '" + a.game + "' (expected dominant or rps)");
  }
  const Vector p = parse_vector(a.p0);
  if (p.size() != 3) throw UsageError("--p0 needs three components");
  std::optional<SimplexPoint> p0;
  try {
    p0.emplace(p);
  } catch (const DomainError& e) {
    throw UsageError(std::string("--p0 is not on the simplex: ") + e.what());
  }
  const TimeGrid grid(a.horizon, a.step);
  const GameRun run = integrate_constant_game(payoff, *p0, grid, method_from_string(a.method));
  write_trajectory_csv(run.trajectory, a.csv);
  if (a.svg) write_ternary_svg({TernaryPath{run.trajectory.states, "#d62728"}}, *a.svg, a.game);

  const Vector& last = run.trajectory.final_state();
  out << "final_p " << last(0) << ' ' << last(1) << ' ' << last(2) << '\n';
  if (a.game == "rps") {
    double worst = 0.0;
    const double initial = p0->probs().prod();
    for (const auto& s : run.trajectory.states) worst = std::max(worst, std::abs(s.prod() - initial));
    out << "product_invariant_drift " << worst << '\n';
  } else {
    out << "distance_to_vertex_1 " << (last - SimplexPoint::vertex(0, 3).probs()).cwiseAbs().maxCoeff() << '\n';
  }
  return kOk;
}

void add_grid_options(CLI::App* cmd, GridArgs& g) {
  cmd->add_option("--config", g.config, "JSON run configuration");
  cmd->add_option("-T,--horizon", g.horizon, "integration horizon (default: model horizon)");
  cmd->add_option("--step", g.step, "integrator step h (default 1e-3)");
  cmd->add_option("--method", g.method, "euler or rk4 (default rk4)");
}

void add_input_options(CLI::App* cmd, InputArgs& in, bool many) {
  cmd->add_option("--input", in.input, "comma-separated input vector x");
  cmd->add_option("--data", in.data, "dataset CSV to draw inputs from");
  cmd->add_option("--sample", in.sample, "0-based row of the first input taken from --data");
  if (many) cmd->add_option("--samples", in.samples, "number of consecutive rows to verify");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recurrent ODE classifier with replicator-dynamics readout"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate or convert a dataset to CSV");
  gen_cmd->add_option("generator", gen.generator, "blobs | rings | arcs | mnist")->required();
  gen_cmd->add_option("-o,--output", gen.output, "output CSV path")->required();
  gen_cmd->add_option("--per-class", gen.per_class, "blobs: points per class");
  gen_cmd->add_option("--classes", gen.classes, "blobs: number of classes");
  gen_cmd->add_option("--sigma", gen.sigma, "blobs: cluster standard deviation");
  gen_cmd->add_option("--radius", gen.radius, "blobs: radius of the circle of centers");
  gen_cmd->add_option("--n", gen.n, "rings/arcs: number of points");
  gen_cmd->add_option("--noise", gen.noise, "rings/arcs: noise level (default 0.1)");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--images", gen.images, "mnist: IDX image file");
  gen_cmd->add_option("--labels", gen.labels, "mnist: IDX label file");
  gen_cmd->add_option("--limit", gen.limit, "mnist: keep only the first n images (after shuffling)");
  gen_cmd->add_option("--shuffle-seed", gen.shuffle_seed, "mnist: shuffle with this seed before --limit");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset CSV");
  train_cmd->add_option("--config", tr.config, "JSON run configuration");
  train_cmd->add_option("--data", tr.data, "training dataset CSV");
  train_cmd->add_option("-o,--model", tr.model, "output model JSON");
  train_cmd->add_option("--history", tr.history, "output history CSV (epoch,loss,train_error)");
  train_cmd->add_option("--state-dim", tr.state_dim, "hidden state dimension d_0 = d_L");
  train_cmd->add_option("--hidden-widths", tr.hidden_widths, "inner widths of the hidden map")->delimiter(',');
  train_cmd->add_option("--embed-activation", tr.embed_activation, "input layer activation");
  train_cmd->add_option("--hidden-activation", tr.hidden_activation, "hidden map activation");
  train_cmd->add_option("--tau", tr.tau, "step size tau");
  train_cmd->add_option("--steps", tr.n_steps, "number of recurrent steps N_T");
  train_cmd->add_option("--lr", tr.learning_rate, "learning rate");
  train_cmd->add_option("--epochs", tr.epochs, "epochs");
  train_cmd->add_option("--batch-size", tr.batch_size, "mini-batch size");
  train_cmd->add_option("--optimizer", tr.optimizer, "sgd or momentum");
  train_cmd->add_option("--momentum", tr.momentum, "momentum coefficient");
  train_cmd->add_option("--seed", tr.seed, "initialization and shuffling seed");
  train_cmd->add_option("--init-scale", tr.init_scale, "initialization scale c (bound c/sqrt(d_in))");
  train_cmd->add_option("--clip-norm", tr.clip_norm, "clip batch gradient to this norm (0 disables)");
  train_cmd->add_flag("-q,--quiet", tr.quiet, "suppress per-epoch output");

  std::string eval_model;
  std::string eval_data;
  auto* eval_cmd = app.add_subcommand("eval", "report misclassification of a model on a dataset");
  eval_cmd->add_option("--model", eval_model, "model JSON")->required();
  eval_cmd->add_option("--data", eval_data, "dataset CSV")->required();

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "check that the readout follows the replicator system");
  verify_cmd->add_option("--model", ver.model, "model JSON");
  add_input_options(verify_cmd, ver.input, true);
  add_grid_options(verify_cmd, ver.grid);
  verify_cmd->add_option("--tol", ver.tolerance, "pass threshold on the sup deviation");
  verify_cmd->add_option("--report", ver.report, "report JSON path");
  verify_cmd->add_option("--deviation-csv", ver.deviation_csv, "per-time deviation CSV path");
  verify_cmd->add_flag("--no-augmented", ver.no_augmented, "skip the invertible-readout form");

  TraceArgs trc;
  auto* trace_cmd = app.add_subcommand("trace", "export a(t) and y(t) for one input");
  trace_cmd->add_option("--model", trc.model, "model JSON");
  add_input_options(trace_cmd, trc.input, false);
  add_grid_options(trace_cmd, trc.grid);
  trace_cmd->add_option("--hidden-csv", trc.hidden_csv, "output CSV for a(t)");
  trace_cmd->add_option("--output-csv", trc.output_csv, "output CSV for y(t)");
  trace_cmd->add_option("--svg", trc.svg, "ternary simplex plot of y(t) (3 labels only)");

  GameArgs game;
  auto* game_cmd = app.add_subcommand("demo-game", "replicator dynamics of a fixed 3-strategy game");
  game_cmd->add_option("game", game.game, "dominant | rps")->required();
  game_cmd->add_option("--p0", game.p0, "initial population state");
  game_cmd->add_option("-T,--horizon", game.horizon, "integration horizon");
  game_cmd->add_option("--step", game.step, "integrator step");
  game_cmd->add_option("--method", game.method, "euler or rk4");
  game_cmd->add_option("--csv", game.csv, "trajectory CSV path");
  game_cmd->add_option("--svg", game.svg, "ternary simplex plot path");

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* culprit = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << culprit->help();
    return kUsage;
  }

  out << std::setprecision(17);
  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_model, eval_data, out);
    if (verify_cmd->parsed()) return cmd_verify(ver, out);
    if (trace_cmd->parsed()) return cmd_trace(trc, out);
    if (game_cmd->parsed()) return cmd_demo_game(game, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kIntegrationDiverged;
  } catch (const InteriorViolationError& e) {
    err << "error: " << e.what() << '\n';
    return kIntegrationDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace rnnode::cli
