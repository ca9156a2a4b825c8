/*
 * Copyright 2026 The windowshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "windowshap/algorithms.hpp"
#include "windowshap/error.hpp"
#include "windowshap/evaluation.hpp"
#include "windowshap/io.hpp"
#include "windowshap/models.hpp"
#include "windowshap/render.hpp"

namespace windowshap::cli {

namespace {

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return 2;
    case ErrorCategory::kModel: return 3;
    case ErrorCategory::kIo: return 4;
  }
  return 2;
}

void report_error(std::ostream& err, const std::string& code,
                  const std::string& category, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"category", category}, {"message", message}};
  err << j.dump() << "\n";
}

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kModel: return "model";
    case ErrorCategory::kIo: return "io";
  }
  return "config";
}

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

// Flags shared by every subcommand that runs an explainer.
struct ExplainFlags {
  std::string algorithm;
  std::optional<std::size_t> window_len;
  std::optional<std::size_t> stride;
  std::optional<double> delta;
  std::optional<std::size_t> max_windows;
  std::optional<std::size_t> n_samples;
  std::optional<std::size_t> exact_threshold;
  std::string mode = "auto";
  std::uint64_t seed = 0;
};

void add_explain_flags(CLI::App* cmd, ExplainFlags& f, bool algorithm_required,
                       const std::vector<std::string>& algorithms) {
  auto* alg = cmd->add_option("--algorithm", f.algorithm, "Explainer")
                  ->check(CLI::IsMember(algorithms));
  if (algorithm_required) alg->required();
  cmd->add_option("--window-len", f.window_len, "Window length l")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--stride", f.stride, "Sliding stride s")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--delta", f.delta, "Dynamic split threshold")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-windows", f.max_windows,
                  "Dynamic total window budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--n-samples", f.n_samples, "Kernel coalition budget per game")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--exact-threshold", f.exact_threshold,
                  "Largest player count solved exactly in auto mode");
  cmd->add_option("--mode", f.mode, "Engine mode")
      ->check(CLI::IsMember({"auto", "exact", "kernel"}));
  cmd->add_option("--seed", f.seed, "Run seed");
}

EngineConfig engine_config(const ExplainFlags& f) {
  EngineConfig c;
  c.mode = f.mode == "exact"    ? EngineMode::kExact
           : f.mode == "kernel" ? EngineMode::kKernel
                                : EngineMode::kAuto;
  c.n_samples = f.n_samples;
  c.seed = f.seed;
  if (f.exact_threshold) c.exact_threshold = *f.exact_threshold;
  return c;
}

void require(bool present, const char* flag, const std::string& algorithm) {
  if (!present) {
    config_error(std::string("missing required flag ") + flag +
                 " for --algorithm " + algorithm);
  }
}

ExplainerConfig explainer_config(const ExplainFlags& f) {
  ExplainerConfig c;
  c.algorithm = f.algorithm;
  c.seed = f.seed;
  const EngineConfig engine = engine_config(f);
  if (f.algorithm == "stationary") {
    require(f.window_len.has_value(), "--window-len", f.algorithm);
    c.stationary = {*f.window_len, engine};
  } else if (f.algorithm == "sliding") {
    require(f.window_len.has_value(), "--window-len", f.algorithm);
    require(f.stride.has_value(), "--stride", f.algorithm);
    c.sliding = {*f.window_len, *f.stride, engine};
  } else if (f.algorithm == "dynamic") {
    require(f.delta.has_value(), "--delta", f.algorithm);
    require(f.max_windows.has_value(), "--max-windows", f.algorithm);
    c.dynamic = {*f.delta, *f.max_windows, engine};
  }
  return c;
}

Attribution run_explainer(const ExplainerConfig& c, Predictor& predictor,
                          const TimeSeriesInstance& x,
                          const BackgroundSet& background) {
  if (c.algorithm == "stationary")
    return stationary_windowshap(predictor, x, background, c.stationary);
  if (c.algorithm == "sliding")
    return sliding_windowshap(predictor, x, background, c.sliding);
  return dynamic_windowshap(predictor, x, background, c.dynamic);
}

BackgroundSet load_background(const std::string& path) {
  return BackgroundSet(io::read_dataset(path).instances);
}

// --- explain ---------------------------------------------------------------

struct ExplainCmd {
  ExplainFlags flags;
  std::string model;
  std::string input;
  std::string background;
  std::string output;
  std::string csv;
};

int do_explain(const ExplainCmd& cmd) {
  const ExplainerConfig config = explainer_config(cmd.flags);
  const ModelSpec spec = ModelSpec::parse(cmd.model);
  const TimeSeriesInstance x = io::read_instance(cmd.input);
  const BackgroundSet background = load_background(cmd.background);
  auto predictor = make_predictor(spec, x.shape());
  const Attribution a = run_explainer(config, *predictor, x, background);
  io::write_json(cmd.output, io::attribution_to_json(a));
  if (!cmd.csv.empty()) {
    io::write_text(cmd.csv,
                   io::format_point_values_csv(a.point_values, a.variable_names));
  }
  return 0;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateCmd {
  ExplainFlags flags;
  std::string model;
  std::string input;
  std::string background;
  std::string output;
  std::string metric = "inverse";
  double p = 90.0;
  std::size_t n = 5;
  int jobs = 1;
};

int do_evaluate(const EvaluateCmd& cmd) {
  const ExplainerConfig config = explainer_config(cmd.flags);
  const PerturbationMetric metric = parse_metric(cmd.metric);
  const ModelSpec spec = ModelSpec::parse(cmd.model);
  const io::Dataset data = io::read_dataset(cmd.input);
  if (!data.labels) {
    config_error("'" + cmd.input + "' has no labels; evaluate needs them");
  }
  const BackgroundSet background = load_background(cmd.background);
  const Shape shape = data.instances.front().shape();
  PredictorFactory factory = [&] { return make_predictor(spec, shape); };
  const EvalReport report =
      evaluate_explainer(factory, data.instances, *data.labels, background,
                         config, metric, cmd.p, cmd.n, cmd.jobs);
  io::write_json(cmd.output, report.to_json());
  return 0;
}

// --- bench -----------------------------------------------------------------

struct BenchCmd {
  ExplainFlags flags;
  std::string model;
  std::string input;
  std::string background;
  std::string output;
  std::string sweep;
  std::string sweep_param;
  std::size_t d = 8;
  std::size_t l = 120;
  std::size_t instances = 1;
  std::size_t background_size = 10;
};

std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw 0;
    } catch (...) {
      config_error("--sweep entry '" + item + "' is not a number");
    }
  }
  if (values.empty()) config_error("--sweep needs at least one value");
  return values;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::size_t as_count(double v, const std::string& name) {
  if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    config_error(name + " sweep values must be positive integers");
  }
  return static_cast<std::size_t>(v);
}

// Seeded dense weights scaled so the logit stays O(1).
Matrix bench_weights(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0xbe7c4ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(shape.variables, shape.steps);
  const double scale = 1.0 / std::sqrt(static_cast<double>(shape.cells()));
  for (double& v : w.flat()) v = normal(rng) * scale;
  return w;
}

int do_bench(const BenchCmd& cmd, std::ostream& out) {
  const std::vector<double> sweep = parse_sweep(cmd.sweep);
  ExplainFlags flags = cmd.flags;
  std::string param = cmd.sweep_param;
  if (param.empty()) {
    param = flags.algorithm == "dynamic" ? "max_windows" : "window_len";
  }
  static const std::vector<std::string> known = {
      "window_len", "stride", "delta", "max_windows", "n_samples"};
  if (std::find(known.begin(), known.end(), param) == known.end()) {
    config_error("unknown --sweep-param '" + param + "'");
  }

  std::vector<TimeSeriesInstance> xs;
  std::optional<BackgroundSet> background;
  if (!cmd.input.empty()) {
    xs = io::read_dataset(cmd.input).instances;
    if (xs.size() > cmd.instances) xs.erase(xs.begin() + cmd.instances, xs.end());
  } else {
    xs = generate_synthetic(SyntheticKind::kAnomaly, cmd.d, cmd.l,
                            cmd.instances, flags.seed)
             .instances;
  }
  if (!cmd.background.empty()) {
    background.emplace(load_background(cmd.background));
  } else {
    background.emplace(generate_synthetic(SyntheticKind::kAnomaly,
                                          xs.front().shape().variables,
                                          xs.front().shape().steps,
                                          cmd.background_size,
                                          derive_seed(flags.seed, 1))
                           .instances);
  }
  const Shape shape = xs.front().shape();
  std::unique_ptr<Predictor> predictor =
      cmd.model.empty() ? builtin_linear(bench_weights(shape, flags.seed), 0.0)
                        : make_predictor(ModelSpec::parse(cmd.model), shape);

  // Validate every sweep point before timing anything.
  std::vector<ExplainerConfig> configs;
  for (double v : sweep) {
    ExplainFlags f = flags;
    if (param == "window_len") f.window_len = as_count(v, param);
    if (param == "stride") f.stride = as_count(v, param);
    if (param == "max_windows") f.max_windows = as_count(v, param);
    if (param == "n_samples") f.n_samples = as_count(v, param);
    if (param == "delta") {
      if (!(v >= 0.0)) config_error("delta sweep values must be >= 0");
      f.delta = v;
    }
    configs.push_back(explainer_config(f));
  }

  std::string csv =
      "algorithm,param_name,param_value,wall_ms,predictor_calls,"
      "instances_scored,peak_bytes_estimate\n";
  for (std::size_t k = 0; k < configs.size(); ++k) {
    CallCounter total;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& x : xs) {
      const Attribution a = run_explainer(configs[k], *predictor, x, *background);
      total += calls_from_meta(a);
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", ms);
    csv += flags.algorithm + "," + param + "," + format_number(sweep[k]) + "," +
           wall + "," + std::to_string(total.predictor_calls) + "," +
           std::to_string(total.instances_scored) + "," +
           std::to_string(total.peak_bytes_estimate) + "\n";
  }
  if (cmd.output.empty() || cmd.output == "-") {
    out << csv;
  } else {
    io::write_text(cmd.output, csv);
  }
  return 0;
}

// --- synth -----------------------------------------------------------------

struct SynthCmd {
  std::string kind = "anomaly";
  std::size_t d = 4;
  std::size_t l = 100;
  std::size_t n = 50;
  std::uint64_t seed = 0;
  std::string output;
  std::string background_output;
  std::size_t background_size = 20;
};

int do_synth(const SynthCmd& cmd) {
  const SyntheticKind kind = parse_synthetic_kind(cmd.kind);
  const SyntheticData data =
      generate_synthetic(kind, cmd.d, cmd.l, cmd.n, cmd.seed);
  io::Dataset ds;
  ds.variables = data.instances.front().variable_names();
  ds.instances = data.instances;
  ds.labels = data.labels;
  ds.segments = data.segments;
  nlohmann::json doc = io::dataset_to_json(ds);
  doc["meta"] = {{"kind", synthetic_kind_name(kind)},
                 {"seed", cmd.seed},
                 {"segment_length", synthetic_segment_length(cmd.l)}};
  io::write_json(cmd.output, doc);

  if (!cmd.background_output.empty()) {
    // Label-0 draws from an independent stream: noise only.
    const SyntheticData pool =
        generate_synthetic(kind, cmd.d, cmd.l, 2 * cmd.background_size + 1,
                           derive_seed(cmd.seed, 1));
    io::Dataset bg;
    bg.variables = ds.variables;
    for (std::size_t k = 0; k < pool.instances.size(); ++k) {
      if (pool.labels[k] == 0 && bg.instances.size() < cmd.background_size)
        bg.instances.push_back(pool.instances[k]);
    }
    io::write_json(cmd.background_output, io::dataset_to_json(bg));
  }
  return 0;
}

// --- render ----------------------------------------------------------------

struct RenderCmd {
  std::string input;
  std::string output;
  std::string csv;
  std::size_t top = 15;
};

int do_render(const RenderCmd& cmd) {
  const Attribution a = io::attribution_from_json(io::read_json(cmd.input));
  render::HeatmapOptions options;
  options.top = cmd.top;
  io::write_text(cmd.output, render::heatmap_svg(a, options));
  if (!cmd.csv.empty()) {
    io::write_text(cmd.csv,
                   io::format_point_values_csv(a.point_values, a.variable_names));
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Window-based Shapley explanations for time-series classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "windowshap 0.1.0");

  const std::vector<std::string> shap_algorithms = {"stationary", "sliding",
                                                    "dynamic"};
  const std::vector<std::string> eval_algorithms = {
      "stationary", "sliding", "dynamic", "zero", "random"};

  ExplainCmd explain;
  auto* explain_cmd = app.add_subcommand("explain", "Explain one instance");
  add_explain_flags(explain_cmd, explain.flags, true, shap_algorithms);
  explain_cmd->add_option("--model", explain.model, "Model address")->required();
  explain_cmd->add_option("--input", explain.input, "Instance CSV or dataset JSON")
      ->required();
  explain_cmd->add_option("--background", explain.background,
                          "Background dataset JSON")
      ->required();
  explain_cmd->add_option("-o,--output", explain.output, "Attribution JSON")
      ->required();
  explain_cmd->add_option("--csv", explain.csv, "Also write point values as CSV");

  EvaluateCmd evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score an explainer with perturbation metrics");
  add_explain_flags(evaluate_cmd, evaluate.flags, true, eval_algorithms);
  evaluate_cmd->add_option("--model", evaluate.model, "Model address")->required();
  evaluate_cmd->add_option("--input", evaluate.input, "Labelled dataset JSON")
      ->required();
  evaluate_cmd->add_option("--background", evaluate.background,
                           "Background dataset JSON")
      ->required();
  evaluate_cmd->add_option("-o,--output", evaluate.output, "Report JSON")
      ->required();
  evaluate_cmd->add_option("--metric", evaluate.metric, "inverse or mean_interval")
      ->check(CLI::IsMember({"inverse", "mean_interval", "mean-interval"}));
  evaluate_cmd->add_option("--p", evaluate.p, "Percentile threshold")
      ->check(CLI::Range(0.0, 100.0));
  evaluate_cmd->add_option("--n", evaluate.n, "Mean-interval length");
  evaluate_cmd->add_option("--jobs", evaluate.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);

  BenchCmd bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time an explainer over a sweep");
  add_explain_flags(bench_cmd, bench.flags, true, shap_algorithms);
  bench_cmd->add_option("--sweep", bench.sweep, "Comma-separated values")
      ->required();
  bench_cmd->add_option("--sweep-param", bench.sweep_param,
                        "Parameter to sweep (window_len, stride, delta, "
                        "max_windows, n_samples)");
  bench_cmd->add_option("--model", bench.model,
                        "Model address (default: seeded linear weights)");
  bench_cmd->add_option("--input", bench.input, "Dataset JSON (default: synthetic)");
  bench_cmd->add_option("--background", bench.background, "Background dataset JSON");
  bench_cmd->add_option("--d", bench.d, "Synthetic variables")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--l", bench.l, "Synthetic steps")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--instances", bench.instances, "Instances per point")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--background-size", bench.background_size,
                        "Synthetic background size")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("-o,--output", bench.output, "CSV path (default stdout)");

  SynthCmd synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--kind", synth.kind, "anomaly or smooth")
      ->check(CLI::IsMember({"anomaly", "smooth"}));
  synth_cmd->add_option("--d", synth.d, "Variables")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--l", synth.l, "Steps")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--n", synth.n, "Instances")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("-o,--output", synth.output, "Dataset JSON")->required();
  synth_cmd->add_option("--background-out", synth.background_output,
                        "Also write a label-0 background set");
  synth_cmd->add_option("--background-size", synth.background_size,
                        "Background instances")
      ->check(CLI::PositiveNumber);

  RenderCmd render_args;
  auto* render_cmd = app.add_subcommand("render", "Draw an attribution heatmap");
  render_cmd->add_option("--input", render_args.input, "Attribution JSON")
      ->required();
  render_cmd->add_option("-o,--output", render_args.output, "SVG path")->required();
  render_cmd->add_option("--csv", render_args.csv, "Also write point values as CSV");
  render_cmd->add_option("--top", render_args.top, "Variables shown")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, e.get_name(), "config", e.what());
    return 2;
  }

  try {
    if (*explain_cmd) return do_explain(explain);
    if (*evaluate_cmd) return do_evaluate(evaluate);
    if (*bench_cmd) return do_bench(bench, out);
    if (*synth_cmd) return do_synth(synth);
    if (*render_cmd) return do_render(render_args);
  } catch (const Error& e) {
    const ErrorCategory c = error_category(e.code());
    report_error(err, error_code_name(e.code()), category_name(c), e.what());
    return exit_code(c);
  } catch (const std::exception& e) {
    report_error(err, "Internal", "config", e.what());
    return 2;
  }
  return 2;
}

}  // namespace windowshap::cli
