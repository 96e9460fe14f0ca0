// urlr: fit, predict, evaluate and simulate robust pairwise rankings.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urlr/error.hpp"
#include "urlr/eval.hpp"
#include "urlr/graph.hpp"
#include "urlr/io.hpp"
#include "urlr/pipeline.hpp"
#include "urlr/sweep.hpp"
#include "urlr/synth.hpp"

#ifndef URLR_VERSION
#define URLR_VERSION "0.0.0"
#endif

namespace {

using namespace urlr;

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config;
  std::vector<fs::path> inputs;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const fs::path& path) const {
    Json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    Json digests = Json::object();
    for (const auto& in : inputs) digests[in.string()] = sha256_file(in);
    j["inputs"] = digests;
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["tool_version"] = std::string("urlr ") + URLR_VERSION;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    j["wall_clock_seconds"] = seconds;
    write_json(path, j);
  }
};

std::vector<std::string> g_argv;

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string labels;
  std::string graph;
  std::string features;
  std::string config;
  std::string method;
  double prune = 20.0;
  double mu = kDefaultMu;
  std::size_t pca_dim = 0;
  std::string out;
  std::string truth;
};

std::size_t max_node_id(const std::vector<AnnotationRecord>& records) {
  NodeId m = -1;
  for (const auto& r : records) m = std::max({m, r.preferred, r.other});
  return static_cast<std::size_t>(m + 1);
}

int cmd_fit(const FitArgs& a, const CLI::App& sub) {
  Manifest manifest{"fit", g_argv, {}, {}, {}};
  PipelineConfig cfg;
  if (!a.config.empty()) {
    cfg = pipeline_config_from_json(read_json(a.config));
    manifest.inputs.push_back(a.config);
  }
  if (sub.count("--method")) cfg.method = parse_method(a.method);
  if (sub.count("--prune")) cfg.prune_percent = a.prune;
  if (sub.count("--mu")) cfg.mu = a.mu;
  if (sub.count("--pca-dim")) cfg.pca_dim = a.pca_dim;

  std::vector<std::string> warnings;
  const bool prune_ignored = cfg.method == Method::raw || cfg.method == Method::majority_vote;
  if (prune_ignored && (sub.count("--prune") || (!a.config.empty() && read_json(a.config).contains("prune_percent")))) {
    warnings.push_back("the pruning rate is ignored by method " + std::string(to_string(cfg.method)));
    warn(warnings.back());
  }

  const FeatureMatrix phi = read_features(a.features);
  manifest.inputs.push_back(a.features);
  const std::size_t n = static_cast<std::size_t>(phi.rows());
  ComparisonGraph g;
  if (!a.labels.empty()) {
    const auto records = read_labels(a.labels);
    manifest.inputs.push_back(a.labels);
    if (max_node_id(records) > n) {
      for (std::size_t k = 0; k < records.size(); ++k) {
        const NodeId bad = records[k].preferred >= NodeId(n) ? records[k].preferred : records[k].other;
        if (bad >= NodeId(n)) {
          throw ValidationError(a.labels + ": node " + std::to_string(bad) + " (record " +
                                std::to_string(k + 1) + ") has no row in " + a.features +
                                ", which covers ids 0.." + std::to_string(n - 1));
        }
      }
    }
    g = build_graph(records, n);
  } else {
    g = read_graph_csv(a.graph, n);
    manifest.inputs.push_back(a.graph);
  }

  const FitResult result = fit(g, phi, cfg);
  const fs::path out(a.out);
  fs::create_directories(out);
  write_model(out / "model.txt", *result.model);
  write_pruned_csv(out / "pruned.csv", g, result.pruned);
  if (result.outlier_order.size() == g.n_edges()) write_path_csv(out / "path.csv", g, result.outlier_order);
  if (result.global_scores) write_scores(out / "global_scores.csv", result.global_scores->theta);

  Json j;
  j["method"] = std::string(to_string(result.method));
  j["config"] = to_json(cfg);
  j["model_file"] = "model.txt";
  Json pruned = Json::array();
  std::size_t n_pruned = 0;
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    if (result.pruned[k]) continue;
    ++n_pruned;
    const Edge& e = g.edge(k);
    pruned.push_back({{"edge_index", k}, {"src", e.src}, {"dst", e.dst}, {"weight", e.weight}});
  }
  j["pruned_edges"] = pruned;
  j["diagnostics"] = to_json(result.diagnostics);
  Json metrics;
  metrics["n_nodes"] = g.n_nodes();
  metrics["n_edges"] = g.n_edges();
  metrics["n_pruned"] = n_pruned;
  if (!a.truth.empty()) {
    const EdgeMask truth = read_truth_outliers(a.truth);
    manifest.inputs.push_back(a.truth);
    if (result.outlier_order.size() == truth.size()) {
      metrics["auc"] = outlier_roc(result.outlier_order, truth).auc;
    } else {
      warn("method " + std::string(to_string(result.method)) + " has no outlier order; AUC skipped");
    }
  }
  j["metrics"] = metrics;
  j["warnings"] = warnings;
  write_json(out / "result.json", j);

  manifest.config = to_json(cfg);
  manifest.write(out / "manifest.json");
  std::cout << "fit " << to_string(result.method) << ": " << g.n_edges() << " edges, " << n_pruned
            << " pruned, output in " << out.string() << '\n';
  return 0;
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string features;
  std::string out;
};

int cmd_predict(const PredictArgs& a) {
  const RankModel model = read_model(a.model);
  const FeatureMatrix phi = read_features(a.features);
  const Eigen::VectorXd scores = predict(model, phi);
  if (a.out.empty() || a.out == "-") {
    std::cout << "id,score\n";
    for (Eigen::Index i = 0; i < scores.size(); ++i) std::cout << i << ',' << format_real(scores(i), 17) << '\n';
  } else {
    write_scores(a.out, scores);
    Manifest manifest{"predict", g_argv, {}, {a.model, a.features}, {}};
    manifest.write(fs::path(a.out).replace_extension(".manifest.json"));
  }
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string scores;
  std::string truth_order;
  std::string pairs;
  std::string path;
  std::string truth_outliers;
  std::string out;
  std::string json;
  std::string method = "unknown";
  std::uint64_t seed = 0;
  double p = 0.0;
  double error_rate = 0.0;
  double onr = 0.0;
};

int cmd_eval(const EvalArgs& a) {
  if (a.scores.empty() != a.truth_order.empty()) {
    throw ValidationError("--scores and --truth-order must be given together");
  }
  if (a.path.empty() != a.truth_outliers.empty()) {
    throw ValidationError("--path and --truth-outliers must be given together");
  }
  if (a.scores.empty() && a.path.empty()) {
    throw ValidationError("nothing to evaluate: give --scores/--truth-order and/or --path/--truth-outliers");
  }
  Manifest manifest{"eval", g_argv, {}, {}, a.seed};
  Json report;
  TrialRow row;
  row.method = Method::urlr;
  row.seed = a.seed;
  row.p = a.p;
  row.error_rate = a.error_rate;
  row.onr = a.onr;
  if (!a.scores.empty()) {
    const Eigen::VectorXd pred = read_scores(a.scores);
    const Eigen::VectorXd truth = read_scores(a.truth_order);
    manifest.inputs.insert(manifest.inputs.end(), {a.scores, a.truth_order});
    if (pred.size() != truth.size()) {
      throw ValidationError(a.scores + " covers " + std::to_string(pred.size()) + " items but " +
                            a.truth_order + " covers " + std::to_string(truth.size()));
    }
    KendallResult k;
    if (!a.pairs.empty()) {
      k = kendall_on_pairs(pred, truth, read_pairs(a.pairs));
      manifest.inputs.push_back(a.pairs);
    } else {
      k = kendall(pred, truth);
    }
    row.kendall_distance = k.distance;
    row.kendall_correlation = k.correlation;
    report["kendall_distance"] = k.distance;
    report["kendall_correlation"] = k.correlation;
    report["n_pairs_evaluated"] = k.n_pairs;
  }
  if (!a.path.empty()) {
    const OutlierPath order = read_path_csv(a.path);
    const EdgeMask truth = read_truth_outliers(a.truth_outliers);
    manifest.inputs.insert(manifest.inputs.end(), {a.path, a.truth_outliers});
    const RocCurve roc = outlier_roc(order, truth);
    row.auc = roc.auc;
    report["auc"] = roc.auc;
    Json points = Json::array();
    for (const auto& pt : roc.points) {
      points.push_back({{"threshold_rank", pt.threshold_rank}, {"tpr", pt.tpr}, {"fpr", pt.fpr}});
    }
    report["tpr_fpr"] = points;
  }

  std::ostringstream csv;
  csv << kMetricsHeader << '\n'
      << a.method << ',' << a.seed << ',' << format_real(a.p) << ',' << format_real(a.error_rate) << ','
      << format_real(a.onr) << ',' << (a.scores.empty() ? "" : format_real(row.kendall_distance)) << ','
      << (row.auc ? format_real(*row.auc) : "") << '\n';
  if (a.out.empty() || a.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(a.out);
    if (!f) throw ValidationError("cannot write " + a.out);
    f << csv.str();
    const fs::path json = a.json.empty() ? fs::path(a.out).replace_extension(".json") : fs::path(a.json);
    write_json(json, report);
    manifest.write(fs::path(a.out).replace_extension(".manifest.json"));
  }
  return 0;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string spec;
  std::string axis;
  std::string methods;
  std::string values;
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  std::string out;
  std::string metrics;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_sweep(const SweepArgs& a, const CLI::App& sub) {
  SweepSpec spec = sweep_spec_from_json(read_json(a.spec));
  if (sub.count("--axis")) spec.axis = parse_axis(a.axis);
  if (sub.count("--methods")) {
    spec.methods.clear();
    for (const auto& m : split_list(a.methods)) spec.methods.push_back(parse_method(m));
  }
  if (sub.count("--values")) {
    spec.values.clear();
    for (const auto& v : split_list(a.values)) {
      try {
        std::size_t used = 0;
        spec.values.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::logic_error&) {
        throw ValidationError("invalid axis value '" + v + "'");
      }
    }
  }
  if (sub.count("--seeds")) spec.n_seeds = a.seeds;
  if (sub.count("--base-seed")) spec.base_seed = a.base_seed;
  if (sub.count("--jobs")) spec.jobs = a.jobs;

  const SweepResult result = run_sweep(spec);
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.ok() ? 0 : 1;
  if (a.out.empty() || a.out == "-") {
    write_curves_csv(std::cout, spec, result);
  } else {
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream f(out);
    if (!f) throw ValidationError("cannot write " + a.out);
    write_curves_csv(f, spec, result);
    Manifest manifest{"sweep", g_argv, to_json(spec), {a.spec}, spec.base_seed};
    manifest.write(fs::path(a.out).replace_extension(".manifest.json"));
  }
  if (!a.metrics.empty()) {
    std::ofstream f(a.metrics);
    if (!f) throw ValidationError("cannot write " + a.metrics);
    write_metrics_csv(f, result.rows);
  }
  if (failed > 0) warn(std::to_string(failed) + " of " + std::to_string(result.rows.size()) + " trials failed");
  return 0;
}

// ---- synth / fixtures ------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a, const CLI::App& sub) {
  SyntheticSpec spec;
  Manifest manifest{"synth", g_argv, {}, {}, {}};
  if (!a.config.empty()) {
    spec = synthetic_spec_from_json(read_json(a.config));
    manifest.inputs.push_back(a.config);
  }
  if (sub.count("--seed")) spec.seed = a.seed;
  const SyntheticDataset data = generate(spec);
  export_dataset(a.out, data);
  manifest.config = to_json(spec);
  manifest.seed = spec.seed;
  manifest.write(fs::path(a.out) / "manifest.json");
  std::size_t outliers = 0;
  for (auto t : data.truth_outliers) outliers += t;
  std::cout << "synth: " << data.graph.n_nodes() << " nodes, " << data.graph.n_edges() << " edges, "
            << outliers << " marked outliers, output in " << a.out << '\n';
  return 0;
}

struct FixtureArgs {
  std::string variant = "all";
  std::string out;
};

int cmd_fixtures(const FixtureArgs& a) {
  const std::string variants = a.variant == "all" ? "abc" : a.variant;
  if (variants != "abc" && (variants.size() != 1 || variants.find_first_not_of("abc") != std::string::npos)) {
    throw ValidationError("unknown fixture variant '" + a.variant + "' (expected a, b, c or all)");
  }
  for (char v : variants) {
    const fs::path dir = fs::path(a.out) / (std::string("fixture_") + v);
    export_dataset(dir, condorcet_fixture(v));
    std::cout << "fixture " << v << " written to " << dir.string() << '\n';
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Robust learning to rank from noisy pairwise comparisons"};
  app.set_version_flag("--version", std::string("urlr ") + URLR_VERSION);
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Detect outlier comparisons and fit a linear ranking model");
  auto* in_group = fit_cmd->add_option_group("input");
  in_group->add_option("--labels", fit_args.labels, "Label CSV: preferred,other[,annotator]")->check(CLI::ExistingFile);
  in_group->add_option("--graph", fit_args.graph, "Aggregated graph CSV: src,dst,weight")->check(CLI::ExistingFile);
  in_group->require_option(1);
  fit_cmd->add_option("--features", fit_args.features, "Feature CSV: id,f0,f1,...")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--config", fit_args.config, "Pipeline JSON; flags override it")->check(CLI::ExistingFile);
  fit_cmd->add_option("--method", fit_args.method, "urlr, raw, majority_vote or huber_lasso_fl");
  fit_cmd->add_option("--prune", fit_args.prune, "Pruning rate in percent, [0, 100)");
  fit_cmd->add_option("--mu", fit_args.mu, "Ridge parameter");
  fit_cmd->add_option("--pca-dim", fit_args.pca_dim, "Reduce features to this many principal components");
  fit_cmd->add_option("--truth-outliers", fit_args.truth, "truth CSV; adds outlier AUC to the result")
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit_args.out, "Output directory")->required();

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Score items with a fitted model");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--features", predict_args.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict_args.out, "Scores CSV (default: stdout)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Kendall tau and outlier ROC/AUC");
  eval_cmd->add_option("--scores", eval_args.scores, "Predicted scores CSV: id,score")->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth-order", eval_args.truth_order, "Ground-truth scores CSV: id,score")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--pairs", eval_args.pairs, "Restrict Kendall to these pairs: a,b")->check(CLI::ExistingFile);
  eval_cmd->add_option("--path", eval_args.path, "Outlier path dump from fit")->check(CLI::ExistingFile);
  eval_cmd->add_option("--truth-outliers", eval_args.truth_outliers, "truth CSV: edge_index,is_outlier")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_args.out, "Metrics CSV (default: stdout)");
  eval_cmd->add_option("--json", eval_args.json, "Full report JSON (default: next to --out)");
  eval_cmd->add_option("--method", eval_args.method, "Method label for the metrics row");
  eval_cmd->add_option("--seed", eval_args.seed, "Seed label for the metrics row");
  eval_cmd->add_option("--p", eval_args.p, "Pruning-rate label for the metrics row");
  eval_cmd->add_option("--error-rate", eval_args.error_rate, "Error-rate label for the metrics row");
  eval_cmd->add_option("--onr", eval_args.onr, "ONR label for the metrics row");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Multi-seed synthetic experiment along one axis");
  sweep_cmd->add_option("config", sweep_args.spec, "Sweep JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--axis", sweep_args.axis, "prune, error_rate, onr or density");
  sweep_cmd->add_option("--methods", sweep_args.methods, "Comma-separated methods");
  sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated axis values");
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Number of seeds");
  sweep_cmd->add_option("--base-seed", sweep_args.base_seed, "First seed");
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "Concurrent trials");
  sweep_cmd->add_option("--out", sweep_args.out, "Curves CSV (default: stdout)");
  sweep_cmd->add_option("--metrics", sweep_args.metrics, "Also write per-trial metrics CSV");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", synth_args.config, "Synthetic data JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", synth_args.seed, "Seed (overrides the config)");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();

  FixtureArgs fixture_args;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write the five-item voting fixtures");
  fixtures_cmd->add_option("--variant", fixture_args.variant, "a, b, c or all");
  fixtures_cmd->add_option("--out", fixture_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*fit_cmd) return cmd_fit(fit_args, *fit_cmd);
  if (*predict_cmd) return cmd_predict(predict_args);
  if (*eval_cmd) return cmd_eval(eval_args);
  if (*sweep_cmd) return cmd_sweep(sweep_args, *sweep_cmd);
  if (*synth_cmd) return cmd_synth(synth_args, *synth_cmd);
  if (*fixtures_cmd) return cmd_fixtures(fixture_args);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  try {
    return run(argc, argv);
  } catch (const urlr::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const urlr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  }
}
