// Copyright 2026 The dpreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment CLI: preprocess, tune, release, fit, predict, experiment.
//
// Configuration precedence is flags > config file > defaults. A config file
// given with --config holds the same keys the artifacts embed under
// "config", so any artifact can be reproduced by feeding its embedded
// config back in. All randomness flows from --seed through named stream
// derivation, which makes every artifact byte-reproducible; wall-clock
// timestamps go to a sidecar .log file only.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpreg/dataset.hpp"
#include "dpreg/evaluation.hpp"
#include "dpreg/mechanism.hpp"
#include "dpreg/projection.hpp"
#include "dpreg/regression.hpp"
#include "dpreg/rng.hpp"
#include "dpreg/stats.hpp"
#include "dpreg/table.hpp"
#include "dpreg/tuning.hpp"
#include "dpreg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Timestamps live only here, never in the artifacts themselves.
void write_sidecar_log(const fs::path& artifact, const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  std::ofstream log(artifact.string() + ".log", std::ios::app);
  log << stamp << " " << command << " -> " << artifact.string() << "\n";
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

dpreg::PrivacyBudget parse_split(const std::string& text, double epsilon) {
  const auto parts = parse_csv_doubles(text);
  if (parts.size() != 3) {
    throw std::invalid_argument("--split expects p1,p2,p3");
  }
  return dpreg::PrivacyBudget(epsilon, parts[0], parts[1], parts[2]);
}

// Expands --config FILE into option tokens placed before the user's own
// flags; with TakeLast options the command line wins.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::ptrdiff_t config_at = -1;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_at = static_cast<std::ptrdiff_t>(i);
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_at = static_cast<std::ptrdiff_t>(i);
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_at < 0) return args;

  if (args[static_cast<std::size_t>(config_at)] == "--config") {
    args.erase(args.begin() + config_at, args.begin() + config_at + 2);
  } else {
    args.erase(args.begin() + config_at);
  }

  const json cfg = json::parse(read_text(config_path));
  if (!cfg.is_object()) {
    throw std::runtime_error("--config must hold a JSON object");
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "mode") continue;  // positional, supplied on the command line
    injected.push_back("--" + key);
    if (value.is_string()) {
      injected.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ",";
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      injected.push_back(joined);
    } else if (value.is_boolean()) {
      injected.push_back(value.get<bool>() ? "true" : "false");
    } else {
      injected.push_back(value.dump());
    }
  }
  // Insert after the leading subcommand/positional tokens.
  std::size_t at = 0;
  while (at < args.size() && !args[at].empty() && args[at][0] != '-') ++at;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(at),
              injected.begin(), injected.end());
  return args;
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessArgs {
  std::string expression;
  std::string responses;
  std::string gene_order;
  std::size_t genes = 0;  // 0 = keep every listed gene
  std::string delimiter = ",";
  bool normalise = false;
  std::string out;
};

ordered_json preprocess_config(const PreprocessArgs& a) {
  ordered_json c;
  c["expression"] = a.expression;
  c["responses"] = a.responses;
  c["gene-order"] = a.gene_order;
  c["genes"] = a.genes;
  c["delimiter"] = a.delimiter;
  c["normalise"] = a.normalise;
  c["out"] = a.out;
  return c;
}

int run_preprocess(const PreprocessArgs& a) {
  if (a.delimiter.size() != 1) {
    throw std::invalid_argument("--delimiter must be a single character");
  }
  const char delim = a.delimiter[0];
  dpreg::RawTable expr = dpreg::load_table(a.expression, delim);
  if (!a.gene_order.empty()) {
    const auto order = dpreg::load_gene_order(a.gene_order);
    const std::size_t k = a.genes == 0 ? order.size() : a.genes;
    expr = dpreg::select_genes(expr, order, k);
  }
  const auto responses = dpreg::load_responses(a.responses, delim);

  const fs::path outdir(a.out);
  fs::create_directories(outdir);
  ordered_json drugs = ordered_json::array();
  for (const auto& [drug, records] : responses) {
    (void)records;
    auto ds = dpreg::make_drug_dataset(expr, responses, drug);
    if (a.normalise) {
      ds.data.inputs = dpreg::preprocess_features(ds.data.inputs);
      ds.data.targets = dpreg::center_targets(ds.data.targets);
    }
    const fs::path file = outdir / (drug + ".csv");
    dpreg::save_dataset_csv(ds.data, file, &ds.cell_lines);
    std::cout << drug << ": n=" << ds.data.size() << " (dropped "
              << ds.dropped_missing << " missing responses)\n";
    ordered_json entry;
    entry["drug"] = drug;
    entry["n"] = ds.data.size();
    entry["dropped_missing"] = ds.dropped_missing;
    entry["file"] = file.filename().string();
    drugs.push_back(entry);
  }

  ordered_json summary;
  summary["command"] = "preprocess";
  summary["version"] = dpreg::kVersion;
  summary["config"] = preprocess_config(a);
  summary["drugs"] = drugs;
  const fs::path summary_path = outdir / "summary.json";
  write_text(summary_path, summary.dump(2) + "\n");
  write_sidecar_log(summary_path, "preprocess");
  return 0;
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
  std::size_t n_aux = 500;
  int dims = 10;
  double epsilon = 2.0;
  std::size_t split_datasets = 5;
  std::size_t split_noise = 5;
  std::size_t inner_datasets = 5;
  std::size_t inner_noise = 5;
  std::size_t inner_stride = 1;
  std::size_t final_datasets = 20;
  std::size_t final_noise = 20;
  bool fixed_fit = false;
  std::size_t gibbs_m = 5000;
  std::size_t gibbs_burnin = 1000;
  std::uint64_t seed = 0;
  std::string format = "both";  // json | csv | both
  std::string out;
};

void check_format(const std::string& format) {
  if (format != "json" && format != "csv" && format != "both") {
    throw std::invalid_argument("--format must be json, csv or both");
  }
}

ordered_json tune_config(const TuneArgs& a) {
  ordered_json c;
  c["n-aux"] = a.n_aux;
  c["dims"] = a.dims;
  c["epsilon"] = a.epsilon;
  c["split-datasets"] = a.split_datasets;
  c["split-noise"] = a.split_noise;
  c["inner-datasets"] = a.inner_datasets;
  c["inner-noise"] = a.inner_noise;
  c["inner-stride"] = a.inner_stride;
  c["final-datasets"] = a.final_datasets;
  c["final-noise"] = a.final_noise;
  c["fixed-fit"] = a.fixed_fit;
  c["gibbs-m"] = a.gibbs_m;
  c["gibbs-burnin"] = a.gibbs_burnin;
  c["seed"] = a.seed;
  c["format"] = a.format;
  c["out"] = a.out;
  return c;
}

int run_tune(const TuneArgs& a) {
  check_format(a.format);
  dpreg::TuningConfig cfg;
  cfg.n_aux = a.n_aux;
  cfg.d = a.dims;
  cfg.epsilon = a.epsilon;
  cfg.n_datasets = a.split_datasets;
  cfg.n_noise = a.split_noise;

  dpreg::SplitSearchOptions split_opts;
  split_opts.inner_datasets = a.inner_datasets;
  split_opts.inner_noise = a.inner_noise;
  split_opts.inner_stride = a.inner_stride;
  split_opts.gibbs_scoring = !a.fixed_fit;
  split_opts.gibbs.m = a.gibbs_m;
  split_opts.gibbs.burn_in = a.gibbs_burnin;
  const dpreg::SplitSearchResult split_result =
      dpreg::tune_budget_split(cfg, a.seed, split_opts);

  dpreg::TuningConfig final_cfg = cfg;
  final_cfg.n_datasets = a.final_datasets;
  final_cfg.n_noise = a.final_noise;
  const dpreg::ThresholdSearchResult threshold_result =
      dpreg::tune_thresholds(final_cfg, split_result.best, a.seed);

  ordered_json report;
  report["command"] = "tune";
  report["version"] = dpreg::kVersion;
  report["config"] = tune_config(a);
  ordered_json split_block;
  split_block["chosen"] = split_result.best;
  split_block["scores"] = ordered_json::array();
  for (const auto& s : split_result.scores) {
    ordered_json entry;
    entry["split"] = s.split;
    entry["thresholds"] = {s.thresholds.omega_x, s.thresholds.omega_y};
    entry["score"] = s.score;
    split_block["scores"].push_back(entry);
  }
  report["split_search"] = split_block;
  ordered_json thr_block;
  thr_block["chosen"] = {threshold_result.best.omega_x,
                         threshold_result.best.omega_y};
  thr_block["grid"] = threshold_result.grid;
  thr_block["scores"] = ordered_json::array();
  for (Eigen::Index i = 0; i < threshold_result.scores.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < threshold_result.scores.cols(); ++j) {
      row.push_back(threshold_result.scores(i, j));
    }
    thr_block["scores"].push_back(row);
  }
  report["threshold_search"] = thr_block;

  if (a.format != "csv") {
    write_text(a.out, report.dump(2) + "\n");
  }
  if (a.format != "json") {
    // Tidy grids for external plotting.
    std::ostringstream splits_csv;
    splits_csv << "p1,p2,p3,omega_x,omega_y,score\n";
    for (const auto& s : split_result.scores) {
      splits_csv << format_double(s.split[0]) << ","
                 << format_double(s.split[1]) << ","
                 << format_double(s.split[2]) << ","
                 << format_double(s.thresholds.omega_x) << ","
                 << format_double(s.thresholds.omega_y) << ","
                 << format_double(s.score) << "\n";
    }
    write_text(a.out + ".splits.csv", splits_csv.str());
    std::ostringstream thr_csv;
    thr_csv << "omega_x,omega_y,score\n";
    for (Eigen::Index i = 0; i < threshold_result.scores.rows(); ++i) {
      for (Eigen::Index j = 0; j < threshold_result.scores.cols(); ++j) {
        thr_csv << format_double(threshold_result.grid[
                       static_cast<std::size_t>(i)])
                << ","
                << format_double(threshold_result.grid[
                       static_cast<std::size_t>(j)])
                << "," << format_double(threshold_result.scores(i, j)) << "\n";
      }
    }
    write_text(a.out + ".thresholds.csv", thr_csv.str());
  }
  write_sidecar_log(a.out, "tune");
  std::cout << "chosen split: " << split_result.best[0] << ","
            << split_result.best[1] << "," << split_result.best[2]
            << "  thresholds: " << threshold_result.best.omega_x << ","
            << threshold_result.best.omega_y << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// release

struct ReleaseArgs {
  std::string data;
  double epsilon = 2.0;
  std::string split = "0.35,0.60,0.05";
  std::string bounds;
  std::string multipliers;
  std::uint64_t seed = 0;
  std::string out;
};

ordered_json release_config(const ReleaseArgs& a) {
  ordered_json c;
  c["data"] = a.data;
  c["epsilon"] = a.epsilon;
  c["split"] = a.split;
  c["bounds"] = a.bounds;
  c["multipliers"] = a.multipliers;
  c["seed"] = a.seed;
  c["out"] = a.out;
  return c;
}

int run_release(const ReleaseArgs& a) {
  if (fs::exists(a.out)) {
    throw std::runtime_error(
        "release: output " + a.out +
        " already exists; refusing a second release against the same "
        "receipt path");
  }
  const dpreg::Dataset data = dpreg::load_dataset_csv(a.data);
  const dpreg::PrivacyBudget budget = parse_split(a.split, a.epsilon);

  std::optional<dpreg::Bounds> bounds;
  if (!a.bounds.empty()) {
    const auto parts = parse_csv_doubles(a.bounds);
    if (parts.size() != 2) {
      throw std::invalid_argument("--bounds expects bx,by");
    }
    bounds = dpreg::Bounds(parts[0], parts[1]);
  } else {
    const auto parts = parse_csv_doubles(
        a.multipliers.empty() ? std::string("1.0,1.0") : a.multipliers);
    if (parts.size() != 2) {
      throw std::invalid_argument("--multipliers expects wx,wy");
    }
    bounds = dpreg::thresholds_from_std(
        data, dpreg::ThresholdMultipliers(parts[0], parts[1]));
  }

  const dpreg::Dataset projected = dpreg::project_dataset(data, *bounds);
  const dpreg::SufficientStats clean = dpreg::sufficient_stats(projected);
  dpreg::RngStream rng = dpreg::derive_rng(a.seed, "release");
  const dpreg::SufficientStats noisy =
      dpreg::perturb_stats(clean, *bounds, budget, rng);

  ordered_json artifact;
  artifact["command"] = "release";
  artifact["version"] = dpreg::kVersion;
  artifact["config"] = release_config(a);
  artifact["stats"] = json::parse(dpreg::stats_to_json(noisy));
  artifact["receipt"] = json::parse(dpreg::release_receipt_json(
      budget, *bounds, noisy.dim(), noisy.n, a.seed));
  write_text(a.out, artifact.dump(2) + "\n");
  write_sidecar_log(a.out, "release");
  return 0;
}

// ---------------------------------------------------------------------------
// fit / predict

struct FitArgs {
  std::string stats;
  std::string method = "fixed";
  double lambda = 1.0;
  double lambda0 = 1.0;
  double a = 2.0, b = 2.0, a0 = 2.0, b0 = 2.0;
  std::size_t m = 5000;
  std::size_t burnin = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string samples_out;
};

ordered_json fit_config(const FitArgs& a) {
  ordered_json c;
  c["stats"] = a.stats;
  c["method"] = a.method;
  c["lambda"] = a.lambda;
  c["lambda0"] = a.lambda0;
  c["a"] = a.a;
  c["b"] = a.b;
  c["a0"] = a.a0;
  c["b0"] = a.b0;
  c["m"] = a.m;
  c["burnin"] = a.burnin;
  c["seed"] = a.seed;
  c["out"] = a.out;
  c["samples-out"] = a.samples_out;
  return c;
}

dpreg::SufficientStats load_stats_file(const std::string& path) {
  const json j = json::parse(read_text(path));
  // Accept both a bare statistics object and a release envelope.
  const json& stats = j.contains("stats") ? j.at("stats") : j;
  return dpreg::stats_from_json(stats.dump());
}

int run_fit(const FitArgs& a) {
  const dpreg::SufficientStats stats = load_stats_file(a.stats);
  ordered_json artifact;
  artifact["command"] = "fit";
  artifact["version"] = dpreg::kVersion;
  artifact["config"] = fit_config(a);
  if (a.method == "fixed") {
    const dpreg::GaussianPosterior post = dpreg::posterior_fixed(
        stats, dpreg::FixedPrecisionPrior{a.lambda, a.lambda0, {}});
    artifact["posterior"] = json::parse(dpreg::posterior_to_json(post));
  } else if (a.method == "gibbs") {
    dpreg::RngStream rng = dpreg::derive_rng(a.seed, "fit.gibbs");
    const dpreg::PosteriorSamples samples = dpreg::gibbs_posterior(
        stats, dpreg::GammaHyperPrior{a.a, a.b, a.a0, a.b0},
        dpreg::GibbsConfig{a.m, a.burnin}, rng);
    const std::string samples_path =
        a.samples_out.empty() ? a.out + ".samples.csv" : a.samples_out;
    write_text(samples_path, dpreg::samples_to_csv(samples));
    // Point summary for prediction: the plug-in mean of the draws.
    dpreg::GaussianPosterior post;
    post.mean = samples.betas.colwise().mean().transpose();
    post.precision = Eigen::MatrixXd::Identity(stats.dim(), stats.dim());
    post.repaired = false;
    artifact["posterior"] = json::parse(dpreg::posterior_to_json(post));
    artifact["samples_file"] = samples_path;
  } else {
    throw std::invalid_argument("--method must be fixed or gibbs");
  }
  write_text(a.out, artifact.dump(2) + "\n");
  write_sidecar_log(a.out, "fit");
  return 0;
}

struct PredictArgs {
  std::string posterior;
  std::string data;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  const json j = json::parse(read_text(a.posterior));
  const json& p = j.contains("posterior") ? j.at("posterior") : j;
  const dpreg::GaussianPosterior post = dpreg::posterior_from_json(p.dump());
  const dpreg::Dataset data = dpreg::load_dataset_csv(a.data);
  const Eigen::VectorXd predictions = dpreg::predict_points(data.inputs, post);
  std::ostringstream csv;
  csv << "id,prediction\n";
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    csv << "r" << i + 1 << "," << format_double(predictions(i)) << "\n";
  }
  write_text(a.out, csv.str());
  ordered_json meta;
  meta["command"] = "predict";
  meta["version"] = dpreg::kVersion;
  ordered_json c;
  c["posterior"] = a.posterior;
  c["data"] = a.data;
  c["out"] = a.out;
  meta["config"] = c;
  write_text(a.out + ".meta.json", meta.dump(2) + "\n");
  write_sidecar_log(a.out, "predict");
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  std::string mode;
  double epsilon = 2.0;
  std::string split = "0.35,0.60,0.05";
  std::string multipliers = "1.0,1.0";
  std::string bounds;
  std::uint64_t seed = 0;
  std::string format = "both";
  std::string out;
  int dims = 10;
  std::size_t n_private = 800;
  std::size_t n_nonprivate = 10;
  std::size_t n_test = 100;
  std::size_t repeats = 50;
  std::string variants =
      "nonprivate_lr,nonprivate_lr_pooled,robust_private_lr,private_lr_noproj";
  bool gibbs_fit = false;
  std::size_t gibbs_m = 5000;
  std::size_t gibbs_burnin = 1000;
  std::string data;
  bool preprocess = true;
  std::string mechanism = "gaussian_mean_suffstat";
  std::string n_grid = "1000,10000,100000,1000000";
  std::size_t seeds_per_n = 200;
  double l1_bound = 1.0;
  double data_mean = 1.0;
  std::string dims_axis;
  std::string n_private_axis;
  std::string n_nonprivate_axis;
  std::string epsilon_axis;
};

ordered_json experiment_config(const ExperimentArgs& a) {
  ordered_json c;
  c["mode"] = a.mode;
  c["epsilon"] = a.epsilon;
  c["split"] = a.split;
  c["multipliers"] = a.multipliers;
  c["bounds"] = a.bounds;
  c["seed"] = a.seed;
  c["format"] = a.format;
  c["out"] = a.out;
  c["dims"] = a.dims;
  c["n-private"] = a.n_private;
  c["n-nonprivate"] = a.n_nonprivate;
  c["n-test"] = a.n_test;
  c["repeats"] = a.repeats;
  c["variants"] = a.variants;
  c["gibbs-fit"] = a.gibbs_fit;
  c["gibbs-m"] = a.gibbs_m;
  c["gibbs-burnin"] = a.gibbs_burnin;
  c["data"] = a.data;
  c["preprocess"] = a.preprocess;
  c["mechanism"] = a.mechanism;
  c["n-grid"] = a.n_grid;
  c["seeds-per-n"] = a.seeds_per_n;
  c["l1-bound"] = a.l1_bound;
  c["data-mean"] = a.data_mean;
  c["dims-axis"] = a.dims_axis;
  c["n-private-axis"] = a.n_private_axis;
  c["n-nonprivate-axis"] = a.n_nonprivate_axis;
  c["epsilon-axis"] = a.epsilon_axis;
  return c;
}

dpreg::PipelineConfig pipeline_from_args(const ExperimentArgs& a) {
  dpreg::PipelineConfig pipeline;
  pipeline.budget = parse_split(a.split, a.epsilon);
  const auto w = parse_csv_doubles(a.multipliers);
  if (w.size() != 2) {
    throw std::invalid_argument("--multipliers expects wx,wy");
  }
  pipeline.multipliers = dpreg::ThresholdMultipliers(w[0], w[1]);
  if (!a.bounds.empty()) {
    const auto b = parse_csv_doubles(a.bounds);
    if (b.size() != 2) throw std::invalid_argument("--bounds expects bx,by");
    pipeline.fixed_bounds = dpreg::Bounds(b[0], b[1]);
  }
  pipeline.gibbs_fit = a.gibbs_fit;
  pipeline.gibbs.m = a.gibbs_m;
  pipeline.gibbs.burn_in = a.gibbs_burnin;
  return pipeline;
}

std::vector<dpreg::VariantConfig> variants_from_args(const ExperimentArgs& a) {
  std::vector<dpreg::VariantConfig> out;
  for (const auto& name : split_commas(a.variants)) {
    if (name == "nonprivate_lr_pooled") {
      out.push_back({dpreg::MethodVariant::nonprivate_lr, true});
    } else {
      out.push_back({dpreg::variant_from_name(name), false});
    }
  }
  return out;
}

ordered_json result_to_json(const dpreg::ExperimentResult& result) {
  ordered_json variants = ordered_json::array();
  for (const auto& v : result.variants) {
    ordered_json entry;
    entry["variant"] = v.label;
    entry["mean"] = v.mean;
    if (v.stddev) {
      entry["stddev"] = *v.stddev;
    } else {
      entry["stddev"] = nullptr;
    }
    entry["rhos"] = v.rhos;
    variants.push_back(entry);
  }
  ordered_json j;
  j["repeats"] = result.repeats;
  j["variants"] = variants;
  return j;
}

int run_experiment_curves(const ExperimentArgs& a) {
  check_format(a.format);
  dpreg::CvConfig cfg;
  cfg.repeats = a.repeats;
  cfg.variants = variants_from_args(a);
  cfg.pipeline = pipeline_from_args(a);
  cfg.root_seed = a.seed;

  dpreg::DataSource source = [&]() -> dpreg::DataSource {
    if (!a.data.empty()) {
      dpreg::DatasetSource src;
      src.data = dpreg::load_dataset_csv(a.data);
      src.n_test = a.n_test;
      src.n_nonprivate = a.n_nonprivate;
      src.n_private = a.n_private;
      src.preprocess = a.preprocess;
      return src;
    }
    dpreg::SyntheticSource src;
    src.d = a.dims;
    src.n_private = a.n_private;
    src.n_nonprivate = a.n_nonprivate;
    src.n_test = a.n_test;
    return src;
  }();

  const dpreg::ExperimentResult result = dpreg::monte_carlo_cv(source, cfg);

  ordered_json artifact;
  artifact["command"] = "experiment";
  artifact["version"] = dpreg::kVersion;
  artifact["config"] = experiment_config(a);
  artifact["result"] = result_to_json(result);
  if (a.format != "csv") {
    write_text(a.out + ".json", artifact.dump(2) + "\n");
  }
  if (a.format != "json") {
    std::ostringstream csv;
    csv << "variant,repeat,rho\n";
    for (const auto& v : result.variants) {
      for (std::size_t r = 0; r < v.rhos.size(); ++r) {
        csv << v.label << "," << r << "," << format_double(v.rhos[r]) << "\n";
      }
    }
    write_text(a.out + ".csv", csv.str());
  }
  write_sidecar_log(a.out, "experiment curves");
  return 0;
}

int run_experiment_convergence(const ExperimentArgs& a) {
  check_format(a.format);
  dpreg::ConvergenceConfig cfg;
  cfg.mechanism = dpreg::convergence_mechanism_from_name(a.mechanism);
  cfg.n_grid.clear();
  for (double v : parse_csv_doubles(a.n_grid)) {
    cfg.n_grid.push_back(static_cast<std::size_t>(v));
  }
  cfg.seeds_per_n = a.seeds_per_n;
  cfg.d = a.dims;
  cfg.epsilon = a.epsilon;
  cfg.l1_bound = a.l1_bound;
  cfg.data_mean = a.data_mean;
  if (!a.bounds.empty()) {
    const auto b = parse_csv_doubles(a.bounds);
    if (b.size() != 2) throw std::invalid_argument("--bounds expects bx,by");
    cfg.lr_bounds = dpreg::Bounds(b[0], b[1]);
  }
  cfg.lr_budget = parse_split(a.split, a.epsilon);
  cfg.root_seed = a.seed;

  const dpreg::ConvergenceResult result = dpreg::convergence_experiment(cfg);

  ordered_json artifact;
  artifact["command"] = "experiment";
  artifact["version"] = dpreg::kVersion;
  artifact["config"] = experiment_config(a);
  ordered_json rows = ordered_json::array();
  for (const auto& row : result.rows) {
    ordered_json r;
    r["n"] = row.n;
    r["q05"] = row.q05;
    r["q25"] = row.q25;
    r["q50"] = row.q50;
    r["q75"] = row.q75;
    r["q95"] = row.q95;
    r["mean"] = row.mean;
    rows.push_back(r);
  }
  artifact["rows"] = rows;
  artifact["slope"] = result.slope;
  artifact["intercept"] = result.intercept;
  if (a.format != "csv") {
    write_text(a.out + ".json", artifact.dump(2) + "\n");
  }

  std::ostringstream csv;
  csv << "n,q05,q25,q50,q75,q95,mean,slope\n";
  for (const auto& row : result.rows) {
    csv << row.n << "," << format_double(row.q05) << ","
        << format_double(row.q25) << "," << format_double(row.q50) << ","
        << format_double(row.q75) << "," << format_double(row.q95) << ","
        << format_double(row.mean) << "," << format_double(result.slope)
        << "\n";
  }
  if (a.format != "json") {
    write_text(a.out + ".csv", csv.str());
  }
  write_sidecar_log(a.out, "experiment convergence");
  std::cout << "slope: " << result.slope << "\n";
  return 0;
}

int run_experiment_sweep(const ExperimentArgs& a) {
  check_format(a.format);
  dpreg::SweepAxes axes;
  if (!a.dims_axis.empty()) {
    axes.d.clear();
    for (double v : parse_csv_doubles(a.dims_axis)) {
      axes.d.push_back(static_cast<int>(v));
    }
  } else {
    axes.d = {a.dims};
  }
  if (!a.n_private_axis.empty()) {
    axes.n_private.clear();
    for (double v : parse_csv_doubles(a.n_private_axis)) {
      axes.n_private.push_back(static_cast<std::size_t>(v));
    }
  } else {
    axes.n_private = {a.n_private};
  }
  if (!a.n_nonprivate_axis.empty()) {
    axes.n_nonprivate.clear();
    for (double v : parse_csv_doubles(a.n_nonprivate_axis)) {
      axes.n_nonprivate.push_back(static_cast<std::size_t>(v));
    }
  } else {
    axes.n_nonprivate = {a.n_nonprivate};
  }
  if (!a.epsilon_axis.empty()) {
    axes.epsilon = parse_csv_doubles(a.epsilon_axis);
  } else {
    axes.epsilon = {a.epsilon};
  }

  dpreg::CvConfig base;
  base.repeats = a.repeats;
  base.variants = variants_from_args(a);
  base.pipeline = pipeline_from_args(a);
  base.root_seed = a.seed;
  dpreg::SyntheticSource proto;
  proto.n_test = a.n_test;

  const auto cells = dpreg::sweep(axes, base, proto);

  ordered_json artifact;
  artifact["command"] = "experiment";
  artifact["version"] = dpreg::kVersion;
  artifact["config"] = experiment_config(a);
  ordered_json cell_array = ordered_json::array();
  std::ostringstream csv;
  csv << "d,n_private,n_nonprivate,epsilon,variant,repeat,rho,improvement\n";
  for (const auto& cell : cells) {
    ordered_json c;
    c["d"] = cell.d;
    c["n_private"] = cell.n_private;
    c["n_nonprivate"] = cell.n_nonprivate;
    c["epsilon"] = cell.epsilon;
    c["result"] = result_to_json(cell.result);
    ordered_json improvement = ordered_json::array();
    for (const auto& [label, value] : cell.improvement) {
      ordered_json e;
      e["variant"] = label;
      e["mean_improvement"] = value;
      improvement.push_back(e);
    }
    c["improvement"] = improvement;
    cell_array.push_back(c);

    const dpreg::VariantSummary* baseline = nullptr;
    for (const auto& v : cell.result.variants) {
      if (v.label == "nonprivate_lr") {
        baseline = &v;
        break;
      }
    }
    for (const auto& v : cell.result.variants) {
      for (std::size_t r = 0; r < v.rhos.size(); ++r) {
        csv << cell.d << "," << cell.n_private << "," << cell.n_nonprivate
            << "," << format_double(cell.epsilon) << "," << v.label << ","
            << r << "," << format_double(v.rhos[r]) << ",";
        if (baseline != nullptr) {
          csv << format_double(v.rhos[r] - baseline->rhos[r]);
        }
        csv << "\n";
      }
    }
  }
  artifact["cells"] = cell_array;
  if (a.format != "csv") {
    write_text(a.out + ".json", artifact.dump(2) + "\n");
  }
  if (a.format != "json") {
    write_text(a.out + ".csv", csv.str());
  }
  write_sidecar_log(a.out, "experiment sweep");
  return 0;
}

template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& name, T& value,
                 const std::string& help) {
  return app->add_option(name, value, help)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust differentially private Bayesian linear regression"};
  app.set_version_flag("--version", dpreg::kVersion);
  app.require_subcommand(1);

  PreprocessArgs pre;
  CLI::App* pre_app = app.add_subcommand(
      "preprocess", "Clean expression/response tables into per-drug datasets");
  opt(pre_app, "--expression", pre.expression, "expression table file")
      ->required();
  opt(pre_app, "--responses", pre.responses, "long-format response file")
      ->required();
  opt(pre_app, "--gene-order", pre.gene_order, "gene order file");
  opt(pre_app, "--genes", pre.genes, "keep the first k genes of the order");
  opt(pre_app, "--delimiter", pre.delimiter, "cell delimiter");
  opt(pre_app, "--normalise", pre.normalise,
      "apply feature normalisation and target centering");
  opt(pre_app, "--out", pre.out, "output directory")->required();

  TuneArgs tune;
  CLI::App* tune_app = app.add_subcommand(
      "tune", "Select the budget split and projection thresholds");
  opt(tune_app, "--n-aux", tune.n_aux, "auxiliary sample count");
  opt(tune_app, "--dims", tune.dims, "data dimensionality");
  opt(tune_app, "--epsilon", tune.epsilon, "total privacy budget");
  opt(tune_app, "--split-datasets", tune.split_datasets,
      "auxiliary replicates for split scoring");
  opt(tune_app, "--split-noise", tune.split_noise,
      "noise replicates for split scoring");
  opt(tune_app, "--inner-datasets", tune.inner_datasets,
      "replicates for the per-split threshold search");
  opt(tune_app, "--inner-noise", tune.inner_noise,
      "noise replicates for the per-split threshold search");
  opt(tune_app, "--inner-stride", tune.inner_stride,
      "omega grid stride inside the split search");
  opt(tune_app, "--final-datasets", tune.final_datasets,
      "auxiliary replicates for the final threshold grid");
  opt(tune_app, "--final-noise", tune.final_noise,
      "noise replicates for the final threshold grid");
  opt(tune_app, "--fixed-fit", tune.fixed_fit,
      "score splits with the fixed-precision fit instead of Gibbs");
  opt(tune_app, "--gibbs-m", tune.gibbs_m, "kept Gibbs draws");
  opt(tune_app, "--gibbs-burnin", tune.gibbs_burnin, "discarded Gibbs sweeps");
  opt(tune_app, "--seed", tune.seed, "root seed");
  opt(tune_app, "--format", tune.format, "json | csv | both");
  opt(tune_app, "--out", tune.out, "report file")->required();

  ReleaseArgs release;
  CLI::App* release_app = app.add_subcommand(
      "release", "Project, compute and perturb sufficient statistics");
  opt(release_app, "--data", release.data, "dataset CSV")->required();
  opt(release_app, "--epsilon", release.epsilon, "total privacy budget");
  opt(release_app, "--split", release.split, "budget split p1,p2,p3");
  opt(release_app, "--bounds", release.bounds, "fixed bounds bx,by");
  opt(release_app, "--multipliers", release.multipliers,
      "threshold multipliers wx,wy (bounds from data dispersion)");
  opt(release_app, "--seed", release.seed, "root seed");
  opt(release_app, "--out", release.out, "release file")->required();

  FitArgs fit;
  CLI::App* fit_app =
      app.add_subcommand("fit", "Fit a posterior from released statistics");
  opt(fit_app, "--stats", fit.stats, "statistics or release file")->required();
  opt(fit_app, "--method", fit.method, "fixed | gibbs");
  opt(fit_app, "--lambda", fit.lambda, "noise precision (fixed fit)");
  opt(fit_app, "--lambda0", fit.lambda0, "weight prior precision (fixed fit)");
  opt(fit_app, "--a", fit.a, "Gamma prior shape for lambda");
  opt(fit_app, "--b", fit.b, "Gamma prior rate for lambda");
  opt(fit_app, "--a0", fit.a0, "Gamma prior shape for lambda0");
  opt(fit_app, "--b0", fit.b0, "Gamma prior rate for lambda0");
  opt(fit_app, "--m", fit.m, "kept Gibbs draws");
  opt(fit_app, "--burnin", fit.burnin, "discarded Gibbs sweeps");
  opt(fit_app, "--seed", fit.seed, "root seed");
  opt(fit_app, "--out", fit.out, "posterior file")->required();
  opt(fit_app, "--samples-out", fit.samples_out, "samples CSV (gibbs)");

  PredictArgs predict;
  CLI::App* predict_app =
      app.add_subcommand("predict", "Predict targets from a posterior");
  opt(predict_app, "--posterior", predict.posterior, "posterior file")
      ->required();
  opt(predict_app, "--data", predict.data, "dataset CSV")->required();
  opt(predict_app, "--out", predict.out, "predictions CSV")->required();

  ExperimentArgs exp;
  CLI::App* exp_app = app.add_subcommand(
      "experiment", "Monte Carlo curves, convergence rates and sweeps");
  exp_app->add_option("mode", exp.mode, "curves | convergence | sweep")
      ->required();
  opt(exp_app, "--epsilon", exp.epsilon, "total privacy budget");
  opt(exp_app, "--split", exp.split, "budget split p1,p2,p3");
  opt(exp_app, "--multipliers", exp.multipliers, "threshold multipliers wx,wy");
  opt(exp_app, "--bounds", exp.bounds, "fixed bounds bx,by");
  opt(exp_app, "--seed", exp.seed, "root seed");
  opt(exp_app, "--format", exp.format, "json | csv | both");
  opt(exp_app, "--out", exp.out, "output path prefix")->required();
  opt(exp_app, "--dims", exp.dims, "data dimensionality");
  opt(exp_app, "--n-private", exp.n_private, "private training size");
  opt(exp_app, "--n-nonprivate", exp.n_nonprivate,
      "non-private training size");
  opt(exp_app, "--n-test", exp.n_test, "test size");
  opt(exp_app, "--repeats", exp.repeats, "Monte Carlo repeats");
  opt(exp_app, "--variants", exp.variants, "comma-separated variant list");
  opt(exp_app, "--gibbs-fit", exp.gibbs_fit, "hierarchical fit via Gibbs");
  opt(exp_app, "--gibbs-m", exp.gibbs_m, "kept Gibbs draws");
  opt(exp_app, "--gibbs-burnin", exp.gibbs_burnin, "discarded Gibbs sweeps");
  opt(exp_app, "--data", exp.data, "fixed dataset CSV (curves mode)");
  opt(exp_app, "--preprocess", exp.preprocess,
      "train-fitted preprocessing for fixed datasets");
  opt(exp_app, "--mechanism", exp.mechanism, "convergence mechanism");
  opt(exp_app, "--n-grid", exp.n_grid, "convergence n grid");
  opt(exp_app, "--seeds-per-n", exp.seeds_per_n, "noise draws per n");
  opt(exp_app, "--l1-bound", exp.l1_bound, "gaussian-mean L1 bound");
  opt(exp_app, "--data-mean", exp.data_mean, "gaussian-mean data centre");
  opt(exp_app, "--dims-axis", exp.dims_axis, "sweep axis for d");
  opt(exp_app, "--n-private-axis", exp.n_private_axis, "sweep axis");
  opt(exp_app, "--n-nonprivate-axis", exp.n_nonprivate_axis, "sweep axis");
  opt(exp_app, "--epsilon-axis", exp.epsilon_axis, "sweep axis");

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()),
              const_cast<char**>(cargs.data()));

    if (*pre_app) return run_preprocess(pre);
    if (*tune_app) return run_tune(tune);
    if (*release_app) return run_release(release);
    if (*fit_app) return run_fit(fit);
    if (*predict_app) return run_predict(predict);
    if (*exp_app) {
      if (exp.mode == "curves") return run_experiment_curves(exp);
      if (exp.mode == "convergence") return run_experiment_convergence(exp);
      if (exp.mode == "sweep") return run_experiment_sweep(exp);
      throw std::invalid_argument(
          "experiment mode must be curves, convergence or sweep");
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json err;
    err["error"] = e.what();
    err["command"] = "parse";
    std::cerr << err.dump() << "\n";
    return e.get_exit_code();
  } catch (const std::exception& e) {
    ordered_json err;
    err["error"] = e.what();
    err["command"] = argc > 1 ? argv[1] : "";
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
