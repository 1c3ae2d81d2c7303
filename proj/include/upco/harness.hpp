#pragma once

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "upco/pipeline.hpp"

namespace upco {

struct GridOptimum {
  Vec point;
  double value = 0.0;
};

// Brute-force optimum oracle: lattice scan over the body followed by local
// coordinate ascent at step 1/(4 resolution). d <= 3 only.
GridOptimum grid_optimum(const ConvexBody& body, const std::function<double(const Vec&)>& f,
                         int resolution);
int default_grid_resolution(int dim);  // 65 for d <= 2, 33 for d = 3

// alpha max_u sum_t f_t(u) - sum_t f_t(x_t^played), fixed comparator.
double static_alpha_regret(const GameTranscript& tr, double alpha, const ConvexBody& body,
                           int resolution = 0);

struct MaxSubarray {
  double sum = 0.0;
  std::int64_t a = 0, b = 0;  // best window, inclusive, 0-based; windows nonempty
};
MaxSubarray max_subarray(const std::vector<double>& series);

// max over comparators and contiguous windows of the alpha-regret.
double adaptive_regret(const GameTranscript& tr, double alpha, const ConvexBody& body,
                       int resolution = 0);

struct DynamicRegretResult {
  double regret = 0.0;
  double path_length = 0.0;
};
DynamicRegretResult dynamic_regret(const GameTranscript& tr, double alpha,
                                   const std::vector<Vec>& comparators, const ConvexBody& body);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
  bool clipped = false;  // some regrets were <= 0 and clipped at 1e-6
};
// Least squares on log(regret) vs log(T); needs >= 4 geometrically spaced horizons.
SlopeFit fit_regret_slope(const std::vector<std::pair<double, double>>& pairs);

struct ExperimentConfig {
  nlohmann::json body;
  nlohmann::json sequence;
  std::string pipeline = "so_oga";
  nlohmann::json base_params = nlohmann::json::object();
  std::vector<std::int64_t> horizons;
  int seeds = 10;
  double sigma = 0.0;
  std::optional<double> alpha;  // override; default is the pipeline's ratio
  std::vector<std::string> regrets = {"static"};
  int grid_resolution = 0;
  std::string out_dir;
  bool write_transcripts = false;
  nlohmann::json thresholds = nlohmann::json::object();

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string config_hash() const;
};

struct RunRow {
  std::int64_t T = 0;
  std::uint64_t seed = 0;
  double static_regret = 0.0;
  double adaptive_regret = 0.0;
  double dynamic_regret = 0.0;
  double path_length = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentSummary {
  std::string pipeline;
  std::string setting;
  double alpha = 1.0;
  int seeds = 0;
  std::vector<RunRow> rows;  // ordered by (T, seed)
  SlopeFit slope;
  bool has_slope = false;
  bool pass = true;
  std::vector<std::string> notes;

  double mean(std::int64_t T, double RunRow::*field) const;
  std::string to_csv() const;  // one row per horizon
};

// Builds the pre-drawn oblivious adversary for one (T, seed) run.
std::unique_ptr<Adversary> build_adversary(const ExperimentConfig& cfg, OracleOrder order,
                                           std::int64_t T, std::uint64_t seed);

// Runs every (T, seed) pair, evaluates the requested regrets, writes per-run
// transcripts and summary.csv under out_dir when set. Threshold failures set
// pass = false.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

ObjectiveClassParams aggregate_class_params(const std::vector<ObjectivePtr>& specs);

}  // namespace upco
