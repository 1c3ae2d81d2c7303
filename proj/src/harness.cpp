#include "upco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace upco {

int default_grid_resolution(int dim) { return dim <= 2 ? 65 : 33; }

namespace {

void for_each_grid_point(const ConvexBody& body, int res,
                         const std::function<void(const Vec&)>& fn) {
  const int d = body.dim();
  std::vector<int> ix(d, 0);
  Vec x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = double(ix[i]) / (res - 1);
    if (body.contains(x)) fn(x);
    int k = 0;
    while (k < d && ++ix[k] == res) ix[k++] = 0;
    if (k == d) break;
  }
}

// Coordinate ascent at step 1/(4 res), membership-checked, 50 passes.
void refine_point(const ConvexBody& body, const std::function<double(const Vec&)>& f, Vec& best,
                  double& best_val, int res) {
  double step = 1.0 / (4.0 * res);
  for (int pass = 0; pass < 50; ++pass) {
    bool improved = false;
    for (int i = 0; i < body.dim(); ++i) {
      for (const double sgn : {1.0, -1.0}) {
        Vec cand = best;
        cand[i] += sgn * step;
        if (!body.contains(cand)) continue;
        const double v = f(cand);
        if (v > best_val + 1e-15) {
          best_val = v;
          best = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

// Rounds grouped by distinct objective, preserving first-seen order.
struct DistinctObjectives {
  std::vector<ObjectivePtr> specs;
  std::vector<int> index_of_round;
};

DistinctObjectives group_objectives(const GameTranscript& tr) {
  DistinctObjectives out;
  std::map<const ObjectiveSpec*, int> seen;
  out.index_of_round.reserve(tr.objectives.size());
  for (const auto& f : tr.objectives) {
    auto [it, fresh] = seen.emplace(f.get(), static_cast<int>(out.specs.size()));
    if (fresh) out.specs.push_back(f);
    out.index_of_round.push_back(it->second);
  }
  return out;
}

}  // namespace

GridOptimum grid_optimum(const ConvexBody& body, const std::function<double(const Vec&)>& f,
                         int resolution) {
  if (body.dim() > 3) throw std::invalid_argument("grid_optimum: d <= 3 only");
  if (resolution < 17) throw std::invalid_argument("grid_optimum: resolution must be >= 17");
  GridOptimum best{body.center(), f(body.center())};
  for_each_grid_point(body, resolution, [&](const Vec& x) {
    const double v = f(x);
    if (v > best.value) {
      best.value = v;
      best.point = x;
    }
  });
  refine_point(body, f, best.point, best.value, resolution);
  return best;
}

double static_alpha_regret(const GameTranscript& tr, double alpha, const ConvexBody& body,
                           int resolution) {
  const int res = resolution > 0 ? resolution : default_grid_resolution(body.dim());
  const DistinctObjectives groups = group_objectives(tr);
  std::vector<double> counts(groups.specs.size(), 0.0);
  for (int gi : groups.index_of_round) counts[gi] += 1.0;
  auto total = [&](const Vec& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < groups.specs.size(); ++i)
      s += counts[i] * groups.specs[i]->value(u);
    return s;
  };
  const GridOptimum opt = grid_optimum(body, total, res);
  double played = 0.0;
  for (const auto& r : tr.rounds) played += r.value;
  return alpha * opt.value - played;
}

MaxSubarray max_subarray(const std::vector<double>& series) {
  if (series.empty()) throw std::invalid_argument("max_subarray: empty series");
  MaxSubarray best{series[0], 0, 0};
  double run = series[0];
  std::int64_t run_start = 0;
  for (std::int64_t i = 1; i < static_cast<std::int64_t>(series.size()); ++i) {
    if (run < 0.0) {
      run = series[i];
      run_start = i;
    } else {
      run += series[i];
    }
    if (run > best.sum) best = {run, run_start, i};
  }
  return best;
}

double adaptive_regret(const GameTranscript& tr, double alpha, const ConvexBody& body,
                       int resolution) {
  const int res = resolution > 0 ? resolution : default_grid_resolution(body.dim());
  if (body.dim() > 3) throw std::invalid_argument("adaptive_regret: d <= 3 only");
  const DistinctObjectives groups = group_objectives(tr);
  const std::int64_t T = static_cast<std::int64_t>(tr.rounds.size());

  double best_sum = -std::numeric_limits<double>::infinity();
  Vec best_u;
  std::int64_t best_a = 0, best_b = 0;
  std::vector<double> vals(groups.specs.size());
  std::vector<double> series(T);
  auto consider = [&](const Vec& u) {
    for (std::size_t i = 0; i < groups.specs.size(); ++i)
      vals[i] = groups.specs[i]->value(u);
    for (std::int64_t t = 0; t < T; ++t)
      series[t] = alpha * vals[groups.index_of_round[t]] - tr.rounds[t].value;
    const MaxSubarray win = max_subarray(series);
    if (win.sum > best_sum) {
      best_sum = win.sum;
      best_u = u;
      best_a = win.a;
      best_b = win.b;
    }
  };
  consider(body.center());
  for_each_grid_point(body, res, consider);

  // Refine the best comparator on its fixed window, then rescan the window.
  std::vector<double> window_counts(groups.specs.size(), 0.0);
  for (std::int64_t t = best_a; t <= best_b; ++t)
    window_counts[groups.index_of_round[t]] += 1.0;
  auto window_total = [&](const Vec& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < groups.specs.size(); ++i)
      s += window_counts[i] * groups.specs[i]->value(u);
    return alpha * s;
  };
  Vec refined = best_u;
  double refined_val = window_total(refined);
  refine_point(body, window_total, refined, refined_val, res);
  consider(refined);
  return best_sum;
}

DynamicRegretResult dynamic_regret(const GameTranscript& tr, double alpha,
                                   const std::vector<Vec>& comparators, const ConvexBody& body) {
  if (comparators.size() != tr.rounds.size())
    throw std::invalid_argument("dynamic_regret: comparator length must equal the horizon");
  DynamicRegretResult out;
  double comp = 0.0, played = 0.0;
  for (std::size_t t = 0; t < tr.rounds.size(); ++t) {
    if (!body.contains(comparators[t]))
      throw std::invalid_argument("dynamic_regret: comparator not in the body");
    comp += tr.objectives[t]->value(comparators[t]);
    played += tr.rounds[t].value;
    if (t + 1 < comparators.size()) out.path_length += (comparators[t + 1] - comparators[t]).norm();
  }
  out.regret = alpha * comp - played;
  return out;
}

SlopeFit fit_regret_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 4)
    throw std::invalid_argument("fit_regret_slope: need at least 4 horizons");
  SlopeFit fit;
  const int n = static_cast<int>(pairs.size());
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = std::log(pairs[i].first);
    double r = pairs[i].second;
    if (r <= 0.0) {
      r = 1e-6;
      fit.clipped = true;
    }
    ys[i] = std::log(r);
  }
  double xm = 0.0, ym = 0.0;
  for (int i = 0; i < n; ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += e * e;
  }
  fit.stderr_ = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  return fit;
}

ObjectiveClassParams aggregate_class_params(const std::vector<ObjectivePtr>& specs) {
  if (specs.empty()) throw std::invalid_argument("aggregate_class_params: empty class");
  ObjectiveClassParams p;
  p.gamma = 1.0;
  p.mu = specs[0]->mu;
  p.curvature = 0.0;
  p.monotone = true;
  for (const auto& s : specs) {
    p.gamma = std::min(p.gamma, s->gamma);
    p.mu = std::min(p.mu, s->mu);
    p.curvature = std::max(p.curvature, s->curvature);
    p.monotone = p.monotone && s->monotone;
    p.M0 = std::max(p.M0, s->M0);
    p.M1 = std::max(p.M1, s->M1);
  }
  return p;
}

namespace {

std::vector<ObjectivePtr> sequence_prototypes(const nlohmann::json& seq) {
  const std::string kind = seq.at("kind").get<std::string>();
  std::vector<ObjectivePtr> protos;
  if (kind == "constant") {
    protos.push_back(objective_from_json(seq.at("objective")));
  } else if (kind == "sign_flip") {
    const auto obj = seq.at("objective");
    if (obj.at("kind") != "linear")
      throw std::invalid_argument("sign_flip sequences take a linear objective");
    const auto hv = obj.at("h").get<std::vector<double>>();
    const Vec h = Eigen::Map<const Vec>(hv.data(), hv.size());
    protos.push_back(make_linear(h));
    protos.push_back(make_linear(-h));
  } else if (kind == "iid" || kind == "piecewise") {
    for (const auto& oj : seq.at("objectives")) protos.push_back(objective_from_json(oj));
    if (protos.empty()) throw std::invalid_argument("sequence: empty objective list");
  } else {
    throw std::invalid_argument("unknown sequence kind: " + kind);
  }
  return protos;
}

}  // namespace

std::unique_ptr<Adversary> build_adversary(const ExperimentConfig& cfg, OracleOrder order,
                                           std::int64_t T, std::uint64_t seed) {
  const std::vector<ObjectivePtr> protos = sequence_prototypes(cfg.sequence);
  std::vector<QueryOracle> oracles;
  oracles.reserve(protos.size());
  for (const auto& p : protos) oracles.push_back(noisy_oracle(p, order, cfg.sigma));

  const std::string kind = cfg.sequence.at("kind").get<std::string>();
  RngStream rng = RngStream(seed).split(kAdversaryStreamTag);
  std::vector<Realization> seq;
  seq.reserve(T);
  for (std::int64_t t = 1; t <= T; ++t) {
    std::size_t idx = 0;
    if (kind == "sign_flip") {
      idx = rng.uniform() < 0.5 ? 0 : 1;
    } else if (kind == "iid") {
      idx = static_cast<std::size_t>(rng.uniform_int(protos.size()));
    } else if (kind == "piecewise") {
      const std::int64_t phases = cfg.sequence.value("phases", 2);
      const std::int64_t block = std::max<std::int64_t>(1, (T + phases - 1) / phases);
      idx = static_cast<std::size_t>(((t - 1) / block) % protos.size());
    }
    seq.push_back({protos[idx], oracles[idx]});
  }
  return make_oblivious(std::move(seq));
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.body = j.at("body");
  cfg.sequence = j.at("sequence");
  cfg.pipeline = j.value("pipeline", std::string("so_oga"));
  cfg.base_params = j.value("base_params", nlohmann::json::object());
  for (const auto& t : j.at("horizons")) cfg.horizons.push_back(t.get<std::int64_t>());
  cfg.seeds = j.value("seeds", 10);
  cfg.sigma = j.value("sigma", 0.0);
  if (j.contains("alpha") && j.at("alpha").is_number())
    cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("regrets"))
    cfg.regrets = j.at("regrets").get<std::vector<std::string>>();
  cfg.grid_resolution = j.value("grid_resolution", 0);
  cfg.out_dir = j.value("out_dir", std::string());
  cfg.write_transcripts = j.value("write_transcripts", false);
  cfg.thresholds = j.value("thresholds", nlohmann::json::object());
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["body"] = body;
  j["sequence"] = sequence;
  j["pipeline"] = pipeline;
  j["base_params"] = base_params;
  j["horizons"] = horizons;
  j["seeds"] = seeds;
  j["sigma"] = sigma;
  if (alpha) j["alpha"] = *alpha;
  j["regrets"] = regrets;
  j["grid_resolution"] = grid_resolution;
  j["write_transcripts"] = write_transcripts;
  j["thresholds"] = thresholds;
  return j;
}

std::string ExperimentConfig::config_hash() const {
  std::ostringstream out;
  out << std::hex << fnv1a64(to_json().dump());
  return out.str();
}

double ExperimentSummary::mean(std::int64_t T, double RunRow::*field) const {
  double s = 0.0;
  int n = 0;
  for (const auto& r : rows)
    if (r.T == T) {
      s += r.*field;
      ++n;
    }
  return n > 0 ? s / n : 0.0;
}

std::string ExperimentSummary::to_csv() const {
  std::ostringstream out;
  out << "pipeline,setting,T,seeds,alpha,mean_static,mean_adaptive,mean_dynamic,"
         "path_length,slope,stderr,pass\n";
  std::vector<std::int64_t> horizons;
  for (const auto& r : rows)
    if (horizons.empty() || horizons.back() != r.T) horizons.push_back(r.T);
  for (std::int64_t T : horizons) {
    out << pipeline << "," << setting << "," << T << "," << seeds << ","
        << format_double(alpha) << "," << format_double(mean(T, &RunRow::static_regret)) << ","
        << format_double(mean(T, &RunRow::adaptive_regret)) << ","
        << format_double(mean(T, &RunRow::dynamic_regret)) << ","
        << format_double(mean(T, &RunRow::path_length)) << ",";
    if (has_slope)
      out << format_double(slope.slope) << "," << format_double(slope.stderr_);
    else
      out << ",";
    out << "," << (pass ? "pass" : "fail") << "\n";
  }
  return out.str();
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  const ConvexBody body = ConvexBody::from_json(cfg.body);
  const Pipeline pipe = Pipeline::parse(cfg.pipeline);
  const std::vector<ObjectivePtr> protos = sequence_prototypes(cfg.sequence);
  const ObjectiveClassParams cls = aggregate_class_params(protos);

  const bool want_static = std::count(cfg.regrets.begin(), cfg.regrets.end(), "static") > 0;
  const bool want_adaptive = std::count(cfg.regrets.begin(), cfg.regrets.end(), "adaptive") > 0;
  const bool want_dynamic = std::count(cfg.regrets.begin(), cfg.regrets.end(), "dynamic") > 0;
  if (want_dynamic && pipe.contains("sftt"))
    throw std::invalid_argument(
        "run_experiment: dynamic regret is not transported through sftt");

  ExperimentSummary summary;
  summary.pipeline = cfg.pipeline;
  summary.setting = pipe.contains("ombq") ? to_string(pipe.scheme_setting()) : "base";
  summary.alpha = cfg.alpha.value_or(pipe.alpha(cls, body));
  summary.seeds = cfg.seeds;

  const OracleOrder order = required_oracle_order(pipe.feedback(cls, body));

  struct Task {
    std::int64_t T;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::int64_t T : cfg.horizons)
    for (int s = 0; s < cfg.seeds; ++s) tasks.push_back({T, static_cast<std::uint64_t>(s)});

  std::vector<RunRow> rows(tasks.size());
  std::vector<std::string> transcripts(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      try {
        const auto [T, seed] = tasks[i];
        auto adversary = build_adversary(cfg, order, T, seed);
        auto agent = pipe.build(cls, body, cfg.base_params);
        GameTranscript tr = run_game(*agent, *adversary, T, body, seed);
        tr.header_note = "pipeline=" + agent->describe() + "\nconfig=" + cfg.config_hash() +
                         "\nseed=" + std::to_string(seed);
        RunRow row;
        row.T = T;
        row.seed = seed;
        row.wall_seconds = tr.wall_seconds;
        if (want_static)
          row.static_regret = static_alpha_regret(tr, summary.alpha, body, cfg.grid_resolution);
        if (want_adaptive)
          row.adaptive_regret = adaptive_regret(tr, summary.alpha, body, cfg.grid_resolution);
        if (want_dynamic) {
          const int res = cfg.grid_resolution > 0 ? cfg.grid_resolution
                                                  : default_grid_resolution(body.dim());
          std::map<const ObjectiveSpec*, Vec> opt;
          std::vector<Vec> u;
          u.reserve(tr.rounds.size());
          for (const auto& f : tr.objectives) {
            auto it = opt.find(f.get());
            if (it == opt.end())
              it = opt.emplace(f.get(), grid_optimum(body, f->value, res).point).first;
            u.push_back(it->second);
          }
          const DynamicRegretResult dyn = dynamic_regret(tr, summary.alpha, u, body);
          row.dynamic_regret = dyn.regret;
          row.path_length = dyn.path_length;
        }
        rows[i] = row;
        if (cfg.write_transcripts) transcripts[i] = tr.to_csv();
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(error_mu);
        failed = true;
        error = e.what();
      }
    }
  };
  const unsigned nw = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                      static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed) throw std::runtime_error("run_experiment: " + error);

  summary.rows = rows;

  if (want_static && cfg.horizons.size() >= 4) {
    std::vector<std::pair<double, double>> pts;
    for (std::int64_t T : cfg.horizons)
      pts.emplace_back(double(T), summary.mean(T, &RunRow::static_regret));
    summary.slope = fit_regret_slope(pts);
    summary.has_slope = true;
    if (summary.slope.clipped)
      summary.notes.push_back("some mean regrets were nonpositive and clipped at 1e-6");
  }
  if (summary.has_slope) {
    if (cfg.thresholds.contains("slope_max") &&
        summary.slope.slope > cfg.thresholds.at("slope_max").get<double>())
      summary.pass = false;
    if (cfg.thresholds.contains("slope_min") &&
        summary.slope.slope < cfg.thresholds.at("slope_min").get<double>())
      summary.pass = false;
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    if (cfg.write_transcripts) {
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        std::ostringstream name;
        name << "game_" << cfg.config_hash() << "_T" << tasks[i].T << "_s" << tasks[i].seed
             << ".csv";
        std::ofstream f(fs::path(cfg.out_dir) / name.str(), std::ios::binary);
        f << transcripts[i];
      }
    }
    std::ofstream f(fs::path(cfg.out_dir) / "summary.csv", std::ios::binary);
    f << summary.to_csv();
  }
  return summary;
}

}  // namespace upco
