#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "upco/harness.hpp"

namespace {

upco::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return upco::ExperimentConfig::from_json(j);
}

void print_summary(const upco::ExperimentSummary& summary) {
  std::cout << "pipeline: " << summary.pipeline << "  setting: " << summary.setting
            << "  alpha: " << summary.alpha << "\n";
  std::vector<std::int64_t> horizons;
  for (const auto& r : summary.rows)
    if (horizons.empty() || horizons.back() != r.T) horizons.push_back(r.T);
  for (std::int64_t T : horizons) {
    std::cout << "  T=" << T << "  static=" << summary.mean(T, &upco::RunRow::static_regret)
              << "  adaptive=" << summary.mean(T, &upco::RunRow::adaptive_regret)
              << "  dynamic=" << summary.mean(T, &upco::RunRow::dynamic_regret)
              << "  P_T=" << summary.mean(T, &upco::RunRow::path_length) << "\n";
  }
  if (summary.has_slope)
    std::cout << "  slope=" << summary.slope.slope << " +- " << summary.slope.stderr_
              << (summary.slope.clipped ? " (clipped)" : "") << "\n";
  for (const auto& n : summary.notes) std::cout << "  note: " << n << "\n";
  std::cout << "  " << (summary.pass ? "PASS" : "FAIL") << "\n";
}

std::vector<std::int64_t> parse_horizons(const std::string& csv) {
  std::vector<std::int64_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online up-concave maximization: experiment runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, horizons_csv, report_dir;
  int seeds = 0;

  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory override");

  auto* sweep = app.add_subcommand("sweep", "run a horizon sweep");
  sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
  sweep->add_option("--horizons", horizons_csv, "comma-separated horizons");
  sweep->add_option("--seeds", seeds, "seeds per horizon");
  sweep->add_option("--out", out_dir, "output directory override");

  auto* report = app.add_subcommand("report", "print the summary of a finished run");
  report->add_option("--dir", report_dir, "output directory of a previous run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      std::ifstream in(report_dir + "/summary.csv");
      if (!in) throw std::runtime_error("no summary.csv under " + report_dir);
      std::cout << in.rdbuf();
      return 0;
    }
    upco::ExperimentConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (sweep->parsed()) {
      if (!horizons_csv.empty()) cfg.horizons = parse_horizons(horizons_csv);
      if (seeds > 0) cfg.seeds = seeds;
    }
    const upco::ExperimentSummary summary = upco::run_experiment(cfg);
    print_summary(summary);
    return summary.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
