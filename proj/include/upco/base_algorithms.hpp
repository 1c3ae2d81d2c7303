#pragma once

#include <json.hpp>

#include <memory>
#include <optional>
#include <vector>

#include "upco/protocol.hpp"

namespace upco {

struct SoIpResult {
  Vec point;
  int separation_calls = 0;
  int steps = 0;  // hyperplane steps taken (separation calls that moved the point)
};

// Infeasible projection via the separation oracle: returns a member p of K
// with ||p - z|| <= ||y0 - z|| for every z in the delta-shrunk body. Aborts
// past ceil(D^2/delta^2) + 2 separation calls, which indicates a broken
// separation oracle.
SoIpResult so_ip(const ConvexBody& body, double delta, const Vec& y0);

struct SoOgaParams {
  double v = 0.0;               // free scale; 0 -> delta = min(0.4 r, T^{-1/2})
  std::optional<double> eta;    // step override (tests)
  std::optional<double> delta;  // shrinking override (tests)
};

// Online gradient ascent with separation-oracle infeasible projection
// (semi-bandit, maximization).
std::unique_ptr<Agent> make_so_oga(SoOgaParams params = {});

// The Improved Ader parameterization for a given horizon.
struct IaSchedule {
  std::vector<double> etas;  // ascending step sizes, one expert each
  double lambda = 0.0;
  std::vector<double> initial_weights;
};
IaSchedule ia_schedule(std::int64_t T, double diameter, double grad_bound);

// Improved Ader: Hedge over projected-OGA experts, one per step size. The
// horizon schedule is used unless an explicit one is given.
std::unique_ptr<Agent> make_improved_ader(std::optional<IaSchedule> schedule = std::nullopt);

struct ProjectedOgaParams {
  double eta0 = 0.0;  // 0 -> D / obs_bound; eta_t = eta0 / sqrt(t)
};
std::unique_ptr<Agent> make_projected_oga(ProjectedOgaParams params = {});

double so_oga_default_delta(std::int64_t T, double r);

// {"algo":"so_oga","v":...} | {"algo":"ia"} | {"algo":"oga","eta0":...}
std::unique_ptr<Agent> agent_from_json(const nlohmann::json& j);

}  // namespace upco
