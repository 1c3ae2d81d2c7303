#pragma once

#include <memory>

#include "upco/protocol.hpp"

namespace upco {

enum class SchemeSetting { mono_general, mono_zero, nonmono };
enum class QueryAlgo { trivial, bqm0, bqn };

std::string to_string(SchemeSetting s);

// Declared parameters of the objective function class in play.
struct ObjectiveClassParams {
  double gamma = 1.0;
  double mu = 0.0;
  double curvature = 1.0;
  bool monotone = false;
  double M0 = 0.0;
  double M1 = 0.0;
};

inline ObjectiveClassParams class_params_of(const ObjectiveSpec& s) {
  return {s.gamma, s.mu, s.curvature, s.monotone, s.M0, s.M1};
}

struct QuadratizationScheme {
  SchemeSetting setting = SchemeSetting::mono_general;
  double alpha = 1.0;  // approximation ratio
  double beta = 1.0;   // transfer coefficient
  double mu_out = 0.0;
  double gamma = 1.0;
  QueryAlgo query_algo = QueryAlgo::trivial;
  Vec x_under;  // nonmono only
  bool identity_h = true;

  Vec h_map(const Vec& x) const { return identity_h ? x : Vec(0.5 * (x + x_under)); }
};

// Fills alpha/beta/h/query algorithm for the three settings:
//   mono_general -> (gamma^2/(1+c gamma^2), gamma/(1+c gamma^2), Id, trivial)
//   mono_zero    -> (1-e^{-gamma}, (1-e^{-gamma})/gamma, Id, BQM0); needs 0 in K
//   nonmono      -> ((1-h)/4, 3/8, midpoint with x_under, BQN)
QuadratizationScheme scheme_for(SchemeSetting setting, const ObjectiveClassParams& params,
                                const ConvexBody& body);

// Sampling law of the BQM0 rescaling variable and its closed-form inverse.
double bqm0_cdf(double gamma, double z);
double bqm0_inverse_cdf(double gamma, double p);
double bqn_cdf(double z);
double bqn_inverse_cdf(double p);

// One boosted-query draw: sample z, query the first-order oracle at the
// rescaled point. The expectation over z and oracle noise is grad F(x).
Vec bqm0_query(double gamma, const QueryOracle& oracle, const Vec& x, RngStream& rng);
Vec bqn_query(const Vec& x_under, const QueryOracle& oracle, const Vec& x, RngStream& rng);

// Online maximization by quadratization: plays h(x_t) for the base's action
// x_t, runs the scheme's query algorithm against the adversary's first-order
// oracle and feeds the result to the base as its semi-bandit observation.
// With a trivial query algorithm and identity h the wrapper is transparent.
std::unique_ptr<Agent> make_ombq(std::unique_ptr<Agent> base, QuadratizationScheme scheme);

}  // namespace upco
