#pragma once

#include <memory>

#include "upco/protocol.hpp"

namespace upco {

struct SmoothingConfig {
  double delta = 0.0;  // 0 -> min(0.9 r (1-1e-6), T^{(eta-1)/2}) from the base's exponent
};

// Shared estimator arithmetic (also used directly by tests).
inline Vec one_point_gradient_estimate(int k, double delta, double value, const Vec& v) {
  return (k / delta) * value * v;
}
inline Vec two_point_gradient_estimate(int k, double delta, double plus, double minus,
                                       const Vec& v) {
  return (k / (2.0 * delta)) * (plus - minus) * v;
}

// Corollary schedule delta = T^{(eta-1)/2}, capped below the inner radius.
double smoothing_delta_schedule(double regret_exponent, std::int64_t T, double inner_radius);

// First order -> zeroth order: the base runs on the shrunk body; every base
// query y is answered by one value query at y + delta v with v uniform on the
// unit sphere of L0, fed back as (k/delta) o v.
std::unique_ptr<Agent> make_fotzo(std::unique_ptr<Agent> base, SmoothingConfig cfg = {});

// Semi-bandit -> bandit: plays x_t + delta v_t, feeds (k/delta) o_t v_t.
std::unique_ptr<Agent> make_stb(std::unique_ptr<Agent> base, SmoothingConfig cfg = {});

// Two-point variant; needs a deterministic value oracle. lipschitz_bound is
// the class constant M1 (the estimator is bounded by k M1).
std::unique_ptr<Agent> make_fotzo_2p(std::unique_ptr<Agent> base, double lipschitz_bound,
                                     SmoothingConfig cfg = {});

struct BlockConfig {
  std::int64_t block_length = 0;  // 0 -> T^{(1-eta)/(2-eta)} schedule
};
std::int64_t sftt_block_schedule(double regret_exponent, std::int64_t T);

// Stochastic full-information to trivial query: hides the base's K queries in
// randomly permuted slots of length-L blocks; the remaining slots play the
// base's action. The final partial block replays the last action and is
// excluded from the base's horizon.
std::unique_ptr<Agent> make_sftt(std::unique_ptr<Agent> base, BlockConfig cfg = {});

struct OtbResult {
  Vec point;
  double value = 0.0;  // true objective value at the returned point
  std::int64_t oracle_calls = 0;
  // sample-complexity bookkeeping: error epsilon needs O(epsilon^{-complexity_exponent})
  // queries for a base with regret exponent eta and K = O(T^theta) queries per round
  double regret_exponent = 0.5;
  double query_exponent = 0.0;
  double complexity_exponent = 2.0;
  GameTranscript transcript;
};

// Online-to-batch: runs the game against a constant oblivious adversary and
// returns one iterate uniformly at random.
OtbResult otb(Agent& base, Adversary& adversary, std::int64_t T, const ConvexBody& body,
              std::uint64_t seed);

}  // namespace upco
