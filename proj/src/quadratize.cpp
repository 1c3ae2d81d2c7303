#include "upco/quadratize.hpp"

#include <cmath>
#include <stdexcept>

namespace upco {

std::string to_string(SchemeSetting s) {
  switch (s) {
    case SchemeSetting::mono_general: return "mono_general";
    case SchemeSetting::mono_zero: return "mono_zero";
    case SchemeSetting::nonmono: return "nonmono";
  }
  return "?";
}

double bqm0_cdf(double gamma, double z) {
  return (std::exp(gamma * (z - 1.0)) - std::exp(-gamma)) / (1.0 - std::exp(-gamma));
}

double bqm0_inverse_cdf(double gamma, double p) {
  if (gamma <= 0.0 || gamma > 1.0)
    throw std::invalid_argument("bqm0: gamma outside (0,1]");
  const double eg = std::exp(-gamma);
  return 1.0 + std::log(eg + p * (1.0 - eg)) / gamma;
}

double bqn_cdf(double z) {
  const double w = 1.0 - 0.5 * z;
  return (1.0 / (w * w) - 1.0) / 3.0;
}

double bqn_inverse_cdf(double p) { return 2.0 * (1.0 - 1.0 / std::sqrt(1.0 + 3.0 * p)); }

Vec bqm0_query(double gamma, const QueryOracle& oracle, const Vec& x, RngStream& rng) {
  if (oracle.order != OracleOrder::first)
    throw std::invalid_argument("bqm0_query: first-order oracle required");
  const double z = bqm0_inverse_cdf(gamma, rng.uniform());
  return obs_vector(oracle.sample(z * x, rng));
}

Vec bqn_query(const Vec& x_under, const QueryOracle& oracle, const Vec& x, RngStream& rng) {
  if (oracle.order != OracleOrder::first)
    throw std::invalid_argument("bqn_query: first-order oracle required");
  const double z = bqn_inverse_cdf(rng.uniform());
  return obs_vector(oracle.sample(0.5 * z * (x - x_under) + x_under, rng));
}

QuadratizationScheme scheme_for(SchemeSetting setting, const ObjectiveClassParams& params,
                                const ConvexBody& body) {
  QuadratizationScheme s;
  s.setting = setting;
  s.gamma = params.gamma;
  if (params.gamma <= 0.0 || params.gamma > 1.0)
    throw std::invalid_argument("scheme_for: gamma outside (0,1]");
  switch (setting) {
    case SchemeSetting::mono_general: {
      if (!params.monotone)
        throw std::invalid_argument("scheme_for: mono_general needs a monotone class");
      const double g = params.gamma, c = params.curvature;
      s.alpha = g * g / (1.0 + c * g * g);
      s.beta = g / (1.0 + c * g * g);
      s.mu_out = params.mu;
      s.query_algo = QueryAlgo::trivial;
      s.identity_h = true;
      break;
    }
    case SchemeSetting::mono_zero: {
      if (!params.monotone)
        throw std::invalid_argument("scheme_for: mono_zero needs a monotone class");
      if (!body.contains(Vec::Zero(body.dim())))
        throw std::invalid_argument("scheme_for: mono_zero needs the origin in the body");
      const double g = params.gamma;
      s.alpha = 1.0 - std::exp(-g);
      s.beta = s.alpha / g;
      s.mu_out = 0.0;
      s.query_algo = QueryAlgo::bqm0;
      s.identity_h = true;
      break;
    }
    case SchemeSetting::nonmono: {
      s.x_under = body.min_inf_point();
      const double h = s.x_under.cwiseAbs().maxCoeff();
      if (h >= 1.0)
        throw std::invalid_argument("scheme_for: min-inf point has unit sup norm");
      s.alpha = (1.0 - h) / 4.0;
      s.beta = 3.0 / 8.0;
      s.mu_out = 0.0;
      s.query_algo = QueryAlgo::bqn;
      s.identity_h = false;
      break;
    }
  }
  if (!(s.alpha > 0.0 && s.alpha <= 1.0) || !(s.beta > 0.0))
    throw std::logic_error("scheme_for: invalid alpha/beta");
  return s;
}

namespace {

class OmbqAgent final : public Agent {
 public:
  OmbqAgent(std::unique_ptr<Agent> base, QuadratizationScheme scheme)
      : base_(std::move(base)), scheme_(std::move(scheme)) {
    if (base_->feedback_class() != FeedbackClass::semi_bandit)
      throw std::invalid_argument("ombq: base must consume semi-bandit feedback");
    if (scheme_.query_algo != QueryAlgo::trivial && base_->requires_deterministic_oracle())
      throw std::invalid_argument("ombq: boosted query draws are stochastic");
  }

  FeedbackClass feedback_class() const override {
    return scheme_.query_algo == QueryAlgo::trivial ? FeedbackClass::semi_bandit
                                                    : FeedbackClass::full_info_first;
  }
  int queries_per_round() const override { return 1; }
  bool requires_deterministic_oracle() const override {
    return scheme_.query_algo == QueryAlgo::trivial && base_->requires_deterministic_oracle();
  }
  bool is_deterministic() const override {
    return scheme_.query_algo == QueryAlgo::trivial && base_->is_deterministic();
  }
  double regret_exponent() const override { return base_->regret_exponent(); }
  std::string describe() const override {
    const char* q = scheme_.query_algo == QueryAlgo::trivial
                        ? "trivial"
                        : (scheme_.query_algo == QueryAlgo::bqm0 ? "bqm0" : "bqn");
    return "ombq(" + base_->describe() + "," + q + ")";
  }

  void begin(std::int64_t T, const ConvexBody& body, double obs_bound, RngStream rng) override {
    // When a smoothing wrapper hands us a shrunk body, conjugate the scaling
    // anchors by the shrink map; comparators shift the same way in the
    // smoothing analysis. On unshrunk bodies this is the identity.
    if (scheme_.query_algo == QueryAlgo::bqm0) {
      anchor_ = body.shrink_map(Vec::Zero(body.dim()));
      if (!body.contains(anchor_))
        throw std::invalid_argument("ombq: BQM0 scheme needs the origin in the body");
    }
    if (!scheme_.identity_h) {
      x_under_eff_ = body.shrink_map(scheme_.x_under);
      if (!body.contains(x_under_eff_))
        throw std::invalid_argument("ombq: x_under outside the body");
    }
    if (scheme_.query_algo == QueryAlgo::trivial) {
      base_->begin(T, body, obs_bound, rng);  // transparent: A' = A
    } else {
      base_->begin(T, body, obs_bound, rng.split(0));
      z_rng_ = rng.split(1);
    }
  }

  AgentPlay play(std::int64_t t) override {
    const AgentPlay base_play = base_->play(t);
    x_t_ = base_play.played;
    emitted_ = false;
    const Vec played = scheme_.identity_h ? x_t_ : Vec(0.5 * (x_t_ + x_under_eff_));
    return {played, x_t_};
  }

  std::optional<Vec> next_query(std::int64_t t) override {
    if (scheme_.query_algo == QueryAlgo::trivial) return base_->next_query(t);
    if (emitted_) return std::nullopt;
    emitted_ = true;
    const double p = z_rng_->uniform();
    if (scheme_.query_algo == QueryAlgo::bqm0) {
      const double z = bqm0_inverse_cdf(scheme_.gamma, p);
      return Vec(anchor_ + z * (x_t_ - anchor_));
    }
    const double z = bqn_inverse_cdf(p);
    return Vec(0.5 * z * (x_t_ - x_under_eff_) + x_under_eff_);
  }

  void observe(std::int64_t t, const Observation& obs) override { base_->observe(t, obs); }
  void end_round(std::int64_t t) override { base_->end_round(t); }

 private:
  std::unique_ptr<Agent> base_;
  QuadratizationScheme scheme_;
  std::optional<RngStream> z_rng_;
  Vec anchor_, x_under_eff_, x_t_;
  bool emitted_ = false;
};

}  // namespace

std::unique_ptr<Agent> make_ombq(std::unique_ptr<Agent> base, QuadratizationScheme scheme) {
  return std::make_unique<OmbqAgent>(std::move(base), std::move(scheme));
}

}  // namespace upco
