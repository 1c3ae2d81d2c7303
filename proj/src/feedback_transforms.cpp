#include "upco/feedback_transforms.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace upco {

double smoothing_delta_schedule(double regret_exponent, std::int64_t T, double inner_radius) {
  const double schedule = std::pow(double(T), 0.5 * (regret_exponent - 1.0));
  return std::min(0.9 * inner_radius * (1.0 - 1e-6), schedule);
}

std::int64_t sftt_block_schedule(double regret_exponent, std::int64_t T) {
  const double eta = regret_exponent;
  return static_cast<std::int64_t>(
      std::llround(std::pow(double(T), (1.0 - eta) / (2.0 - eta))));
}

namespace {

class FotzoAgent final : public Agent {
 public:
  FotzoAgent(std::unique_ptr<Agent> base, SmoothingConfig cfg)
      : base_(std::move(base)), cfg_(cfg) {
    const FeedbackClass fc = base_->feedback_class();
    if (required_oracle_order(fc) != OracleOrder::first)
      throw std::invalid_argument("fotzo: base must consume first-order feedback");
    if (base_->requires_deterministic_oracle())
      throw std::invalid_argument("fotzo: one-point estimates are stochastic");
  }

  FeedbackClass feedback_class() const override { return FeedbackClass::full_info_zeroth; }
  int queries_per_round() const override { return base_->queries_per_round(); }
  bool is_deterministic() const override { return false; }
  double regret_exponent() const override { return 0.5 * (1.0 + base_->regret_exponent()); }
  std::string describe() const override {
    return "fotzo(delta=" + format_double(delta_) + "," + base_->describe() + ")";
  }

  void begin(std::int64_t T, const ConvexBody& body, double obs_bound, RngStream rng) override {
    const double r = body.inner_radius();
    delta_ = cfg_.delta > 0.0 ? cfg_.delta
                              : smoothing_delta_schedule(base_->regret_exponent(), T, r);
    if (delta_ >= r) throw std::invalid_argument("fotzo: delta must be below the inner radius");
    k_ = body.affine_dim();
    body_ = body;
    base_->begin(T, body.shrink(delta_), (k_ / delta_) * obs_bound, rng.split(0));
    sphere_rng_ = rng.split(1);
  }

  AgentPlay play(std::int64_t t) override {
    pending_.clear();
    return base_->play(t);
  }

  std::optional<Vec> next_query(std::int64_t t) override {
    auto y = base_->next_query(t);
    if (!y) return std::nullopt;
    const Vec v = body_->sample_sphere_L0(*sphere_rng_);
    pending_.push_back(v);
    return Vec(*y + delta_ * v);
  }

  void observe(std::int64_t t, const Observation& obs) override {
    const Vec v = pending_.front();
    pending_.pop_front();
    base_->observe(t, one_point_gradient_estimate(k_, delta_, obs_scalar(obs), v));
  }

  void end_round(std::int64_t t) override { base_->end_round(t); }

  double delta() const { return delta_; }

 private:
  std::unique_ptr<Agent> base_;
  SmoothingConfig cfg_;
  std::optional<ConvexBody> body_;
  std::optional<RngStream> sphere_rng_;
  std::deque<Vec> pending_;
  double delta_ = 0.0;
  int k_ = 0;
};

class StbAgent final : public Agent {
 public:
  StbAgent(std::unique_ptr<Agent> base, SmoothingConfig cfg)
      : base_(std::move(base)), cfg_(cfg) {
    if (base_->feedback_class() != FeedbackClass::semi_bandit)
      throw std::invalid_argument("stb: base must be a semi-bandit agent");
    if (base_->requires_deterministic_oracle())
      throw std::invalid_argument("stb: one-point estimates are stochastic");
  }

  FeedbackClass feedback_class() const override { return FeedbackClass::bandit; }
  int queries_per_round() const override { return 1; }
  bool is_deterministic() const override { return false; }
  double regret_exponent() const override { return 0.5 * (1.0 + base_->regret_exponent()); }
  std::string describe() const override {
    return "stb(delta=" + format_double(delta_) + "," + base_->describe() + ")";
  }

  void begin(std::int64_t T, const ConvexBody& body, double obs_bound, RngStream rng) override {
    const double r = body.inner_radius();
    delta_ = cfg_.delta > 0.0 ? cfg_.delta
                              : smoothing_delta_schedule(base_->regret_exponent(), T, r);
    if (delta_ >= r) throw std::invalid_argument("stb: delta must be below the inner radius");
    k_ = body.affine_dim();
    body_ = body;
    base_->begin(T, body.shrink(delta_), (k_ / delta_) * obs_bound, rng.split(0));
    sphere_rng_ = rng.split(1);
  }

  AgentPlay play(std::int64_t t) override {
    const AgentPlay base_play = base_->play(t);
    v_ = body_->sample_sphere_L0(*sphere_rng_);
    played_ = base_play.played + delta_ * v_;
    emitted_ = false;
    return {played_, base_play.played};
  }

  std::optional<Vec> next_query(std::int64_t) override {
    if (emitted_) return std::nullopt;
    emitted_ = true;
    return played_;
  }

  void observe(std::int64_t t, const Observation& obs) override {
    // consume the base's own trivial query before answering it
    base_->next_query(t);
    base_->observe(t, one_point_gradient_estimate(k_, delta_, obs_scalar(obs), v_));
  }

  void end_round(std::int64_t t) override { base_->end_round(t); }

 private:
  std::unique_ptr<Agent> base_;
  SmoothingConfig cfg_;
  std::optional<ConvexBody> body_;
  std::optional<RngStream> sphere_rng_;
  Vec v_, played_;
  double delta_ = 0.0;
  int k_ = 0;
  bool emitted_ = false;
};

class Fotzo2pAgent final : public Agent {
 public:
  Fotzo2pAgent(std::unique_ptr<Agent> base, double lipschitz_bound, SmoothingConfig cfg)
      : base_(std::move(base)), lipschitz_(lipschitz_bound), cfg_(cfg) {
    if (required_oracle_order(base_->feedback_class()) != OracleOrder::first)
      throw std::invalid_argument("fotzo_2p: base must consume first-order feedback");
  }

  FeedbackClass feedback_class() const override { return FeedbackClass::full_info_zeroth; }
  int queries_per_round() const override { return 2 * base_->queries_per_round(); }
  bool requires_deterministic_oracle() const override { return true; }
  bool is_deterministic() const override { return false; }
  double regret_exponent() const override { return base_->regret_exponent(); }
  std::string describe() const override {
    return "fotzo_2p(delta=" + format_double(delta_) + "," + base_->describe() + ")";
  }

  void begin(std::int64_t T, const ConvexBody& body, double, RngStream rng) override {
    const double r = body.inner_radius();
    delta_ = cfg_.delta > 0.0 ? cfg_.delta : std::min(0.9 * r, 1.0 / double(T));
    if (delta_ >= r)
      throw std::invalid_argument("fotzo_2p: delta must be below the inner radius");
    k_ = body.affine_dim();
    body_ = body;
    base_->begin(T, body.shrink(delta_), k_ * lipschitz_, rng.split(0));
    sphere_rng_ = rng.split(1);
  }

  AgentPlay play(std::int64_t t) override {
    pending_.clear();
    half_ = false;
    return base_->play(t);
  }

  std::optional<Vec> next_query(std::int64_t t) override {
    if (half_) {
      half_ = false;
      return Vec(pending_.back().y - delta_ * pending_.back().v);
    }
    auto y = base_->next_query(t);
    if (!y) return std::nullopt;
    pending_.push_back({*y, body_->sample_sphere_L0(*sphere_rng_), 0.0});
    half_ = true;
    return Vec(*y + delta_ * pending_.back().v);
  }

  void observe(std::int64_t t, const Observation& obs) override {
    Pending& p = pending_.front();
    if (!p.have_plus) {
      p.plus = obs_scalar(obs);
      p.have_plus = true;
      return;
    }
    const Vec est = two_point_gradient_estimate(k_, delta_, p.plus, obs_scalar(obs), p.v);
    pending_.pop_front();
    base_->observe(t, est);
  }

  void end_round(std::int64_t t) override { base_->end_round(t); }

 private:
  struct Pending {
    Vec y, v;
    double plus = 0.0;
    bool have_plus = false;
  };
  std::unique_ptr<Agent> base_;
  double lipschitz_;
  SmoothingConfig cfg_;
  std::optional<ConvexBody> body_;
  std::optional<RngStream> sphere_rng_;
  std::deque<Pending> pending_;
  double delta_ = 0.0;
  int k_ = 0;
  bool half_ = false;
};

class SfttAgent final : public Agent {
 public:
  SfttAgent(std::unique_ptr<Agent> base, BlockConfig cfg) : base_(std::move(base)), cfg_(cfg) {
    const FeedbackClass fc = base_->feedback_class();
    if (fc != FeedbackClass::full_info_first && fc != FeedbackClass::full_info_zeroth)
      throw std::invalid_argument("sftt: base must be a full-information agent");
  }

  FeedbackClass feedback_class() const override {
    return base_->feedback_class() == FeedbackClass::full_info_first
               ? FeedbackClass::semi_bandit
               : FeedbackClass::bandit;
  }
  int queries_per_round() const override { return 1; }
  bool requires_deterministic_oracle() const override {
    return base_->requires_deterministic_oracle();  // responses pass through
  }
  bool is_deterministic() const override { return false; }
  double regret_exponent() const override { return 1.0 / (2.0 - base_->regret_exponent()); }
  std::string describe() const override {
    return "sftt(L=" + std::to_string(L_) + "," + base_->describe() + ")";
  }

  void begin(std::int64_t T, const ConvexBody& body, double obs_bound, RngStream rng) override {
    const int K = base_->queries_per_round();
    L_ = cfg_.block_length > 0 ? cfg_.block_length
                               : sftt_block_schedule(base_->regret_exponent(), T);
    L_ = std::max<std::int64_t>(L_, K + 1);
    if (L_ > T) throw std::invalid_argument("sftt: block length exceeds the horizon");
    blocks_ = T / L_;
    base_->begin(blocks_, body, obs_bound, rng.split(0));
    perm_rng_ = rng.split(1);
    slot_query_.assign(L_, -1);
  }

  AgentPlay play(std::int64_t t) override {
    const std::int64_t q = (t - 1) / L_ + 1;
    const std::int64_t pos = (t - 1) % L_;
    if (q > blocks_) {  // partial tail: replay the last action, discard feedback
      tail_ = true;
      return {xhat_, xhat_};
    }
    tail_ = false;
    if (pos == 0) start_block(q);
    const int qi = slot_query_[pos];
    current_ = qi >= 0 ? queries_[qi] : xhat_;
    emitted_ = false;
    return {current_, xhat_};
  }

  std::optional<Vec> next_query(std::int64_t) override {
    if (emitted_) return std::nullopt;
    emitted_ = true;
    return tail_ ? xhat_ : current_;
  }

  void observe(std::int64_t t, const Observation& obs) override {
    if (tail_) return;
    const std::int64_t pos = (t - 1) % L_;
    const int qi = slot_query_[pos];
    if (qi >= 0) responses_[qi] = obs;
  }

  void end_round(std::int64_t t) override {
    if (tail_) return;
    const std::int64_t q = (t - 1) / L_ + 1;
    if ((t - 1) % L_ == L_ - 1) {
      for (auto& r : responses_) base_->observe(q, r);
      base_->end_round(q);
    }
  }

  std::int64_t block_length() const { return L_; }

 private:
  void start_block(std::int64_t q) {
    const AgentPlay base_play = base_->play(q);
    xhat_ = base_play.played;
    queries_.clear();
    while (auto y = base_->next_query(q)) {
      queries_.push_back(*y);
      if (static_cast<int>(queries_.size()) > base_->queries_per_round())
        throw std::runtime_error("sftt: base exceeded its query budget");
    }
    responses_.assign(queries_.size(), Observation{});
    std::vector<int> slots(L_);
    std::iota(slots.begin(), slots.end(), 0);
    perm_rng_->shuffle(slots.begin(), slots.end());
    slot_query_.assign(L_, -1);
    for (std::size_t i = 0; i < queries_.size(); ++i) slot_query_[slots[i]] = static_cast<int>(i);
  }

  std::unique_ptr<Agent> base_;
  BlockConfig cfg_;
  std::optional<RngStream> perm_rng_;
  std::int64_t L_ = 0, blocks_ = 0;
  Vec xhat_, current_;
  std::vector<Vec> queries_;
  std::vector<Observation> responses_;
  std::vector<int> slot_query_;
  bool emitted_ = false, tail_ = false;
};

}  // namespace

std::unique_ptr<Agent> make_fotzo(std::unique_ptr<Agent> base, SmoothingConfig cfg) {
  return std::make_unique<FotzoAgent>(std::move(base), cfg);
}

std::unique_ptr<Agent> make_stb(std::unique_ptr<Agent> base, SmoothingConfig cfg) {
  return std::make_unique<StbAgent>(std::move(base), cfg);
}

std::unique_ptr<Agent> make_fotzo_2p(std::unique_ptr<Agent> base, double lipschitz_bound,
                                     SmoothingConfig cfg) {
  return std::make_unique<Fotzo2pAgent>(std::move(base), lipschitz_bound, cfg);
}

std::unique_ptr<Agent> make_sftt(std::unique_ptr<Agent> base, BlockConfig cfg) {
  return std::make_unique<SfttAgent>(std::move(base), cfg);
}

OtbResult otb(Agent& base, Adversary& adversary, std::int64_t T, const ConvexBody& body,
              std::uint64_t seed) {
  if (adversary.mode() != AdversaryMode::oblivious || !adversary.is_constant())
    throw std::invalid_argument("otb: a constant oblivious adversary is required");
  OtbResult res;
  res.transcript = run_game(base, adversary, T, body, seed);
  RngStream pick_rng = RngStream(seed).split(4);
  const std::int64_t pick = pick_rng.uniform_int(T);
  res.point = res.transcript.rounds[pick].played;
  res.value = res.transcript.rounds[pick].value;
  res.oracle_calls = res.transcript.total_queries();
  res.regret_exponent = base.regret_exponent();
  res.query_exponent = 0.0;  // every shipped agent uses a constant query count
  res.complexity_exponent =
      (1.0 + res.query_exponent) / (1.0 - res.regret_exponent);
  return res;
}

}  // namespace upco
