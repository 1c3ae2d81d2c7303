#include "upco/protocol.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace upco {

std::string to_string(FeedbackClass fc) {
  switch (fc) {
    case FeedbackClass::semi_bandit: return "semi_bandit";
    case FeedbackClass::bandit: return "bandit";
    case FeedbackClass::full_info_first: return "full_info_first";
    case FeedbackClass::full_info_zeroth: return "full_info_zeroth";
  }
  return "?";
}

namespace {

class ObliviousAdversary final : public Adversary {
 public:
  explicit ObliviousAdversary(std::vector<Realization> seq) : seq_(std::move(seq)) {
    if (seq_.empty()) throw std::invalid_argument("make_oblivious: empty sequence");
    order_ = seq_[0].oracle.order;
    for (const auto& r : seq_) {
      if (r.oracle.order != order_)
        throw std::invalid_argument("make_oblivious: mixed oracle orders");
      bound_ = std::max(bound_, r.oracle.bound);
      deterministic_ = deterministic_ && r.oracle.deterministic;
    }
    constant_ = true;
    for (const auto& r : seq_)
      if (r.objective != seq_[0].objective) constant_ = false;
  }
  AdversaryMode mode() const override { return AdversaryMode::oblivious; }
  std::int64_t horizon() const override { return static_cast<std::int64_t>(seq_.size()); }
  OracleOrder oracle_order() const override { return order_; }
  double oracle_bound() const override { return bound_; }
  bool oracle_deterministic() const override { return deterministic_; }
  bool is_constant() const override { return constant_; }
  Realization realize(std::int64_t t, const std::vector<Vec>&) override {
    if (t < 1 || t > horizon())
      throw std::out_of_range("oblivious adversary: round outside the pre-drawn sequence");
    return seq_[t - 1];
  }

 private:
  std::vector<Realization> seq_;
  OracleOrder order_ = OracleOrder::first;
  double bound_ = 0.0;
  bool deterministic_ = true;
  bool constant_ = false;
};

class FullyAdaptiveAdversary final : public Adversary {
 public:
  FullyAdaptiveAdversary(std::function<Realization(std::int64_t, const std::vector<Vec>&)> fn,
                         std::int64_t horizon, OracleOrder order, double bound)
      : fn_(std::move(fn)), horizon_(horizon), order_(order), bound_(bound) {}
  AdversaryMode mode() const override { return AdversaryMode::fully_adaptive; }
  std::int64_t horizon() const override { return horizon_; }
  OracleOrder oracle_order() const override { return order_; }
  double oracle_bound() const override { return bound_; }
  bool oracle_deterministic() const override { return true; }
  Realization realize(std::int64_t t, const std::vector<Vec>& hist) override {
    return fn_(t, hist);
  }

 private:
  std::function<Realization(std::int64_t, const std::vector<Vec>&)> fn_;
  std::int64_t horizon_;
  OracleOrder order_;
  double bound_;
};

}  // namespace

std::unique_ptr<Adversary> make_oblivious(std::vector<Realization> sequence) {
  return std::make_unique<ObliviousAdversary>(std::move(sequence));
}

std::unique_ptr<Adversary> make_fully_adaptive(
    std::function<Realization(std::int64_t, const std::vector<Vec>&)> fn, std::int64_t horizon,
    OracleOrder order, double bound) {
  return std::make_unique<FullyAdaptiveAdversary>(std::move(fn), horizon, order, bound);
}

std::int64_t GameTranscript::total_queries() const {
  std::int64_t n = 0;
  for (const auto& r : rounds) n += static_cast<std::int64_t>(r.queries.size());
  return n;
}

std::string GameTranscript::to_csv() const {
  std::ostringstream out;
  if (!header_note.empty()) {
    std::istringstream notes(header_note);
    std::string line;
    while (std::getline(notes, line)) out << "# " << line << "\n";
  }
  out << "t";
  for (int i = 0; i < dim; ++i) out << ",action_" << i;
  for (int i = 0; i < dim; ++i) out << ",played_" << i;
  out << ",query_count,value\n";
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    const RoundRecord& r = rounds[t];
    out << (t + 1);
    for (int i = 0; i < dim; ++i) out << "," << format_double(r.action[i]);
    for (int i = 0; i < dim; ++i) out << "," << format_double(r.played[i]);
    out << "," << r.queries.size() << "," << format_double(r.value) << "\n";
  }
  return out.str();
}

GameTranscript run_game(Agent& agent, Adversary& adversary, std::int64_t T,
                        const ConvexBody& body, std::uint64_t seed) {
  if (adversary.horizon() < T)
    throw std::invalid_argument("run_game: adversary horizon shorter than T");
  if (required_oracle_order(agent.feedback_class()) != adversary.oracle_order())
    throw std::invalid_argument("run_game: agent feedback class incompatible with oracle order");
  if (agent.requires_deterministic_oracle() && !adversary.oracle_deterministic())
    throw std::invalid_argument("run_game: agent requires a deterministic oracle");
  if (adversary.mode() == AdversaryMode::fully_adaptive &&
      (!adversary.oracle_deterministic() || !agent.is_deterministic()))
    throw std::invalid_argument(
        "run_game: fully adaptive adversaries are supported only with deterministic "
        "agents and oracles");

  const auto start = std::chrono::steady_clock::now();
  RngStream root(seed);
  RngStream agent_rng = root.split(kAgentStreamTag);
  RngStream oracle_rng = root.split(kOracleStreamTag);

  agent.begin(T, body, adversary.oracle_bound(), agent_rng);

  GameTranscript transcript;
  transcript.seed = seed;
  transcript.dim = body.dim();
  transcript.rounds.reserve(T);
  transcript.objectives.reserve(T);
  std::vector<Vec> history;
  history.reserve(T);

  const bool trivial = has_trivial_query(agent.feedback_class());
  for (std::int64_t t = 1; t <= T; ++t) {
    RoundRecord record;
    const AgentPlay play = agent.play(t);
    record.played = play.played;
    record.action = play.inner;
    if (!body.contains(record.played))
      throw std::runtime_error("run_game: action outside the domain at round " +
                               std::to_string(t));
    history.push_back(record.played);

    Realization real = adversary.realize(t, history);
    if (real.objective->dim != body.dim())
      throw std::invalid_argument("run_game: objective dimension mismatch");
    if (real.oracle.order != adversary.oracle_order())
      throw std::invalid_argument("run_game: oracle order changed mid-game");
    if (adversary.mode() == AdversaryMode::fully_adaptive && !real.oracle.deterministic)
      throw std::invalid_argument(
          "run_game: fully adaptive adversaries must use deterministic oracles");

    int k = 0;
    while (auto q = agent.next_query(t)) {
      if (++k > agent.queries_per_round())
        throw std::runtime_error("run_game: query budget exceeded at round " +
                                 std::to_string(t));
      if (trivial && (k > 1 || (*q - record.played).norm() != 0.0))
        throw std::runtime_error("run_game: trivial-query agent must query its action");
      if (!body.contains(*q))
        throw std::runtime_error("run_game: query outside the domain at round " +
                                 std::to_string(t));
      const Observation obs = real.oracle.sample(*q, oracle_rng);
      record.queries.push_back(*q);
      record.responses.push_back(obs);
      agent.observe(t, obs);
    }
    agent.end_round(t);
    record.value = real.objective->value(record.played);
    transcript.objectives.push_back(real.objective);
    transcript.rounds.push_back(std::move(record));
  }
  transcript.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return transcript;
}

}  // namespace upco
