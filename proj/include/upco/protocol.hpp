#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "upco/geometry.hpp"
#include "upco/objectives.hpp"

namespace upco {

enum class FeedbackClass { semi_bandit, bandit, full_info_first, full_info_zeroth };

inline OracleOrder required_oracle_order(FeedbackClass fc) {
  return (fc == FeedbackClass::semi_bandit || fc == FeedbackClass::full_info_first)
             ? OracleOrder::first
             : OracleOrder::zeroth;
}

inline bool has_trivial_query(FeedbackClass fc) {
  return fc == FeedbackClass::semi_bandit || fc == FeedbackClass::bandit;
}

std::string to_string(FeedbackClass fc);

struct AgentPlay {
  Vec played;  // the point the adversary evaluates
  Vec inner;   // pre-map action of the wrapped algorithm (== played for bases)
};

// Action/query state machine. One game drives one agent strictly in the order
// play -> next_query/observe (queries answered in emission order) -> end_round.
// Query points never depend on observations of the current round.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual FeedbackClass feedback_class() const = 0;
  virtual int queries_per_round() const = 0;  // K, constant per agent
  virtual bool requires_deterministic_oracle() const { return false; }
  virtual bool is_deterministic() const { return true; }
  // Declared regret exponent eta (regret = O(T^eta)); drives wrapper schedules.
  virtual double regret_exponent() const { return 0.5; }
  // One-line description with resolved parameters (delta, L, ...); goes into
  // transcript headers.
  virtual std::string describe() const { return "agent"; }
  // Implementation-specific state (expert weights, ...), for tests and reports.
  virtual nlohmann::json diagnostics() const { return nlohmann::json::object(); }
  virtual void begin(std::int64_t horizon, const ConvexBody& body, double obs_bound,
                     RngStream rng) = 0;
  virtual AgentPlay play(std::int64_t t) = 0;
  virtual std::optional<Vec> next_query(std::int64_t t) = 0;
  virtual void observe(std::int64_t t, const Observation& obs) = 0;
  virtual void end_round(std::int64_t /*t*/) {}
};

// Helper base for agents with the trivial query policy (semi-bandit/bandit):
// exactly one query per round, at the played point.
class TrivialQueryAgent : public Agent {
 public:
  int queries_per_round() const final { return 1; }
  AgentPlay play(std::int64_t t) final {
    current_ = compute_action(t);
    emitted_ = false;
    return {current_, current_};
  }
  std::optional<Vec> next_query(std::int64_t) final {
    if (emitted_) return std::nullopt;
    emitted_ = true;
    return current_;
  }
  void observe(std::int64_t t, const Observation& obs) final { handle_observation(t, obs); }

 protected:
  virtual Vec compute_action(std::int64_t t) = 0;
  virtual void handle_observation(std::int64_t t, const Observation& obs) = 0;
  const Vec& current_action() const { return current_; }

 private:
  Vec current_;
  bool emitted_ = false;
};

enum class AdversaryMode { oblivious, fully_adaptive };

struct Realization {
  ObjectivePtr objective;
  QueryOracle oracle;
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual AdversaryMode mode() const = 0;
  virtual std::int64_t horizon() const = 0;
  virtual OracleOrder oracle_order() const = 0;
  virtual double oracle_bound() const = 0;
  virtual bool oracle_deterministic() const = 0;
  // Oblivious adversaries ignore the action history.
  virtual Realization realize(std::int64_t t, const std::vector<Vec>& action_history) = 0;
  virtual bool is_constant() const { return false; }
};

// Pre-drawn sequence (f_1..f_T, Q_1..Q_T).
std::unique_ptr<Adversary> make_oblivious(std::vector<Realization> sequence);

std::unique_ptr<Adversary> make_fully_adaptive(
    std::function<Realization(std::int64_t, const std::vector<Vec>&)> fn, std::int64_t horizon,
    OracleOrder order, double bound);

struct RoundRecord {
  Vec action;  // pre-map
  Vec played;
  std::vector<Vec> queries;
  std::vector<Observation> responses;
  double value = 0.0;  // true f_t at the played point
};

struct GameTranscript {
  std::uint64_t seed = 0;
  int dim = 0;
  std::string header_note;  // wrapper parameters, config hash; emitted as comments
  std::vector<RoundRecord> rounds;
  std::vector<ObjectivePtr> objectives;  // realized f_t, for regret evaluation
  double wall_seconds = 0.0;

  std::int64_t total_queries() const;
  std::string to_csv() const;  // byte-identical for identical seeds
};

// Executes T rounds of the repeated game. The seed is split deterministically
// into agent and oracle streams; oblivious adversaries pre-draw from their own
// stream at construction time.
GameTranscript run_game(Agent& agent, Adversary& adversary, std::int64_t T,
                        const ConvexBody& body, std::uint64_t seed);

// Stream tags for deriving the per-game substreams from one seed.
inline constexpr std::uint64_t kAgentStreamTag = 1;
inline constexpr std::uint64_t kAdversaryStreamTag = 2;
inline constexpr std::uint64_t kOracleStreamTag = 3;

}  // namespace upco
