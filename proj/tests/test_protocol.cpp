#include <doctest.h>

#include "upco/objectives.hpp"
#include "upco/protocol.hpp"

using namespace upco;

namespace {

ConvexBody unit_box2() { return ConvexBody::axis_box(Vec::Zero(2), Vec::Ones(2)); }

class ConstantAgent final : public TrivialQueryAgent {
 public:
  explicit ConstantAgent(Vec point, FeedbackClass fc = FeedbackClass::semi_bandit)
      : point_(std::move(point)), fc_(fc) {}
  FeedbackClass feedback_class() const override { return fc_; }
  void begin(std::int64_t, const ConvexBody&, double, RngStream) override { observed_.clear(); }
  const std::vector<Observation>& observed() const { return observed_; }

 protected:
  Vec compute_action(std::int64_t) override { return point_; }
  void handle_observation(std::int64_t, const Observation& obs) override {
    observed_.push_back(obs);
  }

 private:
  Vec point_;
  FeedbackClass fc_;
  std::vector<Observation> observed_;
};

class EscapingAgent final : public TrivialQueryAgent {
 public:
  FeedbackClass feedback_class() const override { return FeedbackClass::semi_bandit; }
  void begin(std::int64_t, const ConvexBody&, double, RngStream) override {}

 protected:
  Vec compute_action(std::int64_t t) override {
    Vec x = Vec::Zero(2);
    if (t >= 3) x[0] = 2.0;  // leaves the domain at round 3
    return x;
  }
  void handle_observation(std::int64_t, const Observation&) override {}
};

std::vector<Realization> constant_sequence(const ObjectivePtr& f, OracleOrder order,
                                           double sigma, std::int64_t T) {
  std::vector<Realization> seq;
  const QueryOracle oracle = noisy_oracle(f, order, sigma);
  for (std::int64_t t = 0; t < T; ++t) seq.push_back({f, oracle});
  return seq;
}

}  // namespace

TEST_CASE("constant agent against a constant linear objective") {
  const ConvexBody body = unit_box2();
  Vec h(2);
  h << 2.0, -1.0;
  const ObjectivePtr f = make_linear(h);
  Vec point(2);
  point << 0.25, 0.75;
  ConstantAgent agent(point);
  auto adv = make_oblivious(constant_sequence(f, OracleOrder::first, 0.0, 16));
  const GameTranscript tr = run_game(agent, *adv, 16, body, 1);
  REQUIRE(tr.rounds.size() == 16);
  for (const auto& r : tr.rounds) {
    CHECK(r.value == doctest::Approx(h.dot(point)));
    CHECK(r.queries.size() == 1);
    CHECK((r.queries[0] - point).norm() == 0.0);
  }
  CHECK(tr.total_queries() == 16);
  // semi-bandit feedback carries gradients, never function values
  for (const auto& obs : agent.observed()) CHECK(std::holds_alternative<Vec>(obs));
}

TEST_CASE("identical seeds give byte-identical transcripts") {
  const ConvexBody body = unit_box2();
  const ObjectivePtr f = make_coverage_like(Vec::Ones(2));
  Vec point(2);
  point << 0.5, 0.25;
  std::string csv[2];
  for (int rep = 0; rep < 2; ++rep) {
    ConstantAgent agent(point, FeedbackClass::bandit);
    auto adv = make_oblivious(constant_sequence(f, OracleOrder::zeroth, 0.3, 32));
    csv[rep] = run_game(agent, *adv, 32, body, 99).to_csv();
  }
  CHECK(csv[0] == csv[1]);
  CHECK(!csv[0].empty());
}

TEST_CASE("fully adaptive adversaries pair with deterministic agents only") {
  const ConvexBody body = unit_box2();
  auto realize = [](std::int64_t, const std::vector<Vec>& hist) -> Realization {
    // reward aligned with the latest action
    Vec h = hist.back() + 0.1 * Vec::Ones(2);
    const ObjectivePtr f = make_linear(h);
    return {f, noisy_oracle(f, OracleOrder::first, 0.0)};
  };
  auto adaptive = make_fully_adaptive(realize, 8, OracleOrder::first, 3.0);
  Vec point(2);
  point << 0.5, 0.5;
  ConstantAgent agent(point);
  const GameTranscript tr = run_game(agent, *adaptive, 8, body, 5);
  CHECK(tr.rounds.size() == 8);
  CHECK(tr.rounds[0].value == doctest::Approx((point + 0.1 * Vec::Ones(2)).dot(point)));

  auto noisy_realize = [](std::int64_t, const std::vector<Vec>& hist) -> Realization {
    const ObjectivePtr f = make_linear(hist.back());
    return {f, noisy_oracle(f, OracleOrder::first, 0.5)};
  };
  auto bad = make_fully_adaptive(noisy_realize, 8, OracleOrder::first, 3.0);
  ConstantAgent agent2(point);
  CHECK_THROWS_AS(run_game(agent2, *bad, 8, body, 5), std::invalid_argument);
}

TEST_CASE("oblivious adversaries ignore the action history") {
  const ObjectivePtr f1 = make_linear(Vec::Ones(2));
  const ObjectivePtr f2 = make_linear(-Vec::Ones(2));
  std::vector<Realization> seq = {{f1, noisy_oracle(f1, OracleOrder::first, 0.0)},
                                  {f2, noisy_oracle(f2, OracleOrder::first, 0.0)}};
  auto adv = make_oblivious(seq);
  CHECK(adv->mode() == AdversaryMode::oblivious);
  const std::vector<Vec> hist_a = {Vec::Zero(2)};
  const std::vector<Vec> hist_b = {Vec::Ones(2)};
  CHECK(adv->realize(2, hist_a).objective.get() == f2.get());
  CHECK(adv->realize(2, hist_b).objective.get() == f2.get());
  CHECK_FALSE(adv->is_constant());

  auto constant = make_oblivious(constant_sequence(f1, OracleOrder::first, 0.0, 4));
  CHECK(constant->is_constant());
  CHECK_THROWS_AS(make_oblivious({}), std::invalid_argument);
}

TEST_CASE("horizon, order and domain violations are rejected") {
  const ConvexBody body = unit_box2();
  const ObjectivePtr f = make_linear(Vec::Ones(2));
  Vec point(2);
  point << 0.5, 0.5;

  {  // sequence shorter than T
    ConstantAgent agent(point);
    auto adv = make_oblivious(constant_sequence(f, OracleOrder::first, 0.0, 4));
    CHECK_THROWS_AS(run_game(agent, *adv, 8, body, 1), std::invalid_argument);
  }
  {  // zeroth-order oracle for a semi-bandit agent
    ConstantAgent agent(point);
    auto adv = make_oblivious(constant_sequence(f, OracleOrder::zeroth, 0.0, 8));
    CHECK_THROWS_AS(run_game(agent, *adv, 8, body, 1), std::invalid_argument);
  }
  {  // leaving the domain is fatal and reports the round
    EscapingAgent agent;
    auto adv = make_oblivious(constant_sequence(f, OracleOrder::first, 0.0, 8));
    try {
      run_game(agent, *adv, 8, body, 1);
      FAIL("expected a domain violation");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("round 3") != std::string::npos);
    }
  }
}
