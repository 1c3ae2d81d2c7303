#include <doctest.h>

#include <cmath>

#include "upco/base_algorithms.hpp"
#include "upco/objectives.hpp"

using namespace upco;

namespace {

ConvexBody unit_box2() { return ConvexBody::axis_box(Vec::Zero(2), Vec::Ones(2)); }

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

std::vector<Realization> constant_first_order(const ObjectivePtr& f, std::int64_t T) {
  std::vector<Realization> seq;
  const QueryOracle oracle = noisy_oracle(f, OracleOrder::first, 0.0);
  for (std::int64_t t = 0; t < T; ++t) seq.push_back({f, oracle});
  return seq;
}

// Rademacher sign sequence applied to a fixed linear objective.
std::vector<Realization> sign_flip_sequence(const Vec& h, std::int64_t T, std::uint64_t seed) {
  const ObjectivePtr plus = make_linear(h);
  const ObjectivePtr minus = make_linear(-h);
  const QueryOracle op = noisy_oracle(plus, OracleOrder::first, 0.0);
  const QueryOracle om = noisy_oracle(minus, OracleOrder::first, 0.0);
  RngStream rng = RngStream(seed).split(kAdversaryStreamTag);
  std::vector<Realization> seq;
  for (std::int64_t t = 0; t < T; ++t)
    seq.push_back(rng.uniform() < 0.5 ? Realization{plus, op} : Realization{minus, om});
  return seq;
}

}  // namespace

TEST_CASE("so_ip: member input is returned after one separation call") {
  const ConvexBody box = unit_box2();
  const Vec inside = v2(0.25, 0.8);
  const SoIpResult res = so_ip(box, 0.1, inside);
  CHECK((res.point - inside).norm() == doctest::Approx(0.0));
  CHECK(res.separation_calls == 1);
  CHECK(res.steps == 0);
}

TEST_CASE("so_ip: hand-simulated 1-d walk") {
  const ConvexBody box = ConvexBody::axis_box(Vec::Zero(1), Vec::Ones(1));
  Vec y0(1);
  y0 << 1.25;
  const SoIpResult res = so_ip(box, 0.1, y0);
  // 1.25 -> 1.15 -> 1.05 -> 0.95, then the membership check passes
  CHECK(res.point[0] == doctest::Approx(0.95));
  CHECK(res.steps == 3);
  CHECK(res.separation_calls == 4);

  CHECK_THROWS_AS(so_ip(box, 0.0, y0), std::invalid_argument);
  CHECK_THROWS_AS(so_ip(box, 0.5, y0), std::invalid_argument);
}

TEST_CASE("so_ip: feasibility, contraction and the iteration bound") {
  Mat A(1, 3);
  A << 1, 1, 1;
  Vec b(1);
  b << 1.5;
  const std::vector<ConvexBody> bodies = {unit_box2(), ConvexBody::budgeted_box(3, 1.4),
                                          ConvexBody::halfspace_polytope(A, b)};
  RngStream rng(101);
  for (const ConvexBody& body : bodies) {
    const double delta = 0.25 * body.inner_radius();
    const ConvexBody shrunk = body.shrink(delta);
    for (int trial = 0; trial < 100; ++trial) {
      Vec y0(body.dim());
      for (int i = 0; i < body.dim(); ++i) y0[i] = rng.uniform(-0.6, 1.9);
      const SoIpResult res = so_ip(body, delta, y0);
      CHECK(body.contains(res.point));
      for (int i = 0; i < 20; ++i) {
        const Vec z = shrunk.sample_member(rng);
        CHECK((res.point - z).norm() <= (y0 - z).norm() + 1e-9);
      }
      if (body.supports_euclid_project()) {
        const double d0 = (y0 - shrunk.euclid_project(y0)).norm();
        const double dp = (res.point - shrunk.euclid_project(res.point)).norm();
        CHECK(res.separation_calls <=
              (d0 * d0 - dp * dp) / (delta * delta) + 2.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("so_oga: zero step stays at the center") {
  const ConvexBody box = unit_box2();
  SoOgaParams params;
  params.eta = 0.0;
  auto agent = make_so_oga(params);
  auto adv = make_oblivious(constant_first_order(make_linear(v2(1.0, 0.5)), 64));
  const GameTranscript tr = run_game(*agent, *adv, 64, box, 2);
  for (const auto& r : tr.rounds) CHECK((r.played - box.center()).norm() == doctest::Approx(0.0));
}

TEST_CASE("so_oga: ascends a constant linear reward to near the optimum") {
  const ConvexBody box = unit_box2();
  const Vec h = v2(1.0, 0.5);
  const std::int64_t T = 1024;
  auto agent = make_so_oga();
  auto adv = make_oblivious(constant_first_order(make_linear(h), T));
  const GameTranscript tr = run_game(*agent, *adv, T, box, 3);
  for (const auto& r : tr.rounds) CHECK(box.contains(r.played));
  const double best = h.cwiseMax(0.0).sum();  // corner optimum of the box
  const double delta = so_oga_default_delta(T, box.inner_radius());
  const double slack =
      h.norm() * (delta * (1.0 + 2.0 * box.diameter() / box.inner_radius()) +
                  3.0 * box.diameter() / std::sqrt(double(T)));
  CHECK(tr.rounds.back().value >= best - slack);
}

TEST_CASE("so_oga: sign-flip static regret stays within the frozen envelope") {
  const ConvexBody box = unit_box2();
  const Vec h = v2(1.0, 0.7);
  const std::int64_t T = 4096;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto seq = sign_flip_sequence(h, T, seed);
    auto agent = make_so_oga();
    auto adv = make_oblivious(seq);
    const GameTranscript tr = run_game(*agent, *adv, T, box, seed);
    // best fixed point in the box for a signed linear sequence, in closed form
    Vec signed_sum = Vec::Zero(2);
    double earned = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
      signed_sum += tr.objectives[t]->grad(Vec::Zero(2));
      earned += tr.rounds[t].value;
    }
    const double comparator = signed_sum.cwiseMax(0.0).sum();
    worst = std::max(worst, comparator - earned);
  }
  CHECK(worst <= 3.0 * h.norm() * box.diameter() * std::sqrt(double(T)));
}

TEST_CASE("so_oga: translation invariance") {
  const ConvexBody small = ConvexBody::axis_box(v2(0.0, 0.0), v2(0.4, 0.4));
  const ConvexBody moved = ConvexBody::axis_box(v2(0.3, 0.3), v2(0.7, 0.7));
  const Vec tau = v2(0.3, 0.3);
  const std::int64_t T = 256;
  const auto seq = sign_flip_sequence(v2(0.9, -0.4), T, 7);
  auto a1 = make_so_oga();
  auto a2 = make_so_oga();
  auto adv1 = make_oblivious(seq);
  auto adv2 = make_oblivious(seq);
  const GameTranscript t1 = run_game(*a1, *adv1, T, small, 7);
  const GameTranscript t2 = run_game(*a2, *adv2, T, moved, 7);
  for (std::int64_t t = 0; t < T; ++t)
    CHECK((t2.rounds[t].played - t1.rounds[t].played - tau).norm() < 1e-9);
}

TEST_CASE("improved ader schedule: evaluated formulas") {
  const IaSchedule s = ia_schedule(10000, 1.0, 1.0);
  CHECK(s.etas.size() == 8);
  CHECK(s.etas[0] == doctest::Approx(0.0187083).epsilon(1e-4));
  CHECK(s.lambda == doctest::Approx(0.0141421).epsilon(1e-4));
  CHECK(s.initial_weights[0] == doctest::Approx(0.5625));
  double total = 0.0;
  for (double w : s.initial_weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < s.etas.size(); ++i) CHECK(s.etas[i] > s.etas[i - 1]);
}

TEST_CASE("improved ader: single expert degenerates to projected ascent") {
  const ConvexBody box = unit_box2();
  IaSchedule single;
  single.etas = {0.05};
  single.lambda = 0.3;
  single.initial_weights = {1.0};
  auto agent = make_improved_ader(single);
  const std::int64_t T = 128;
  const auto seq = sign_flip_sequence(v2(1.0, 0.6), T, 11);
  auto adv = make_oblivious(seq);
  const GameTranscript tr = run_game(*agent, *adv, T, box, 11);
  Vec x = box.center();
  for (std::int64_t t = 0; t < T; ++t) {
    CHECK((tr.rounds[t].played - x).norm() < 1e-12);
    x = box.euclid_project(x + 0.05 * tr.objectives[t]->grad(x));
  }
}

TEST_CASE("improved ader: weights stay on the simplex") {
  const ConvexBody box = unit_box2();
  auto agent = make_improved_ader();
  const std::int64_t T = 512;
  const auto seq = sign_flip_sequence(v2(1.0, 0.6), T, 13);

  // drive the agent manually to inspect the weights each round
  RngStream rng(13);
  agent->begin(T, box, 1.2, rng);
  for (std::int64_t t = 1; t <= T; ++t) {
    const AgentPlay play = agent->play(t);
    CHECK(box.contains(play.played));
    agent->next_query(t);
    agent->observe(t, seq[t - 1].objective->grad(play.played));
    agent->end_round(t);
    const auto w = agent->diagnostics().at("weights").get<std::vector<double>>();
    double total = 0.0;
    for (double wi : w) {
      CHECK(wi >= 0.0);
      total += wi;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("improved ader rejects bodies without projections") {
  Mat A(1, 2);
  A << 1, 1;
  Vec b(1);
  b << 1.2;
  const ConvexBody poly = ConvexBody::halfspace_polytope(A, b);
  auto agent = make_improved_ader();
  auto adv = make_oblivious(constant_first_order(make_linear(v2(1, 1)), 4));
  CHECK_THROWS_AS(run_game(*agent, *adv, 4, poly, 1), std::invalid_argument);
}

TEST_CASE("projected oga: fixed points and corner convergence") {
  const ConvexBody box = unit_box2();
  {
    auto agent = make_projected_oga();
    auto adv = make_oblivious(constant_first_order(make_linear(v2(0.0, 0.0)), 32));
    const GameTranscript tr = run_game(*agent, *adv, 32, box, 1);
    for (const auto& r : tr.rounds)
      CHECK((r.played - box.center()).norm() == doctest::Approx(0.0));
  }
  {
    auto agent = make_projected_oga();
    auto adv = make_oblivious(constant_first_order(make_linear(v2(1.0, 0.5)), 512));
    const GameTranscript tr = run_game(*agent, *adv, 512, box, 1);
    CHECK((tr.rounds.back().played - v2(1.0, 1.0)).norm() < 0.05);
  }
}

TEST_CASE("projected oga rejects bodies without projections") {
  Mat A(1, 2);
  A << 1, 1;
  Vec b(1);
  b << 1.2;
  const ConvexBody poly = ConvexBody::halfspace_polytope(A, b);
  auto agent = make_projected_oga();
  auto adv = make_oblivious(constant_first_order(make_linear(v2(1, 1)), 4));
  CHECK_THROWS_AS(run_game(*agent, *adv, 4, poly, 1), std::invalid_argument);
}

TEST_CASE("agent json construction") {
  CHECK(agent_from_json({{"algo", "so_oga"}, {"v", 0.5}})->feedback_class() ==
        FeedbackClass::semi_bandit);
  CHECK(agent_from_json({{"algo", "ia"}})->feedback_class() == FeedbackClass::semi_bandit);
  CHECK(agent_from_json({{"algo", "oga"}, {"eta0", 0.1}})->feedback_class() ==
        FeedbackClass::semi_bandit);
  CHECK_THROWS(agent_from_json({{"algo", "newton"}}));
}
