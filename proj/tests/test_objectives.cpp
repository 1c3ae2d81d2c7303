#include <doctest.h>

#include <cmath>

#include "upco/objectives.hpp"
#include "upco/quadratize.hpp"

using namespace upco;

namespace {

Vec vec3(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return x;
}

ObjectivePtr mono_quadratic3() {
  Mat H(3, 3);
  H << -0.4, -0.2, 0.0, -0.2, -0.3, -0.1, 0.0, -0.1, -0.5;
  return make_dr_quadratic(H, vec3(1.0, 0.9, 0.8), 0.0);
}

ObjectivePtr nonmono_quadratic2() {
  Mat H(2, 2);
  H << -1.0, -0.3, -0.3, -0.8;
  Vec h(2);
  h << 0.6, 0.5;
  return make_dr_quadratic(H, h, 0.0, /*auto_offset=*/true);
}

// x <= y componentwise, uniform in [0,1]^d
std::pair<Vec, Vec> ordered_pair(int d, RngStream& rng) {
  Vec x(d), y(d);
  for (int i = 0; i < d; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    x[i] = std::min(a, b);
    y[i] = std::max(a, b);
  }
  return {x, y};
}

}  // namespace

TEST_CASE("dr quadratic: monotonicity flag and curvature") {
  // linear => modular: curvature 0
  const ObjectivePtr lin = make_dr_quadratic(Mat::Zero(2, 2), Vec::Ones(2), 0.0);
  CHECK(lin->monotone);
  CHECK(lin->curvature == doctest::Approx(0.0));
  CHECK(lin->value(Vec::Ones(2)) == doctest::Approx(2.0));

  Mat H(2, 2);
  H << 0, -1, -1, 0;
  const ObjectivePtr full = make_dr_quadratic(H, Vec::Ones(2), 0.0);
  CHECK(full->monotone);  // gradient at 1 is exactly 0
  CHECK(full->curvature == doctest::Approx(1.0));

  const ObjectivePtr half = make_dr_quadratic(-0.5 * Mat::Identity(2, 2), Vec::Ones(2), 0.0);
  CHECK(half->curvature == doctest::Approx(0.5));

  Mat bad(2, 2);
  bad << 0.1, 0, 0, 0;
  CHECK_THROWS_AS(make_dr_quadratic(bad, Vec::Ones(2), 0.0), std::invalid_argument);
}

TEST_CASE("declared bounds hold on samples") {
  const std::vector<ObjectivePtr> specs = {mono_quadratic3(), nonmono_quadratic2(),
                                           make_coverage_like(vec3(1.0, 0.8, 0.5))};
  RngStream rng(41);
  for (const auto& spec : specs) {
    for (int i = 0; i < 10000; ++i) {
      Vec x(spec->dim);
      for (int j = 0; j < spec->dim; ++j) x[j] = rng.uniform();
      if (spec->nonneg) CHECK(spec->value(x) >= -1e-9);
      if (spec->monotone) CHECK(spec->grad(x).minCoeff() >= -1e-9);
      CHECK(spec->grad(x).norm() <= spec->M1 + 1e-9);
      CHECK(std::abs(spec->value(x)) <= spec->M0 + 1e-9);
    }
  }
}

TEST_CASE("coverage-like values and parameters") {
  const ObjectivePtr one = make_coverage_like(Vec::Ones(1));
  CHECK(one->value(Vec::Zero(1)) == doctest::Approx(0.0));
  CHECK(one->value(Vec::Ones(1)) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(one->grad(Vec::Zero(1))[0] == doctest::Approx(1.0));
  CHECK(one->grad(Vec::Ones(1))[0] == doctest::Approx(std::exp(-1.0)));
  CHECK(one->curvature == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(one->monotone);
  CHECK(one->nonneg);

  Vec neg(1);
  neg << -0.5;
  CHECK_THROWS_AS(make_coverage_like(neg), std::invalid_argument);
}

TEST_CASE("noisy oracle: exactness at sigma 0, CLT mean, bound") {
  const ObjectivePtr spec = mono_quadratic3();
  RngStream rng(43);
  const Vec x = vec3(0.3, 0.6, 0.2);

  const QueryOracle exact = noisy_oracle(spec, OracleOrder::first, 0.0);
  CHECK(exact.deterministic);
  CHECK((obs_vector(exact.sample(x, rng)) - spec->grad(x)).norm() == doctest::Approx(0.0));

  const QueryOracle noisy0 = noisy_oracle(spec, OracleOrder::zeroth, 0.1);
  CHECK_FALSE(noisy0.deterministic);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += obs_scalar(noisy0.sample(x, rng));
  mean /= n;
  // uniform-interval variance sigma^2/3
  const double tol = 3.0 * (0.1 / std::sqrt(3.0)) / std::sqrt(double(n));
  CHECK(std::abs(mean - spec->value(x)) < tol);

  const QueryOracle noisy1 = noisy_oracle(spec, OracleOrder::first, 0.1);
  CHECK(noisy1.bound == doctest::Approx(spec->M1 + 0.1));
  Vec gmean = Vec::Zero(3);
  const int m = 100000;
  for (int i = 0; i < m; ++i) {
    const Vec g = obs_vector(noisy1.sample(x, rng));
    CHECK(g.norm() <= spec->M1 + 0.1 + 1e-12);
    gmean += g;
  }
  gmean /= m;
  // ball noise is centered; 3 sigma with per-coordinate variance <= sigma^2
  CHECK((gmean - spec->grad(x)).norm() < 3.0 * 0.1 / std::sqrt(double(m)) * 3.0);
}

TEST_CASE("boosted surrogate gradient: linear case and degenerate point") {
  const Vec h = vec3(0.7, 0.2, 1.0);
  const ObjectivePtr lin = make_linear(h);
  // the density integrates to 1, so a constant gradient passes through
  for (const double g : {0.3, 0.5, 1.0}) {
    const Vec gf = boosted_surrogate_grad(*lin, BoostSetting::mono_zero(g), vec3(0.2, 0.9, 0.4));
    CHECK((gf - h).norm() < 1e-12);
  }
  const Vec xu = vec3(0.1, 0.0, 0.3);
  const Vec gn = boosted_surrogate_grad(*lin, BoostSetting::nonmono(xu), vec3(0.5, 0.5, 0.5));
  CHECK((gn - h).norm() < 1e-12);

  // at x = x_under every query point collapses to x_under
  const ObjectivePtr quad = mono_quadratic3();
  const Vec g0 = boosted_surrogate_grad(*quad, BoostSetting::nonmono(xu), xu);
  CHECK((g0 - quad->grad(xu)).norm() < 1e-12);

  CHECK_THROWS_AS(boosted_surrogate_grad(*lin, BoostSetting::mono_zero(1.0), h, 8),
                  std::invalid_argument);
}

TEST_CASE("boosted surrogate gradient agrees with Monte Carlo on a curved objective") {
  // f(x) = x - x^2/2 on [0,1]
  Mat H(1, 1);
  H << -1.0;
  const ObjectivePtr f = make_dr_quadratic(H, Vec::Ones(1), 0.0);
  const Vec x = 0.5 * Vec::Ones(1);
  const Vec qf = boosted_surrogate_grad(*f, BoostSetting::mono_zero(1.0), x);

  RngStream rng(47);
  const int n = 1000000;
  double mc = 0.0, mc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = bqm0_inverse_cdf(1.0, rng.uniform());
    const double g = f->grad(z * x)[0];
    mc += g;
    mc2 += g * g;
  }
  mc /= n;
  const double se = std::sqrt((mc2 / n - mc * mc) / n);
  CHECK(std::abs(qf[0] - mc) < 3.0 * se);
}

TEST_CASE("lemma inequality: monotone general setting") {
  const std::vector<ObjectivePtr> specs = {mono_quadratic3(),
                                           make_coverage_like(vec3(1.0, 0.8, 0.5))};
  RngStream rng(53);
  for (const auto& f : specs) {
    REQUIRE(f->monotone);
    REQUIRE(f->nonneg);
    const double g = f->gamma, c = f->curvature, mu = f->mu;
    const double alpha = g * g / (1.0 + c * g * g);
    const double beta = g / (1.0 + c * g * g);
    for (int i = 0; i < 10000; ++i) {
      Vec x(f->dim), y(f->dim);
      for (int j = 0; j < f->dim; ++j) {
        x[j] = rng.uniform();
        y[j] = rng.uniform();
      }
      const double lhs = alpha * f->value(y) - f->value(x);
      const double rhs =
          beta * (f->grad(x).dot(y - x) - 0.5 * mu * (y - x).squaredNorm());
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}

TEST_CASE("lemma inequality: monotone origin setting via the quadrature surrogate") {
  const std::vector<ObjectivePtr> specs = {mono_quadratic3(),
                                           make_coverage_like(vec3(1.0, 0.8, 0.5))};
  RngStream rng(59);
  for (const auto& f : specs) {
    const double g = f->gamma;
    const double a = 1.0 - std::exp(-g);
    for (int i = 0; i < 1000; ++i) {
      Vec x(f->dim), y(f->dim);
      for (int j = 0; j < f->dim; ++j) {
        x[j] = rng.uniform();
        y[j] = rng.uniform();
      }
      const Vec gF = boosted_surrogate_grad(*f, BoostSetting::mono_zero(g), x);
      CHECK(a * f->value(y) - f->value(x) <= (a / g) * gF.dot(y - x) + 1e-6);
    }
  }
}

TEST_CASE("lemma inequality: non-monotone setting via the quadrature surrogate") {
  const std::vector<ObjectivePtr> specs = {nonmono_quadratic2(),
                                           make_coverage_like(Vec::Ones(2))};
  RngStream rng(61);
  for (const auto& f : specs) {
    REQUIRE(f->nonneg);
    Vec xu(2);
    xu << 0.1, 0.0;
    const double h = xu.cwiseAbs().maxCoeff();
    for (int i = 0; i < 1000; ++i) {
      Vec x(2), y(2);
      for (int j = 0; j < 2; ++j) {
        x[j] = rng.uniform();
        y[j] = rng.uniform();
      }
      const Vec gF = boosted_surrogate_grad(*f, BoostSetting::nonmono(xu), x);
      const double lhs = 0.25 * (1.0 - h) * f->value(y) - f->value(0.5 * (x + xu));
      CHECK(lhs <= (3.0 / 8.0) * gF.dot(y - x) + 1e-6);
    }
  }
}

TEST_CASE("join lemma for nonneg up-concave functions") {
  const std::vector<ObjectivePtr> specs = {nonmono_quadratic2(), make_coverage_like(Vec::Ones(2)),
                                           mono_quadratic3()};
  RngStream rng(67);
  for (const auto& f : specs) {
    for (int i = 0; i < 10000; ++i) {
      Vec x(f->dim), y(f->dim);
      for (int j = 0; j < f->dim; ++j) {
        x[j] = rng.uniform();
        y[j] = rng.uniform();
      }
      const Vec join = x.cwiseMax(y);
      CHECK(f->value(join) >=
            (1.0 - f->gamma * x.cwiseAbs().maxCoeff()) * f->value(y) - 1e-9);
    }
  }
}

TEST_CASE("up-concavity along positive directions") {
  const std::vector<ObjectivePtr> specs = {mono_quadratic3(), nonmono_quadratic2(),
                                           make_coverage_like(vec3(0.5, 1.0, 0.7))};
  RngStream rng(71);
  for (const auto& f : specs) {
    for (int i = 0; i < 10000; ++i) {
      auto [x, y] = ordered_pair(f->dim, rng);
      const double rhs =
          (f->grad(x).dot(y - x) - 0.5 * f->mu * (y - x).squaredNorm()) / f->gamma;
      CHECK(f->value(y) - f->value(x) <= rhs + 1e-9);
    }
  }
}

TEST_CASE("objective json mirrors the constructors") {
  const nlohmann::json jq = {{"kind", "dr_quadratic"},
                             {"H", {{-0.5, 0.0}, {0.0, -0.5}}},
                             {"h", {1.0, 1.0}},
                             {"offset", 0.0}};
  const ObjectivePtr q = objective_from_json(jq);
  CHECK(q->curvature == doctest::Approx(0.5));

  const nlohmann::json jc = {{"kind", "coverage"}, {"a", {1.0, 0.8}}};
  CHECK(objective_from_json(jc)->monotone);

  CHECK_THROWS(objective_from_json(nlohmann::json{{"kind", "mystery"}}));
}
