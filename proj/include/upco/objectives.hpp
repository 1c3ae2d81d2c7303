#pragma once

#include <json.hpp>

#include <functional>
#include <memory>
#include <variant>

#include "upco/common.hpp"

namespace upco {

// An up-concave test function with its declared class parameters. value/grad
// are exact; grad is an up-super-gradient (the gradient wherever f is
// differentiable). Immutable and shareable across games.
struct ObjectiveSpec {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  double gamma = 1.0;      // weak up-concavity parameter, in (0, 1]
  double mu = 0.0;         // strong up-concavity parameter
  double curvature = 1.0;  // c_f in [0, 1], meaningful for monotone functions
  bool monotone = false;
  bool nonneg = false;
  double M0 = 0.0;  // value bound
  double M1 = 0.0;  // Lipschitz constant (Euclidean)
};

using ObjectivePtr = std::shared_ptr<const ObjectiveSpec>;

enum class OracleOrder { zeroth, first };

using Observation = std::variant<double, Vec>;

inline double obs_scalar(const Observation& o) { return std::get<double>(o); }
inline const Vec& obs_vector(const Observation& o) { return std::get<Vec>(o); }

struct QueryOracle {
  OracleOrder order = OracleOrder::first;
  bool deterministic = true;
  double bound = 0.0;  // B0 for zeroth order, B1 for first order
  std::function<Observation(const Vec&, RngStream&)> sample;
};

// f(x) = 1/2 x^T H x + h^T x + offset with H symmetric and H_ij <= 0; the
// canonical DR-submodular family (gradient antitone with gamma = 1).
// auto_offset raises the offset so the box minimum is nonnegative.
ObjectivePtr make_dr_quadratic(const Mat& H, const Vec& h, double offset,
                               bool auto_offset = false);

// f(x) = sum_i a_i (1 - exp(-x_i)), a >= 0.
ObjectivePtr make_coverage_like(const Vec& a);

inline ObjectivePtr make_linear(const Vec& h) {
  return make_dr_quadratic(Mat::Zero(h.size(), h.size()), h, 0.0);
}

// Exact value/gradient plus an independent uniform draw from the radius-sigma
// ball (interval for zeroth order). Deterministic iff sigma == 0.
QueryOracle noisy_oracle(ObjectivePtr spec, OracleOrder order, double sigma);

// Which boosted surrogate F the quadrature targets.
struct BoostSetting {
  static BoostSetting mono_zero(double gamma) { return {true, gamma, Vec()}; }
  static BoostSetting nonmono(Vec x_under) { return {false, 0.0, std::move(x_under)}; }
  bool is_mono_zero = true;
  double gamma = 1.0;
  Vec x_under;
};

// grad F(x) by Gauss-Legendre quadrature of the rescaled-gradient integral.
// This is the test oracle the Monte-Carlo estimators are checked against.
Vec boosted_surrogate_grad(const ObjectiveSpec& spec, const BoostSetting& setting,
                           const Vec& x, int n_quad = 64);

ObjectivePtr objective_from_json(const nlohmann::json& j);

}  // namespace upco
