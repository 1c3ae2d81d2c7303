#include "upco/base_algorithms.hpp"

#include <cmath>
#include <stdexcept>

namespace upco {

SoIpResult so_ip(const ConvexBody& body, double delta, const Vec& y0) {
  if (!(delta > 0.0) || delta >= body.inner_radius())
    throw std::invalid_argument("so_ip: need 0 < delta < inner_radius");
  const double D = body.diameter();
  const Vec& c = body.center();
  Vec y = body.affine_project(y0);
  const double dist_c = (y - c).norm();
  if (dist_c > D) y = c + (y - c) * (D / dist_c);

  SoIpResult res;
  const int max_calls = static_cast<int>(std::ceil(D * D / (delta * delta))) + 2;
  while (true) {
    ++res.separation_calls;
    if (res.separation_calls > max_calls)
      throw std::runtime_error(
          "so_ip: separation-call budget exceeded (" + std::to_string(max_calls) +
          "); the separation oracle violates its contract");
    const SeparationResult sep = body.separate(y);
    if (sep.inside) {
      res.point = y;
      return res;
    }
    Vec g = body.affine_basis() * (body.affine_basis().transpose() * sep.hyperplane);
    const double gn = g.norm();
    if (gn < 1e-12)
      throw std::runtime_error("so_ip: separator orthogonal to the affine hull");
    y -= delta * g / gn;
    ++res.steps;
  }
}

double so_oga_default_delta(std::int64_t T, double r) {
  return std::min(0.4 * r, 1.0 / std::sqrt(double(T)));
}

namespace {

class SoOgaAgent final : public TrivialQueryAgent {
 public:
  explicit SoOgaAgent(SoOgaParams params) : params_(params) {}

  FeedbackClass feedback_class() const override { return FeedbackClass::semi_bandit; }
  double regret_exponent() const override { return 0.5; }
  std::string describe() const override {
    return "so_oga(delta=" + format_double(delta_) + ",eta=" + format_double(eta_) + ")";
  }

  void begin(std::int64_t T, const ConvexBody& body, double obs_bound, RngStream) override {
    body_ = body;
    const double r = body.inner_radius();
    delta_ = params_.delta.value_or(
        params_.v > 0.0 ? params_.v / std::sqrt(double(T)) : so_oga_default_delta(T, r));
    if (!(delta_ > 0.0) || delta_ >= r || delta_ >= 1.0)
      throw std::invalid_argument("so_oga: delta = v T^{-1/2} must lie in (0,1) and below r");
    // eta = (v r / 2 M1) T^{-1/2} = delta r / (2 M1)
    eta_ = params_.eta.value_or(obs_bound > 0.0 ? delta_ * r / (2.0 * obs_bound) : 0.0);
    x_ = body.center();
  }

 protected:
  Vec compute_action(std::int64_t) override { return x_; }
  void handle_observation(std::int64_t, const Observation& obs) override {
    if (eta_ == 0.0) return;
    x_ = so_ip(*body_, delta_, x_ + eta_ * obs_vector(obs)).point;
  }

 private:
  SoOgaParams params_;
  std::optional<ConvexBody> body_;
  double delta_ = 0.0, eta_ = 0.0;
  Vec x_;
};

class ImprovedAderAgent final : public TrivialQueryAgent {
 public:
  explicit ImprovedAderAgent(std::optional<IaSchedule> schedule)
      : schedule_override_(std::move(schedule)) {}
  FeedbackClass feedback_class() const override { return FeedbackClass::semi_bandit; }
  double regret_exponent() const override { return 0.5; }
  std::string describe() const override {
    return "ia(experts=" + std::to_string(sched_.etas.size()) +
           ",lambda=" + format_double(sched_.lambda) + ")";
  }
  nlohmann::json diagnostics() const override {
    return {{"weights", std::vector<double>(weights_.data(), weights_.data() + weights_.size())}};
  }

  void begin(std::int64_t T, const ConvexBody& body, double obs_bound, RngStream) override {
    if (!body.supports_euclid_project())
      throw std::invalid_argument("improved_ader: body kind does not support projection");
    body_ = body;
    sched_ = schedule_override_ ? *schedule_override_
                                : ia_schedule(T, body.diameter(), obs_bound);
    weights_ = Eigen::Map<const Vec>(sched_.initial_weights.data(),
                                     sched_.initial_weights.size());
    experts_.assign(sched_.etas.size(), body.center());
  }

 protected:
  Vec compute_action(std::int64_t) override {
    Vec x = Vec::Zero(body_->dim());
    for (std::size_t i = 0; i < experts_.size(); ++i) x += weights_[i] * experts_[i];
    x_play_ = x;
    return x;
  }

  void handle_observation(std::int64_t, const Observation& obs) override {
    const Vec& g = obs_vector(obs);
    // Linearized surrogate reward l_t(y) = <o_t, y - x_t>; experts with larger
    // reward gain weight (reward-form Hedge).
    Vec l(experts_.size());
    for (std::size_t i = 0; i < experts_.size(); ++i) l[i] = g.dot(experts_[i] - x_play_);
    const Vec scaled = sched_.lambda * l;
    const Vec w = weights_.array() * (scaled.array() - scaled.maxCoeff()).exp();
    weights_ = w / w.sum();
    for (std::size_t i = 0; i < experts_.size(); ++i)
      experts_[i] = body_->euclid_project(experts_[i] + sched_.etas[i] * g);
  }

 private:
  std::optional<IaSchedule> schedule_override_;
  std::optional<ConvexBody> body_;
  IaSchedule sched_;
  Vec weights_;
  std::vector<Vec> experts_;
  Vec x_play_;
};

class ProjectedOgaAgent final : public TrivialQueryAgent {
 public:
  explicit ProjectedOgaAgent(ProjectedOgaParams params) : params_(params) {}
  FeedbackClass feedback_class() const override { return FeedbackClass::semi_bandit; }
  double regret_exponent() const override { return 0.5; }
  std::string describe() const override { return "oga(eta0=" + format_double(eta0_) + ")"; }

  void begin(std::int64_t, const ConvexBody& body, double obs_bound, RngStream) override {
    if (!body.supports_euclid_project())
      throw std::invalid_argument("projected_oga: body kind does not support projection");
    body_ = body;
    eta0_ = params_.eta0 > 0.0
                ? params_.eta0
                : (obs_bound > 0.0 ? body.diameter() / obs_bound : 0.0);
    x_ = body.center();
  }

 protected:
  Vec compute_action(std::int64_t) override { return x_; }
  void handle_observation(std::int64_t t, const Observation& obs) override {
    if (eta0_ == 0.0) return;
    const double eta = eta0_ / std::sqrt(double(t));
    x_ = body_->euclid_project(x_ + eta * obs_vector(obs));
  }

 private:
  ProjectedOgaParams params_;
  std::optional<ConvexBody> body_;
  double eta0_ = 0.0;
  Vec x_;
};

}  // namespace

IaSchedule ia_schedule(std::int64_t T, double diameter, double grad_bound) {
  const double D = std::max(diameter, 1e-12);
  const double M1 = std::max(grad_bound, 1e-12);
  IaSchedule s;
  const int N =
      static_cast<int>(std::ceil(0.5 * std::log2(1.0 + 4.0 * double(T) / 7.0))) + 1;
  s.etas.resize(N);
  for (int i = 1; i <= N; ++i)
    s.etas[i - 1] = std::pow(2.0, i - 1) * (D / M1) * std::sqrt(7.0 / (2.0 * double(T)));
  s.lambda = std::sqrt(2.0 / (double(T) * M1 * M1 * D * D));
  const double C = 1.0 + 1.0 / N;
  s.initial_weights.resize(N);
  for (int i = 1; i <= N; ++i) s.initial_weights[i - 1] = C / (double(i) * (i + 1));
  return s;
}

std::unique_ptr<Agent> make_so_oga(SoOgaParams params) {
  return std::make_unique<SoOgaAgent>(params);
}

std::unique_ptr<Agent> make_improved_ader(std::optional<IaSchedule> schedule) {
  return std::make_unique<ImprovedAderAgent>(std::move(schedule));
}

std::unique_ptr<Agent> make_projected_oga(ProjectedOgaParams params) {
  return std::make_unique<ProjectedOgaAgent>(params);
}

std::unique_ptr<Agent> agent_from_json(const nlohmann::json& j) {
  const std::string algo = j.at("algo").get<std::string>();
  if (algo == "so_oga") {
    SoOgaParams p;
    p.v = j.value("v", 0.0);
    if (j.contains("eta")) p.eta = j.at("eta").get<double>();
    if (j.contains("delta")) p.delta = j.at("delta").get<double>();
    return make_so_oga(p);
  }
  if (algo == "ia") return make_improved_ader();
  if (algo == "oga") {
    ProjectedOgaParams p;
    p.eta0 = j.value("eta0", 0.0);
    return make_projected_oga(p);
  }
  throw std::invalid_argument("unknown base algorithm: " + algo);
}

}  // namespace upco
