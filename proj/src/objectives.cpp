#include "upco/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "upco/quadrature.hpp"

namespace upco {

namespace {

// Grid scan over [0,1]^d followed by coordinate descent from the best cell.
double box_minimum(const std::function<double(const Vec&)>& f, int d) {
  int res = d <= 3 ? 65 : (d <= 6 ? 9 : 3);
  Vec best = 0.5 * Vec::Ones(d);
  double best_val = f(best);
  std::vector<int> ix(d, 0);
  Vec x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = double(ix[i]) / (res - 1);
    const double v = f(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
    int k = 0;
    while (k < d && ++ix[k] == res) ix[k++] = 0;
    if (k == d) break;
  }
  double step = 1.0 / (res - 1);
  for (int pass = 0; pass < 200 && step > 1e-12; ++pass) {
    bool improved = false;
    for (int i = 0; i < d; ++i) {
      for (const double sgn : {1.0, -1.0}) {
        Vec cand = best;
        cand[i] = std::clamp(cand[i] + sgn * step, 0.0, 1.0);
        const double v = f(cand);
        if (v < best_val - 1e-15) {
          best_val = v;
          best = cand;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best_val;
}

void for_each_corner(int d, const std::function<void(const Vec&)>& fn) {
  Vec x(d);
  for (std::uint64_t mask = 0; mask < (1ULL << d); ++mask) {
    for (int i = 0; i < d; ++i) x[i] = (mask >> i) & 1 ? 1.0 : 0.0;
    fn(x);
  }
}

}  // namespace

ObjectivePtr make_dr_quadratic(const Mat& H, const Vec& h, double offset, bool auto_offset) {
  const int d = static_cast<int>(h.size());
  if (H.rows() != d || H.cols() != d)
    throw std::invalid_argument("make_dr_quadratic: H/h shape mismatch");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("make_dr_quadratic: H must be symmetric");
  if (H.maxCoeff() > 1e-12)
    throw std::invalid_argument("make_dr_quadratic: positive entry in H");

  auto spec = std::make_shared<ObjectiveSpec>();
  spec->dim = d;
  const Mat Hc = H;
  const Vec hc = h;
  auto value_fn = [Hc, hc](double off) {
    return [Hc, hc, off](const Vec& x) { return 0.5 * x.dot(Hc * x) + hc.dot(x) + off; };
  };
  spec->grad = [Hc, hc](const Vec& x) -> Vec { return Hc * x + hc; };

  const Vec grad_at_one = h + H.rowwise().sum();  // componentwise min of the gradient
  spec->monotone = grad_at_one.minCoeff() >= -1e-12;
  spec->gamma = 1.0;
  spec->mu = 0.0;
  if (spec->monotone) {
    double ratio = 1.0;
    bool any = false;
    for (int i = 0; i < d; ++i) {
      if (h[i] > 1e-12) {
        ratio = std::min(ratio, grad_at_one[i] / h[i]);
        any = true;
      }
    }
    spec->curvature = any ? 1.0 - ratio : 0.0;
  } else {
    spec->curvature = 1.0;
  }

  double m1 = 0.0;
  if (d <= 20) {
    for_each_corner(d, [&](const Vec& x) { m1 = std::max(m1, (H * x + h).norm()); });
  } else {
    m1 = h.norm() + H.cwiseAbs().rowwise().sum().norm();
  }
  spec->M1 = m1;

  spec->value = value_fn(offset);
  double off = offset;
  if (auto_offset) {
    const double gmin = box_minimum(spec->value, d);
    if (gmin < 0.0) {
      off = offset - gmin + 1e-12;
      spec->value = value_fn(off);
    }
  }
  spec->nonneg = box_minimum(spec->value, d) >= -1e-9;

  // Value bound from corners plus the interior critical point, refined by the
  // same grid scan used for the minimum.
  double m0 = 0.0;
  if (d <= 20) {
    for_each_corner(d, [&](const Vec& x) { m0 = std::max(m0, std::abs(spec->value(x))); });
  }
  const Vec crit = H.completeOrthogonalDecomposition().solve(-h);
  if (crit.allFinite()) {
    const Vec cx = crit.cwiseMax(0.0).cwiseMin(1.0);
    m0 = std::max(m0, std::abs(spec->value(cx)));
  }
  auto neg = [&](const Vec& x) { return -std::abs(spec->value(x)); };
  m0 = std::max(m0, -box_minimum(neg, d));
  // Lipschitz fill bound so the grid cannot undershoot the true maximum.
  const int res = d <= 3 ? 65 : (d <= 6 ? 9 : 3);
  spec->M0 = m0 + spec->M1 * 0.5 * std::sqrt(double(d)) / (res - 1);
  return spec;
}

ObjectivePtr make_coverage_like(const Vec& a) {
  const int d = static_cast<int>(a.size());
  if (d == 0) throw std::invalid_argument("make_coverage_like: empty weights");
  if (a.minCoeff() < 0.0) throw std::invalid_argument("make_coverage_like: negative weight");
  auto spec = std::make_shared<ObjectiveSpec>();
  spec->dim = d;
  const Vec ac = a;
  spec->value = [ac](const Vec& x) { return (ac.array() * (1.0 - (-x.array()).exp())).sum(); };
  spec->grad = [ac](const Vec& x) -> Vec { return ac.array() * (-x.array()).exp(); };
  spec->gamma = 1.0;
  spec->mu = 0.0;
  spec->curvature = 1.0 - std::exp(-1.0);
  spec->monotone = true;
  spec->nonneg = true;
  spec->M1 = a.norm();
  spec->M0 = a.sum() * (1.0 - std::exp(-1.0));
  return spec;
}

QueryOracle noisy_oracle(ObjectivePtr spec, OracleOrder order, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("noisy_oracle: sigma must be nonnegative");
  QueryOracle oracle;
  oracle.order = order;
  oracle.deterministic = sigma == 0.0;
  oracle.bound = (order == OracleOrder::first ? spec->M1 : spec->M0) + sigma;
  const int d = spec->dim;
  if (order == OracleOrder::first) {
    oracle.sample = [spec, sigma, d](const Vec& x, RngStream& rng) -> Observation {
      Vec g = spec->grad(x);
      if (sigma > 0.0) {
        Vec u = rng.normal_vec(d);
        while (u.norm() < 1e-12) u = rng.normal_vec(d);
        const double radius = sigma * std::pow(rng.uniform(), 1.0 / d);
        g += radius * u / u.norm();
      }
      return g;
    };
  } else {
    oracle.sample = [spec, sigma](const Vec& x, RngStream& rng) -> Observation {
      double v = spec->value(x);
      if (sigma > 0.0) v += rng.uniform(-sigma, sigma);
      return v;
    };
  }
  return oracle;
}

Vec boosted_surrogate_grad(const ObjectiveSpec& spec, const BoostSetting& setting,
                           const Vec& x, int n_quad) {
  if (n_quad < 16) throw std::invalid_argument("boosted_surrogate_grad: n_quad must be >= 16");
  if (x.size() != spec.dim)
    throw std::invalid_argument("boosted_surrogate_grad: dimension mismatch");
  const auto [nodes, weights] = gauss_legendre_01(n_quad);
  Vec out = Vec::Zero(spec.dim);
  if (setting.is_mono_zero) {
    const double g = setting.gamma;
    if (g <= 0.0 || g > 1.0)
      throw std::invalid_argument("boosted_surrogate_grad: gamma outside (0,1]");
    const double norm = 1.0 - std::exp(-g);
    for (int i = 0; i < n_quad; ++i) {
      const double z = nodes[i];
      const double density = g * std::exp(g * (z - 1.0)) / norm;
      out += weights[i] * density * spec.grad(z * x);
    }
  } else {
    const Vec& xu = setting.x_under;
    if (xu.size() != spec.dim)
      throw std::invalid_argument("boosted_surrogate_grad: x_under dimension mismatch");
    for (int i = 0; i < n_quad; ++i) {
      const double z = nodes[i];
      const double density = 1.0 / (3.0 * std::pow(1.0 - 0.5 * z, 3.0));
      out += weights[i] * density * spec.grad(0.5 * z * (x - xu) + xu);
    }
  }
  return out;
}

ObjectivePtr objective_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dr_quadratic") {
    const auto rows = j.at("H").get<std::vector<std::vector<double>>>();
    const auto hv = j.at("h").get<std::vector<double>>();
    Mat H = Mat::Zero(hv.size(), hv.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t c = 0; c < rows[i].size(); ++c) H(i, c) = rows[i][c];
    const Vec h = Eigen::Map<const Vec>(hv.data(), hv.size());
    return make_dr_quadratic(H, h, j.value("offset", 0.0), j.value("auto_offset", false));
  }
  if (kind == "coverage") {
    const auto av = j.at("a").get<std::vector<double>>();
    return make_coverage_like(Eigen::Map<const Vec>(av.data(), av.size()));
  }
  if (kind == "linear") {
    const auto hv = j.at("h").get<std::vector<double>>();
    return make_linear(Eigen::Map<const Vec>(hv.data(), hv.size()));
  }
  throw std::invalid_argument("unknown objective kind: " + kind);
}

}  // namespace upco
