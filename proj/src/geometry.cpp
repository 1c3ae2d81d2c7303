#include "upco/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace upco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const Vec& x, int d, const char* what) {
  if (x.size() != d) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

double choose_count(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= double(n - i) / double(i + 1);
  return c;
}

}  // namespace

ConvexBody ConvexBody::axis_box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw std::invalid_argument("axis_box: lo/hi size mismatch");
  for (int i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw std::invalid_argument("axis_box: lo > hi");
  ConvexBody body;
  body.kind_ = BodyKind::AxisBox;
  body.dim_ = static_cast<int>(lo.size());
  body.lo_ = lo;
  body.hi_ = hi;
  body.finalize(std::nullopt, std::nullopt, std::nullopt);
  return body;
}

ConvexBody ConvexBody::halfspace_polytope(const Mat& A, const Vec& b) {
  if (A.rows() != b.size() || A.rows() == 0 || A.cols() == 0)
    throw std::invalid_argument("halfspace_polytope: A/b shape mismatch");
  ConvexBody body;
  body.kind_ = BodyKind::HalfspacePolytope;
  body.dim_ = static_cast<int>(A.cols());
  body.lo_ = Vec::Zero(body.dim_);
  body.hi_ = Vec::Ones(body.dim_);
  body.poly_A_ = Mat(A.rows(), A.cols());
  body.poly_b_ = Vec(b.size());
  for (int i = 0; i < A.rows(); ++i) {
    const double n = A.row(i).norm();
    if (n < 1e-12) throw std::invalid_argument("halfspace_polytope: zero row");
    body.poly_A_.row(i) = A.row(i) / n;
    body.poly_b_[i] = b[i] / n;
  }
  body.finalize(std::nullopt, std::nullopt, std::nullopt);
  return body;
}

ConvexBody ConvexBody::budgeted_box(int dim, double budget) {
  if (dim < 1) throw std::invalid_argument("budgeted_box: dim must be positive");
  if (budget <= 0.0) throw std::invalid_argument("budgeted_box: budget must be positive");
  ConvexBody body;
  body.kind_ = BodyKind::BudgetedBox;
  body.dim_ = dim;
  body.lo_ = Vec::Zero(dim);
  body.hi_ = Vec::Ones(dim);
  body.budget_ = budget;
  body.finalize(std::nullopt, std::nullopt, std::nullopt);
  return body;
}

std::vector<ConvexBody::Row> ConvexBody::all_rows() const {
  std::vector<Row> rows;
  rows.reserve(2 * dim_ + poly_A_.rows() + 1);
  for (int i = 0; i < dim_; ++i) {
    Vec e = Vec::Zero(dim_);
    e[i] = 1.0;
    rows.push_back({e, hi_[i]});
    rows.push_back({-e, -lo_[i]});
  }
  for (int i = 0; i < poly_A_.rows(); ++i)
    rows.push_back({poly_A_.row(i).transpose(), poly_b_[i]});
  if (kind_ == BodyKind::BudgetedBox) {
    const double s = std::sqrt(double(dim_));
    rows.push_back({Vec::Ones(dim_) / s, budget_ / s});
  }
  return rows;
}

bool ConvexBody::contains(const Vec& x) const {
  check_dim(x, dim_, "membership");
  for (int i = 0; i < dim_; ++i)
    if (x[i] < lo_[i] - kGeomTol || x[i] > hi_[i] + kGeomTol) return false;
  for (int i = 0; i < poly_A_.rows(); ++i)
    if (poly_A_.row(i).dot(x) > poly_b_[i] + kGeomTol) return false;
  if (kind_ == BodyKind::BudgetedBox && x.sum() > budget_ + kGeomTol * std::sqrt(double(dim_)))
    return false;
  return true;
}

SeparationResult ConvexBody::separate(const Vec& y) const {
  check_dim(y, dim_, "separate");
  double worst = -kInf;
  Vec g;
  for (const Row& row : all_rows()) {
    const double violation = row.a.dot(y) - row.b;
    if (violation > worst) {
      worst = violation;
      g = row.a;
    }
  }
  if (worst <= kGeomTol) return {true, Vec()};
  return {false, g};
}

std::pair<double, double> ConvexBody::feasible_interval(const Vec& x, const Vec& v) const {
  double tlo = -kInf, thi = kInf;
  for (const Row& row : all_rows()) {
    const double slack = row.b - row.a.dot(x);
    const double speed = row.a.dot(v);
    if (std::abs(speed) < 1e-14) {
      if (slack < -kGeomTol) return {1.0, -1.0};  // empty
      continue;
    }
    const double t = slack / speed;
    if (speed > 0.0)
      thi = std::min(thi, t);
    else
      tlo = std::max(tlo, t);
  }
  return {tlo, thi};
}

ConvexBody ConvexBody::shrink(double delta) const {
  if (delta < 0.0 || delta >= inner_radius_)
    throw std::invalid_argument("shrink: need 0 <= delta < inner_radius");
  if (delta == 0.0) return *this;
  const double s = 1.0 - delta / inner_radius_;
  ConvexBody out = *this;
  // Affine map phi(x) = s x + (1-s) c applied to every constraint offset.
  out.lo_ = s * lo_ + (1.0 - s) * center_;
  out.hi_ = s * hi_ + (1.0 - s) * center_;
  for (int i = 0; i < poly_b_.size(); ++i)
    out.poly_b_[i] = s * poly_b_[i] + (1.0 - s) * poly_A_.row(i).dot(center_);
  if (kind_ == BodyKind::BudgetedBox) out.budget_ = s * budget_ + (1.0 - s) * center_.sum();
  out.inner_radius_ = inner_radius_ - delta;
  out.diameter_ = s * diameter_;
  out.shrink_scale_ = shrink_scale_ * s;
  out.compute_min_inf_point();
  return out;
}

Vec ConvexBody::affine_project(const Vec& y) const {
  check_dim(y, dim_, "affine_project");
  if (affine_dim() == dim_) return y;
  return center_ + affine_basis_ * (affine_basis_.transpose() * (y - center_));
}

Vec ConvexBody::euclid_project(const Vec& y) const {
  check_dim(y, dim_, "euclid_project");
  if (kind_ == BodyKind::HalfspacePolytope)
    throw std::runtime_error("euclid_project: unsupported body kind (HalfspacePolytope)");
  Vec p = y.cwiseMax(lo_).cwiseMin(hi_);
  if (kind_ == BodyKind::AxisBox) return p;
  if (p.sum() <= budget_ + 1e-15) return p;
  // Water-filling: x_i = clamp(y_i - lambda) with the budget row active.
  double lamlo = 0.0, lamhi = (y - lo_).maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double lam = 0.5 * (lamlo + lamhi);
    const double total = (y.array() - lam).cwiseMax(lo_.array()).cwiseMin(hi_.array()).sum();
    if (total > budget_)
      lamlo = lam;
    else
      lamhi = lam;
  }
  const double lam = 0.5 * (lamlo + lamhi);
  return (y.array() - lam).cwiseMax(lo_.array()).cwiseMin(hi_.array());
}

Vec ConvexBody::sample_sphere_L0(RngStream& rng) const {
  const int k = affine_dim();
  if (k == 0) throw std::runtime_error("sample_sphere_L0: degenerate body (affine hull is a point)");
  Vec u = rng.normal_vec(k);
  while (u.norm() < 1e-12) u = rng.normal_vec(k);
  return affine_basis_ * (u / u.norm());
}

Vec ConvexBody::sample_member(RngStream& rng, int steps) const {
  if (affine_dim() == 0) return center_;
  Vec x = center_;
  for (int i = 0; i < steps; ++i) {
    const Vec v = sample_sphere_L0(rng);
    auto [tlo, thi] = feasible_interval(x, v);
    if (tlo > thi) continue;
    x += rng.uniform(tlo, thi) * v;
  }
  return x;
}

void ConvexBody::compute_affine_basis() {
  const auto rows = all_rows();
  std::vector<Vec> normals;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      if ((rows[i].a + rows[j].a).norm() <= 1e-9 && std::abs(rows[i].b + rows[j].b) <= 1e-9)
        normals.push_back(rows[i].a);
  if (kind_ == BodyKind::BudgetedBox && budget_ <= kGeomTol) {
    affine_basis_ = Mat(dim_, 0);  // the body is the single point 0
    return;
  }
  if (normals.empty()) {
    affine_basis_ = Mat::Identity(dim_, dim_);
    return;
  }
  Mat E(normals.size(), dim_);
  for (std::size_t i = 0; i < normals.size(); ++i) E.row(i) = normals[i].transpose();
  Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-9 * std::max(1.0, smax)) ++rank;
  affine_basis_ = svd.matrixV().rightCols(dim_ - rank);
}

void ConvexBody::compute_center_and_radius() {
  if (kind_ == BodyKind::AxisBox) {
    center_ = 0.5 * (lo_ + hi_);
    double r = kInf;
    for (int i = 0; i < dim_; ++i) {
      const double w = hi_[i] - lo_[i];
      if (w > kGeomTol) r = std::min(r, 0.5 * w);
    }
    inner_radius_ = std::isfinite(r) ? r : 1.0;
    return;
  }
  if (kind_ == BodyKind::BudgetedBox) {
    if (budget_ >= double(dim_)) {
      center_ = 0.5 * Vec::Ones(dim_);
      inner_radius_ = 0.5;
      return;
    }
    const double sq = std::sqrt(double(dim_));
    auto phi = [&](double t) {
      return std::min({t, 1.0 - t, (budget_ - dim_ * t) / sq});
    };
    double a = 0.0, b = std::min(1.0, budget_ / dim_);
    for (int it = 0; it < 200; ++it) {
      const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      if (phi(m1) < phi(m2))
        a = m1;
      else
        b = m2;
    }
    const double t = 0.5 * (a + b);
    center_ = t * Vec::Ones(dim_);
    inner_radius_ = phi(t);
    return;
  }
  // HalfspacePolytope: Chebyshev-style max of the scaled slack over the
  // box-bounded region, by subgradient ascent within the affine hull plus a
  // random-direction polish. The slack at the final point is itself a valid
  // inner radius, so approximation only costs tightness.
  const auto rows = all_rows();
  const Mat P = affine_basis_ * affine_basis_.transpose();
  struct EffRow {
    Vec a;
    double b;
    Vec dir;  // P a / ||P a||
    double pn;
  };
  std::vector<EffRow> eff;
  for (const Row& row : rows) {
    const Vec pa = P * row.a;
    const double pn = pa.norm();
    if (pn < 1e-9) continue;
    eff.push_back({row.a, row.b, pa / pn, pn});
  }
  auto phi = [&](const Vec& x) {
    double best = kInf;
    int arg = -1;
    for (std::size_t i = 0; i < eff.size(); ++i) {
      const double s = (eff[i].b - eff[i].a.dot(x)) / eff[i].pn;
      if (s < best) {
        best = s;
        arg = static_cast<int>(i);
      }
    }
    return std::make_pair(best, arg);
  };
  // Anchor any start point on the affine hull.
  std::vector<Vec> eqn;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      if ((rows[i].a + rows[j].a).norm() <= 1e-9 && std::abs(rows[i].b + rows[j].b) <= 1e-9)
        eqn.push_back(rows[i].a);
  auto to_aff = [&](const Vec& x0) -> Vec {
    if (eqn.empty()) return x0;
    Mat E(eqn.size(), dim_);
    Vec e(eqn.size());
    for (std::size_t i = 0; i < eqn.size(); ++i) {
      E.row(i) = eqn[i].transpose();
      // offset of the equality: the row with +a carries b
      double bi = 0.0;
      for (const Row& row : rows)
        if ((row.a - eqn[i]).norm() <= 1e-9) bi = row.b;
      e[i] = bi;
    }
    return x0 - E.completeOrthogonalDecomposition().pseudoInverse() * (E * x0 - e);
  };

  RngStream rng(0x9e3779b9);  // construction-time search only; body stays deterministic
  std::vector<Vec> starts;
  starts.push_back(to_aff(0.5 * Vec::Ones(dim_)));
  for (int i = 0; i < 6; ++i) {
    Vec x0(dim_);
    for (int j = 0; j < dim_; ++j) x0[j] = rng.uniform();
    starts.push_back(to_aff(x0));
  }
  Vec best_x = starts[0];
  double best_phi = phi(best_x).first;
  for (const Vec& s0 : starts) {
    Vec x = s0;
    for (int it = 0; it < 1500; ++it) {
      auto [val, arg] = phi(x);
      if (val > best_phi) {
        best_phi = val;
        best_x = x;
      }
      if (arg < 0) break;
      x -= (0.25 / std::sqrt(double(it + 1))) * eff[arg].dir;
    }
  }
  // Random-direction polish.
  if (affine_dim() > 0) {
    double step = 0.05;
    Vec x = best_x;
    for (int it = 0; it < 1200 && step > 1e-13; ++it) {
      Vec u = rng.normal_vec(affine_dim());
      if (u.norm() < 1e-12) continue;
      const Vec v = affine_basis_ * (u / u.norm());
      bool improved = false;
      for (const double sgn : {1.0, -1.0}) {
        const Vec cand = x + sgn * step * v;
        if (phi(cand).first > phi(x).first) {
          x = cand;
          improved = true;
          break;
        }
      }
      if (!improved) step *= 0.85;
    }
    if (phi(x).first > best_phi) {
      best_phi = phi(x).first;
      best_x = x;
    }
  }
  if (best_phi <= kGeomTol)
    throw std::runtime_error("halfspace_polytope: could not find an interior point (degenerate or empty body)");
  center_ = best_x;
  inner_radius_ = best_phi;
}

void ConvexBody::compute_diameter() {
  if (kind_ == BodyKind::AxisBox) {
    diameter_ = (hi_ - lo_).norm();
    return;
  }
  if (kind_ == BodyKind::BudgetedBox) {
    // Max squared distance splits into two vertex loads with disjoint support.
    auto q = [&](int n) {
      const int m = std::min(n, static_cast<int>(std::floor(budget_ + 1e-12)));
      const double frac = (n > m) ? std::min(1.0, budget_ - m) : 0.0;
      return m + frac * frac;
    };
    double best = 0.0;
    for (int a = 0; a <= dim_; ++a)
      for (int b = 0; a + b <= dim_; ++b) best = std::max(best, q(a) + q(b));
    diameter_ = std::sqrt(best);
    return;
  }
  // HalfspacePolytope: exact over enumerated vertices when the combination
  // count is tractable; otherwise fall back to the bounding-box diagonal,
  // which is a valid upper bound.
  const auto rows = all_rows();
  const int n = static_cast<int>(rows.size());
  if (choose_count(n, dim_) > 3e6) {
    diameter_ = (hi_ - lo_).norm();
    return;
  }
  std::vector<Vec> vertices;
  std::vector<int> idx(dim_);
  Mat Asub(dim_, dim_);
  Vec bsub(dim_);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == dim_) {
      for (int i = 0; i < dim_; ++i) {
        Asub.row(i) = rows[idx[i]].a.transpose();
        bsub[i] = rows[idx[i]].b;
      }
      Eigen::FullPivLU<Mat> lu(Asub);
      if (!lu.isInvertible()) return;
      const Vec v = lu.solve(bsub);
      if ((Asub * v - bsub).norm() > 1e-8) return;
      // vertex feasibility with a loose tolerance (points sit on the boundary)
      for (const Row& row : rows)
        if (row.a.dot(v) > row.b + 1e-7) return;
      vertices.push_back(v);
      return;
    }
    for (int i = start; i <= n - (dim_ - depth); ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  double best = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      best = std::max(best, (vertices[i] - vertices[j]).norm());
  diameter_ = vertices.size() >= 2 ? best : 0.0;
}

void ConvexBody::compute_min_inf_point() {
  const Vec zero = Vec::Zero(dim_);
  if (contains(zero)) {
    min_inf_point_ = zero;
    return;
  }
  if (kind_ == BodyKind::AxisBox || kind_ == BodyKind::BudgetedBox) {
    // The componentwise-minimal corner dominates every member in |.|_inf.
    Vec corner = zero.cwiseMax(lo_).cwiseMin(hi_);
    if (contains(corner)) {
      min_inf_point_ = corner;
      return;
    }
  }
  Vec best = center_;
  double best_val = best.cwiseAbs().maxCoeff();
  if (dim_ <= 3) {
    // Grid at 1/64 per axis, then local descent.
    const int res = 65;
    std::vector<int> ix(dim_, 0);
    Vec x(dim_);
    while (true) {
      for (int i = 0; i < dim_; ++i) x[i] = lo_[i] + (hi_[i] - lo_[i]) * ix[i] / (res - 1);
      if (contains(x)) {
        const double v = x.cwiseAbs().maxCoeff();
        if (v < best_val) {
          best_val = v;
          best = x;
        }
      }
      int k = 0;
      while (k < dim_ && ++ix[k] == res) ix[k++] = 0;
      if (k == dim_) break;
    }
  }
  // Feasible-segment descent on |x|_inf with subgradient and random directions.
  RngStream rng(0x51ab1e);
  Vec x = best;
  double step = 0.1;
  for (int it = 0; it < 800 && step > 1e-12; ++it) {
    Vec dir;
    if (it % 3 != 0) {
      int j = 0;
      x.cwiseAbs().maxCoeff(&j);
      Vec g = Vec::Zero(dim_);
      g[j] = (x[j] >= 0.0) ? -1.0 : 1.0;
      dir = affine_basis_ * (affine_basis_.transpose() * g);
      if (dir.norm() < 1e-12) {
        step *= 0.9;
        continue;
      }
      dir.normalize();
    } else {
      if (affine_dim() == 0) break;
      dir = sample_sphere_L0(rng);
    }
    auto [tlo, thi] = feasible_interval(x, dir);
    const double t = std::min(step, std::max(0.0, thi));
    const Vec cand = x + t * dir;
    if (contains(cand) && cand.cwiseAbs().maxCoeff() < x.cwiseAbs().maxCoeff() - 1e-15) {
      x = cand;
    } else {
      step *= 0.9;
    }
  }
  if (contains(x) && x.cwiseAbs().maxCoeff() < best_val) best = x;
  min_inf_point_ = best;
}

void ConvexBody::finalize(const std::optional<Vec>& center_override,
                          std::optional<double> radius_override,
                          std::optional<double> diameter_override) {
  compute_affine_basis();
  compute_center_and_radius();
  if (center_override) {
    check_dim(*center_override, dim_, "center override");
    center_ = *center_override;
  }
  if (radius_override) inner_radius_ = *radius_override;
  compute_diameter();
  if (diameter_override) diameter_ = *diameter_override;
  compute_min_inf_point();
  if (!contains(center_)) throw std::runtime_error("body center fails membership");
}

ConvexBody ConvexBody::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  ConvexBody body;
  if (kind == "axis_box") {
    const auto lo = j.at("lo").get<std::vector<double>>();
    const auto hi = j.at("hi").get<std::vector<double>>();
    body = axis_box(Eigen::Map<const Vec>(lo.data(), lo.size()),
                    Eigen::Map<const Vec>(hi.data(), hi.size()));
  } else if (kind == "polytope") {
    const auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (rows.empty()) throw std::invalid_argument("polytope: empty A");
    Mat A(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      A.row(i) = Eigen::Map<const Vec>(rows[i].data(), rows[i].size()).transpose();
    body = halfspace_polytope(A, Eigen::Map<const Vec>(b.data(), b.size()));
  } else if (kind == "budgeted_box") {
    body = budgeted_box(j.at("dim").get<int>(), j.at("budget").get<double>());
  } else {
    throw std::invalid_argument("unknown body kind: " + kind);
  }
  // Optional overrides for reproducibility of recorded runs.
  std::optional<Vec> c;
  std::optional<double> r, D;
  if (j.contains("center")) {
    const auto cv = j.at("center").get<std::vector<double>>();
    c = Eigen::Map<const Vec>(cv.data(), cv.size());
  }
  if (j.contains("inner_radius")) r = j.at("inner_radius").get<double>();
  if (j.contains("diameter")) D = j.at("diameter").get<double>();
  if (c || r || D) body.finalize(c, r, D);
  return body;
}

nlohmann::json ConvexBody::to_json() const {
  if (shrink_scale_ != 1.0)
    throw std::logic_error("to_json: shrunk bodies are not serializable");
  nlohmann::json j;
  switch (kind_) {
    case BodyKind::AxisBox:
      j["kind"] = "axis_box";
      j["lo"] = std::vector<double>(lo_.data(), lo_.data() + dim_);
      j["hi"] = std::vector<double>(hi_.data(), hi_.data() + dim_);
      break;
    case BodyKind::HalfspacePolytope: {
      j["kind"] = "polytope";
      std::vector<std::vector<double>> A;
      for (int i = 0; i < poly_A_.rows(); ++i) {
        std::vector<double> row(dim_);
        for (int c = 0; c < dim_; ++c) row[c] = poly_A_(i, c);
        A.push_back(std::move(row));
      }
      j["A"] = A;
      j["b"] = std::vector<double>(poly_b_.data(), poly_b_.data() + poly_b_.size());
      break;
    }
    case BodyKind::BudgetedBox:
      j["kind"] = "budgeted_box";
      j["dim"] = dim_;
      j["budget"] = budget_;
      break;
  }
  j["center"] = std::vector<double>(center_.data(), center_.data() + dim_);
  j["inner_radius"] = inner_radius_;
  j["diameter"] = diameter_;
  return j;
}

}  // namespace upco
