#pragma once

#include <json.hpp>

#include <optional>
#include <vector>

#include "upco/common.hpp"

namespace upco {

enum class BodyKind { AxisBox, HalfspacePolytope, BudgetedBox };

struct SeparationResult {
  bool inside = false;
  Vec hyperplane;  // unit normal with <y - x, g> > 0 for all x in K; empty when inside
};

// A convex domain in [0,1]^d with the capabilities the online algorithms
// assume: membership, separation, affine hull, an interior ball, shrinking
// toward the center, and exact Euclidean projection where the kind allows it.
//
// Values are immutable after construction and safe to share across games.
class ConvexBody {
 public:
  static ConvexBody axis_box(const Vec& lo, const Vec& hi);
  // A x <= b intersected with [0,1]^d. Rows are unit-normalized internally.
  static ConvexBody halfspace_polytope(const Mat& A, const Vec& b);
  // { x in [0,1]^d : sum_i x_i <= budget }
  static ConvexBody budgeted_box(int dim, double budget);

  static ConvexBody from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int dim() const { return dim_; }
  BodyKind kind() const { return kind_; }
  const Vec& center() const { return center_; }
  double inner_radius() const { return inner_radius_; }
  double diameter() const { return diameter_; }
  const Mat& affine_basis() const { return affine_basis_; }  // d x k, orthonormal columns
  int affine_dim() const { return static_cast<int>(affine_basis_.cols()); }
  const Vec& min_inf_point() const { return min_inf_point_; }

  bool contains(const Vec& x) const;
  SeparationResult separate(const Vec& y) const;
  ConvexBody shrink(double delta) const;
  // Accumulated shrink map phi(x) = s x + (1-s) c taking the original body
  // onto this one; identity when the body was never shrunk.
  double shrink_scale() const { return shrink_scale_; }
  Vec shrink_map(const Vec& x) const {
    return shrink_scale_ * x + (1.0 - shrink_scale_) * center_;
  }
  Vec affine_project(const Vec& y) const;
  Vec euclid_project(const Vec& y) const;
  bool supports_euclid_project() const { return kind_ != BodyKind::HalfspacePolytope; }

  // Uniform draw from the unit sphere of L0 = aff(K) - center.
  Vec sample_sphere_L0(RngStream& rng) const;

  // Hit-and-run member sampler (burn-in steps from the center).
  Vec sample_member(RngStream& rng, int steps = 16) const;

  // Feasible parameter range { t : x + t v in K }. x need not be feasible.
  std::pair<double, double> feasible_interval(const Vec& x, const Vec& v) const;

 private:
  ConvexBody() = default;
  void finalize(const std::optional<Vec>& center_override,
                std::optional<double> radius_override,
                std::optional<double> diameter_override);
  struct Row {
    Vec a;     // unit normal
    double b;  // offset: <a, x> <= b
  };
  std::vector<Row> all_rows() const;  // box rows plus kind-specific rows
  void compute_affine_basis();
  void compute_center_and_radius();
  void compute_diameter();
  void compute_min_inf_point();

  BodyKind kind_ = BodyKind::AxisBox;
  int dim_ = 0;
  Vec lo_, hi_;      // box bounds (all kinds; [0,1]^d for polytope/budget kinds)
  Mat poly_A_;       // unit rows (HalfspacePolytope)
  Vec poly_b_;
  double budget_ = 0.0;  // BudgetedBox, in true coordinates
  Vec center_;
  double inner_radius_ = 0.0;
  double diameter_ = 0.0;
  Mat affine_basis_;
  Vec min_inf_point_;
  double shrink_scale_ = 1.0;  // cumulative (1 - delta/r) factors
};

}  // namespace upco
