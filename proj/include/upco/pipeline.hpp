#pragma once

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

#include "upco/base_algorithms.hpp"
#include "upco/feedback_transforms.hpp"
#include "upco/quadratize.hpp"

namespace upco {

// Composition grammar over the base algorithms and wrappers, e.g.
//   "so_oga", "ombq(so_oga,bqm0)", "sftt(fotzo(ombq(so_oga,bqm0)))".
// Wrappers: ombq(expr, trivial|bqm0|bqn), fotzo(expr), stb(expr),
// fotzo_2p(expr), sftt(expr). Leaves: so_oga | ia | oga.
class Pipeline {
 public:
  static Pipeline parse(const std::string& text);

  const std::string& text() const { return text_; }
  bool contains(const std::string& name) const;
  const std::string& base_algo() const;
  SchemeSetting scheme_setting() const;  // mono_general when no ombq node

  std::unique_ptr<Agent> build(const ObjectiveClassParams& cls, const ConvexBody& body,
                               const nlohmann::json& base_params = nlohmann::json::object()) const;

  double alpha(const ObjectiveClassParams& cls, const ConvexBody& body) const;
  FeedbackClass feedback(const ObjectiveClassParams& cls, const ConvexBody& body) const;

 private:
  struct Node {
    std::string name;
    std::vector<Node> children;
    std::string scheme;  // ombq only
  };
  std::unique_ptr<Agent> build_node(const Node& node, const ObjectiveClassParams& cls,
                                    const ConvexBody& body,
                                    const nlohmann::json& base_params) const;
  static bool node_contains(const Node& node, const std::string& name);

  Node root_;
  std::string text_;
};

}  // namespace upco
