#include "upco/pipeline.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>

namespace upco {

namespace {

const std::vector<std::string> kLeaves = {"so_oga", "ia", "oga"};
const std::vector<std::string> kWrappers = {"ombq", "fotzo", "stb", "fotzo_2p", "sftt"};
const std::vector<std::string> kSchemes = {"trivial", "bqm0", "bqn"};

bool is_one_of(const std::string& s, const std::vector<std::string>& set) {
  for (const auto& x : set)
    if (x == s) return true;
  return false;
}

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (pos == start) throw std::invalid_argument("pipeline parse error near position " +
                                                  std::to_string(pos) + " in '" + s + "'");
    return s.substr(start, pos - start);
  }
};

}  // namespace

Pipeline Pipeline::parse(const std::string& text) {
  Pipeline p;
  p.text_ = text;
  Parser parser{text};

  std::function<Node(void)> expr = [&]() -> Node {
    Node node;
    node.name = parser.ident();
    if (is_one_of(node.name, kLeaves)) return node;
    if (!is_one_of(node.name, kWrappers))
      throw std::invalid_argument("pipeline: unknown name '" + node.name + "'");
    if (!parser.eat('(')) throw std::invalid_argument("pipeline: expected '(' after " + node.name);
    node.children.push_back(expr());
    if (node.name == "ombq") {
      if (!parser.eat(',')) throw std::invalid_argument("pipeline: ombq needs a query scheme");
      node.scheme = parser.ident();
      if (!is_one_of(node.scheme, kSchemes))
        throw std::invalid_argument("pipeline: unknown query scheme '" + node.scheme + "'");
    }
    if (!parser.eat(')')) throw std::invalid_argument("pipeline: expected ')' in " + node.name);
    return node;
  };

  p.root_ = expr();
  parser.skip_ws();
  if (parser.pos != text.size())
    throw std::invalid_argument("pipeline: trailing input after expression");

  if (node_contains(p.root_, "ia")) {
    // SFTT transports only static-comparator bounds; IA is the dynamic-regret base.
    std::function<void(const Node&)> check = [&](const Node& n) {
      if (n.name == "sftt" && node_contains(n, "ia"))
        throw std::invalid_argument("pipeline: sftt cannot wrap ia");
      for (const auto& c : n.children) check(c);
    };
    check(p.root_);
  }
  int ombq_count = 0;
  std::function<void(const Node&)> count = [&](const Node& n) {
    if (n.name == "ombq") ++ombq_count;
    for (const auto& c : n.children) count(c);
  };
  count(p.root_);
  if (ombq_count > 1) throw std::invalid_argument("pipeline: at most one ombq wrapper");
  return p;
}

bool Pipeline::node_contains(const Node& node, const std::string& name) {
  if (node.name == name) return true;
  for (const auto& c : node.children)
    if (node_contains(c, name)) return true;
  return false;
}

bool Pipeline::contains(const std::string& name) const { return node_contains(root_, name); }

const std::string& Pipeline::base_algo() const {
  const Node* n = &root_;
  while (!n->children.empty()) n = &n->children[0];
  return n->name;
}

SchemeSetting Pipeline::scheme_setting() const {
  const Node* n = &root_;
  while (true) {
    if (n->name == "ombq") {
      if (n->scheme == "bqm0") return SchemeSetting::mono_zero;
      if (n->scheme == "bqn") return SchemeSetting::nonmono;
      return SchemeSetting::mono_general;
    }
    if (n->children.empty()) return SchemeSetting::mono_general;
    n = &n->children[0];
  }
}

std::unique_ptr<Agent> Pipeline::build_node(const Node& node, const ObjectiveClassParams& cls,
                                            const ConvexBody& body,
                                            const nlohmann::json& base_params) const {
  if (is_one_of(node.name, kLeaves)) {
    nlohmann::json j = base_params;
    j["algo"] = node.name;
    return agent_from_json(j);
  }
  auto base = build_node(node.children[0], cls, body, base_params);
  if (node.name == "ombq") {
    SchemeSetting setting = SchemeSetting::mono_general;
    if (node.scheme == "bqm0") setting = SchemeSetting::mono_zero;
    if (node.scheme == "bqn") setting = SchemeSetting::nonmono;
    return make_ombq(std::move(base), scheme_for(setting, cls, body));
  }
  if (node.name == "fotzo") return make_fotzo(std::move(base));
  if (node.name == "stb") return make_stb(std::move(base));
  if (node.name == "fotzo_2p") return make_fotzo_2p(std::move(base), cls.M1);
  if (node.name == "sftt") return make_sftt(std::move(base));
  throw std::logic_error("pipeline: unreachable");
}

std::unique_ptr<Agent> Pipeline::build(const ObjectiveClassParams& cls, const ConvexBody& body,
                                       const nlohmann::json& base_params) const {
  return build_node(root_, cls, body, base_params);
}

double Pipeline::alpha(const ObjectiveClassParams& cls, const ConvexBody& body) const {
  if (!contains("ombq")) return 1.0;
  return scheme_for(scheme_setting(), cls, body).alpha;
}

FeedbackClass Pipeline::feedback(const ObjectiveClassParams& cls, const ConvexBody& body) const {
  return build(cls, body)->feedback_class();
}

}  // namespace upco
