#include "hqa/forest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hqa/errors.hpp"

namespace hqa {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

bool AnswerDomain::contains(std::string_view label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

const std::string& AnswerDomain::default_label() const {
  if (kind == Kind::Binary) {
    static const std::string no = "no";
    return no;
  }
  if (labels.empty()) throw DataError("default_label on empty domain");
  return labels.front();
}

AnswerDomain AnswerDomain::binary() {
  return AnswerDomain{Kind::Binary, {"yes", "no"}};
}

AnswerDomain AnswerDomain::categorical(std::vector<std::string> labels) {
  return AnswerDomain{Kind::Categorical, std::move(labels)};
}

std::string_view domain_kind_name(AnswerDomain::Kind kind) {
  return kind == AnswerDomain::Kind::Binary ? "binary" : "categorical";
}

bool GateCondition::passes(std::string_view answer) const {
  return std::find(activating.begin(), activating.end(), answer) != activating.end();
}

// ---------------------------------------------------------------------------
// Forest
// ---------------------------------------------------------------------------

Forest::Forest(std::vector<QuestionNode> nodes, std::vector<std::string> roots)
    : nodes_(std::move(nodes)), roots_(std::move(roots)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto [it, inserted] = index_.emplace(nodes_[i].id, i);
    if (!inserted) {
      throw ConfigError("duplicate question id '" + nodes_[i].id + "'");
    }
  }

  // Canonical preorder; guarded against cycles and dangling ids so that an
  // invalid forest can still be inspected by validate_forest.
  std::set<std::string_view> visited;
  preorder_.reserve(nodes_.size());
  std::vector<std::string_view> stack;
  for (auto root = roots_.rbegin(); root != roots_.rend(); ++root) stack.push_back(*root);
  // LIFO with children pushed in reverse keeps declared order.
  std::vector<std::string_view> order;
  while (!stack.empty()) {
    std::string_view id = stack.back();
    stack.pop_back();
    auto it = index_.find(std::string(id));
    if (it == index_.end() || !visited.insert(id).second) continue;
    preorder_.emplace_back(id);
    const QuestionNode& n = nodes_[it->second];
    for (auto child = n.children.rbegin(); child != n.children.rend(); ++child) {
      stack.push_back(child->id);
    }
  }
}

bool Forest::has(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

const QuestionNode* Forest::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

const QuestionNode& Forest::node(std::string_view id) const {
  const QuestionNode* n = find(id);
  if (!n) throw DataError("unknown question id '" + std::string(id) + "'");
  return *n;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ConfigError("forest config: " + path + ": " + what);
}

std::string require_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

const json& require_member(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing required field '") + key + "'");
  return *it;
}

std::vector<std::string> parse_label_array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of labels");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(normalize_label(require_string(v[i], path + "[" + std::to_string(i) + "]")));
  }
  return out;
}

AnswerDomain parse_domain(const json& v, const std::string& path) {
  if (!v.is_object()) schema_error(path, "expected an object {kind, labels}");
  AnswerDomain domain;
  const std::string kind = require_string(require_member(v, "kind", path), path + ".kind");
  if (kind == "binary") {
    domain.kind = AnswerDomain::Kind::Binary;
  } else if (kind == "categorical") {
    domain.kind = AnswerDomain::Kind::Categorical;
  } else {
    schema_error(path + ".kind", "expected \"binary\" or \"categorical\", got \"" + kind + "\"");
  }
  if (auto it = v.find("labels"); it != v.end()) {
    domain.labels = parse_label_array(*it, path + ".labels");
  } else if (domain.kind == AnswerDomain::Kind::Binary) {
    domain.labels = {"yes", "no"};  // binary labels may be omitted
  } else {
    schema_error(path, "categorical domain requires 'labels'");
  }
  return domain;
}

QuestionNode parse_question(const json& v, const std::string& path) {
  if (!v.is_object()) schema_error(path, "expected a question object");
  QuestionNode node;
  node.id = require_string(require_member(v, "id", path), path + ".id");
  if (node.id.empty()) schema_error(path + ".id", "question id must be non-empty");
  node.text = require_string(require_member(v, "text", path), path + ".text");
  node.domain = parse_domain(require_member(v, "domain", path), path + ".domain");

  if (auto it = v.find("templates"); it != v.end()) {
    if (!it->is_object()) schema_error(path + ".templates", "expected an object {label: sentence}");
    for (auto& [key, value] : it->items()) {
      std::string label = normalize_label(key);
      std::string sentence = require_string(value, path + ".templates." + key);
      if (!node.templates.emplace(std::move(label), std::move(sentence)).second) {
        schema_error(path + ".templates", "duplicate template key '" + normalize_label(key) + "'");
      }
    }
  }

  if (auto it = v.find("children"); it != v.end()) {
    if (!it->is_array()) schema_error(path + ".children", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string cpath = path + ".children[" + std::to_string(i) + "]";
      const json& cv = (*it)[i];
      if (!cv.is_object()) schema_error(cpath, "expected an object {gate, id}");
      ChildLink link;
      link.gate.activating = parse_label_array(require_member(cv, "gate", cpath), cpath + ".gate");
      link.id = require_string(require_member(cv, "id", cpath), cpath + ".id");
      node.children.push_back(std::move(link));
    }
  }
  return node;
}

}  // namespace

Forest parse_forest_unchecked(const std::string& config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("forest config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("$", "expected a top-level object");

  const json& version = require_member(doc, "version", "$");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    schema_error("version", "unsupported config version (expected 1)");
  }

  const json& roots_v = require_member(doc, "roots", "$");
  if (!roots_v.is_array()) schema_error("roots", "expected an array of question ids");
  if (roots_v.empty()) schema_error("roots", "forest must have >=1 root");
  std::vector<std::string> roots;
  for (std::size_t i = 0; i < roots_v.size(); ++i) {
    roots.push_back(require_string(roots_v[i], "roots[" + std::to_string(i) + "]"));
  }

  const json& questions = require_member(doc, "questions", "$");
  if (!questions.is_array()) schema_error("questions", "expected an array");
  std::vector<QuestionNode> nodes;
  nodes.reserve(questions.size());
  for (std::size_t i = 0; i < questions.size(); ++i) {
    nodes.push_back(parse_question(questions[i], "questions[" + std::to_string(i) + "]"));
  }

  return Forest(std::move(nodes), std::move(roots));
}

Forest parse_forest(const std::string& config_text) {
  Forest forest = parse_forest_unchecked(config_text);
  std::vector<Violation> violations = validate_forest(forest);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid forest config:";
    for (const Violation& v : violations) msg << "\n  [" << v.rule << "] " << v.message;
    throw ConfigError(msg.str());
  }
  return forest;
}

Forest parse_forest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open forest config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_forest(buf.str());
}

std::string serialize_forest(const Forest& forest) {
  json questions = json::array();
  for (const QuestionNode& node : forest.nodes()) {
    json q;
    q["id"] = node.id;
    q["text"] = node.text;
    q["domain"] = {{"kind", std::string(domain_kind_name(node.domain.kind))},
                   {"labels", node.domain.labels}};
    if (!node.templates.empty()) {
      json t = json::object();
      for (const auto& [label, sentence] : node.templates) t[label] = sentence;
      q["templates"] = std::move(t);
    }
    if (!node.children.empty()) {
      json c = json::array();
      for (const ChildLink& link : node.children) {
        c.push_back({{"gate", link.gate.activating}, {"id", link.id}});
      }
      q["children"] = std::move(c);
    }
    questions.push_back(std::move(q));
  }
  json doc{{"version", 1}, {"roots", forest.roots()}, {"questions", std::move(questions)}};
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void check_domain(const QuestionNode& node, std::vector<Violation>& out) {
  const AnswerDomain& d = node.domain;
  if (d.labels.empty()) {
    out.push_back({"empty-domain", node.id, "question '" + node.id + "' has an empty answer domain"});
    return;
  }
  std::set<std::string_view> seen;
  for (const std::string& label : d.labels) {
    if (label == kNoneLabel) {
      out.push_back({"none-in-domain", node.id,
                     "question '" + node.id + "' lists reserved label \"none\" in its domain"});
    }
    if (!seen.insert(label).second) {
      out.push_back({"duplicate-label", node.id,
                     "question '" + node.id + "' repeats domain label '" + label + "'"});
    }
    if (!is_normalized(label)) {
      out.push_back({"label-not-normalized", node.id,
                     "question '" + node.id + "' has non-normalized label '" + label + "'"});
    }
  }
  if (d.kind == AnswerDomain::Kind::Binary) {
    const bool ok = d.labels.size() == 2 && seen.count("yes") && seen.count("no");
    if (!ok) {
      out.push_back({"binary-domain-mismatch", node.id,
                     "binary question '" + node.id + "' must have exactly the labels {yes, no}"});
    }
  }
}

void check_templates(const QuestionNode& node, std::vector<Violation>& out) {
  for (const auto& [label, sentence] : node.templates) {
    (void)sentence;
    if (!node.domain.contains(label)) {
      out.push_back({"template-key-outside-domain", node.id,
                     "question '" + node.id + "' has a template for '" + label +
                         "' which is not in its domain"});
    }
  }
}

void check_gates(const QuestionNode& node, std::vector<Violation>& out) {
  for (const ChildLink& link : node.children) {
    if (link.gate.activating.empty()) {
      out.push_back({"empty-gate", node.id,
                     "edge " + node.id + " -> " + link.id + " has an empty gate"});
      continue;
    }
    for (const std::string& label : link.gate.activating) {
      if (label == kNoneLabel) {
        out.push_back({"none-in-gate", node.id,
                       "edge " + node.id + " -> " + link.id + " gates on reserved label \"none\""});
      } else if (!node.domain.contains(label)) {
        out.push_back({"gate-outside-parent-domain", node.id,
                       "edge " + node.id + " -> " + link.id + " gates on label '" + label +
                           "' outside the parent domain of '" + node.id + "'"});
      }
    }
  }
}

// Three-color DFS over the child graph; reports one violation per back edge.
void check_cycles(const Forest& forest, std::vector<Violation>& out) {
  enum class Color { White, Gray, Black };
  std::map<std::string_view, Color> color;
  for (const QuestionNode& n : forest.nodes()) color[n.id] = Color::White;

  struct Frame {
    const QuestionNode* node;
    std::size_t next_child;
  };

  for (const QuestionNode& start : forest.nodes()) {
    if (color[start.id] != Color::White) continue;
    std::vector<Frame> stack{{&start, 0}};
    color[start.id] = Color::Gray;
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next_child >= top.node->children.size()) {
        color[top.node->id] = Color::Black;
        stack.pop_back();
        continue;
      }
      const std::string& child_id = top.node->children[top.next_child++].id;
      const QuestionNode* child = forest.find(child_id);
      if (!child) continue;  // dangling ids reported separately
      Color c = color[child->id];
      if (c == Color::Gray) {
        std::string path;
        bool in_cycle = false;
        for (const Frame& f : stack) {
          if (f.node->id == child_id) in_cycle = true;
          if (in_cycle) path += f.node->id + " -> ";
        }
        path += child_id;
        out.push_back({"cycle", child_id, "cycle detected: " + path});
      } else if (c == Color::White) {
        color[child->id] = Color::Gray;
        stack.push_back({child, 0});
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_forest(const Forest& forest) {
  std::vector<Violation> out;

  if (forest.roots().empty()) {
    out.push_back({"no-roots", "", "forest must have >=1 root"});
  }
  std::set<std::string_view> root_set;
  for (const std::string& root : forest.roots()) {
    if (!forest.has(root)) {
      out.push_back({"unknown-root", root, "root '" + root + "' is not a declared question"});
    }
    if (!root_set.insert(root).second) {
      out.push_back({"duplicate-root", root, "root '" + root + "' is listed twice"});
    }
  }

  // Child reference counting: every non-root appears as exactly one child.
  std::map<std::string_view, std::vector<std::string_view>> parents;
  for (const QuestionNode& node : forest.nodes()) {
    for (const ChildLink& link : node.children) {
      if (!forest.has(link.id)) {
        out.push_back({"unknown-child", node.id,
                       "question '" + node.id + "' references unknown child '" + link.id + "'"});
        continue;
      }
      parents[link.id].push_back(node.id);
    }
  }
  for (const QuestionNode& node : forest.nodes()) {
    const bool is_root = root_set.count(node.id) > 0;
    auto it = parents.find(node.id);
    const std::size_t parent_count = it == parents.end() ? 0 : it->second.size();
    if (parent_count > 1) {
      std::string who;
      for (std::string_view p : it->second) who += std::string(p) + " ";
      out.push_back({"multiple-parents", node.id,
                     "question '" + node.id + "' is a child of multiple parents: " + who});
    }
    if (is_root && parent_count > 0) {
      out.push_back({"root-has-parent", node.id,
                     "root '" + node.id + "' also appears as a child"});
    }
    if (!is_root && parent_count == 0) {
      out.push_back({"unreachable-node", node.id,
                     "question '" + node.id + "' is neither a root nor any node's child"});
    }
  }

  for (const QuestionNode& node : forest.nodes()) {
    if (node.id.empty()) {
      out.push_back({"empty-id", "", "question with empty id"});
    }
    check_domain(node, out);
    check_templates(node, out);
    check_gates(node, out);
  }

  check_cycles(forest, out);
  return out;
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

ForestStats forest_stats(const Forest& forest) {
  ForestStats stats;
  stats.node_count = forest.size();
  stats.root_count = forest.roots().size();

  for (const std::string& root : forest.roots()) {
    if (!forest.has(root)) continue;
    std::size_t subtree = 0;
    std::vector<std::pair<std::string_view, std::size_t>> stack{{root, 1}};
    std::set<std::string_view> visited;
    while (!stack.empty()) {
      auto [id, depth] = stack.back();
      stack.pop_back();
      const QuestionNode* node = forest.find(id);
      if (!node || !visited.insert(id).second) continue;
      ++subtree;
      stats.max_depth = std::max(stats.max_depth, depth);
      for (const ChildLink& link : node->children) stack.push_back({link.id, depth + 1});
    }
    stats.subtree_sizes.emplace_back(root, subtree);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

Forest demo_forest() {
  QuestionNode straight{
      "q_straight",
      "Is the ego vehicle moving on a straight road?",
      AnswerDomain::binary(),
      {{"yes", "The ego vehicle is moving on a straight road."},
       {"no", "The ego vehicle is moving on a curved road."}},
      {{GateCondition{{"no"}}, "q_curve_dir"}}};

  // Deliberately untemplated: the demo description mentions curvature via
  // q_straight's "no" sentence and stays silent on the direction.
  QuestionNode curve{"q_curve_dir",
                     "In which direction does the road curve?",
                     AnswerDomain::categorical({"left", "right"}),
                     {},
                     {}};

  QuestionNode intersection{
      "q_intersection",
      "Is the ego vehicle approaching an intersection?",
      AnswerDomain::binary(),
      {{"yes", "The ego vehicle is approaching an intersection."}},
      {{GateCondition{{"yes"}}, "q_turn_left"}}};

  QuestionNode turn_left{
      "q_turn_left",
      "Is it possible for the ego vehicle to turn left at the intersection?",
      AnswerDomain::binary(),
      {{"yes", "The ego vehicle can turn left at the intersection."}},
      {{GateCondition{{"yes"}}, "q_oncoming"}}};

  QuestionNode oncoming{
      "q_oncoming",
      "Is there a vehicle approaching the intersection from the opposite direction?",
      AnswerDomain::binary(),
      {{"yes", "There is a vehicle approaching the intersection from the opposite direction."}},
      {}};

  return Forest({straight, curve, intersection, turn_left, oncoming},
                {"q_straight", "q_intersection"});
}

Forest make_synthetic_forest(std::size_t node_count) {
  if (node_count == 0) throw ConfigError("synthetic forest needs >=1 node");

  // Layer profile: 7 roots, then 14/12/8 at 41 nodes, shrinking by ~2/3 for
  // larger forests.
  std::vector<std::size_t> sizes;
  std::size_t remaining = node_count;
  sizes.push_back(std::min<std::size_t>(remaining, 7));
  remaining -= sizes.back();
  while (remaining > 0) {
    std::size_t prev = sizes.back();
    std::size_t next;
    if (sizes.size() == 1) {
      next = 2 * prev;
    } else if (sizes.size() == 2) {
      next = std::max<std::size_t>(1, (6 * prev) / 7);
    } else {
      next = std::max<std::size_t>(1, (2 * prev) / 3);
    }
    next = std::min(next, remaining);
    sizes.push_back(next);
    remaining -= next;
  }

  // Global ids in layer-major order; child i of layer k hangs off node
  // (i mod sizes[k-1]) of the previous layer.
  std::vector<std::vector<std::size_t>> layers;
  std::size_t next_id = 0;
  for (std::size_t size : sizes) {
    std::vector<std::size_t> layer(size);
    for (std::size_t& v : layer) v = next_id++;
    layers.push_back(std::move(layer));
  }

  auto id_of = [](std::size_t k) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "q%03zu", k);
    return std::string(buf);
  };

  std::vector<std::vector<std::size_t>> children(node_count);
  for (std::size_t k = 1; k < layers.size(); ++k) {
    for (std::size_t i = 0; i < layers[k].size(); ++i) {
      children[layers[k - 1][i % layers[k - 1].size()]].push_back(layers[k][i]);
    }
  }

  std::vector<QuestionNode> nodes(node_count);
  std::size_t leaf_ordinal = 0;
  for (std::size_t k = 0; k < node_count; ++k) {
    QuestionNode& node = nodes[k];
    node.id = id_of(k);
    const bool leaf = children[k].empty();
    bool categorical = false;
    if (leaf && (leaf_ordinal++ % 5 == 1)) categorical = true;

    if (categorical) {
      if (leaf_ordinal % 2 == 0) {
        node.text = "Which way does scene feature " + std::to_string(k) + " point?";
        node.domain = AnswerDomain::categorical({"left", "right"});
      } else {
        node.text = "What kind of crossing sign is scene feature " + std::to_string(k) + "?";
        node.domain = AnswerDomain::categorical({"pedestrian crossing", "bicycle crossing"});
      }
      // First label doubles as the inapplicability stand-in, so only the
      // remaining labels carry sentences.
      for (std::size_t li = 1; li < node.domain.labels.size(); ++li) {
        node.templates[node.domain.labels[li]] =
            "Scene feature " + std::to_string(k) + " reads " + node.domain.labels[li] + ".";
      }
    } else {
      node.text = "Is scene feature " + std::to_string(k) + " present?";
      node.domain = AnswerDomain::binary();
      node.templates["yes"] = "Scene feature " + std::to_string(k) + " is present.";
    }

    for (std::size_t child : children[k]) {
      node.children.push_back({GateCondition{{"yes"}}, id_of(child)});
    }
  }

  std::vector<std::string> roots;
  for (std::size_t r : layers.front()) roots.push_back(id_of(r));
  return Forest(std::move(nodes), std::move(roots));
}

}  // namespace hqa
