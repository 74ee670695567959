#pragma once

// Question forest data model: questions with constrained answer domains,
// organized into trees whose edges carry gate conditions (the parent answers
// that make a child worth asking). Parsed from a JSON config, validated,
// and immutable afterwards, so a Forest is safe to share across workers.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hqa/labels.hpp"

namespace hqa {

struct AnswerDomain {
  enum class Kind { Binary, Categorical };

  Kind kind = Kind::Binary;
  std::vector<std::string> labels;  // normalized, ordered, never contains "none"

  bool contains(std::string_view label) const;

  // Label substituted when an inapplicable question is asked anyway:
  // "no" for binary domains, the first label otherwise.
  const std::string& default_label() const;

  static AnswerDomain binary();
  static AnswerDomain categorical(std::vector<std::string> labels);

  bool operator==(const AnswerDomain&) const = default;
};

std::string_view domain_kind_name(AnswerDomain::Kind kind);

// Set of parent answers that activate a child question.
struct GateCondition {
  std::vector<std::string> activating;

  bool passes(std::string_view answer) const;

  bool operator==(const GateCondition&) const = default;
};

struct ChildLink {
  GateCondition gate;
  std::string id;

  bool operator==(const ChildLink&) const = default;
};

struct QuestionNode {
  std::string id;
  std::string text;
  AnswerDomain domain;
  std::map<std::string, std::string> templates;  // label -> sentence; partial
  std::vector<ChildLink> children;               // declared order

  bool operator==(const QuestionNode&) const = default;
};

struct Violation {
  std::string rule;     // e.g. "multiple-parents", "gate-outside-parent-domain"
  std::string node_id;  // offending node; empty for forest-level rules
  std::string message;
};

class Forest {
 public:
  Forest() = default;

  // Builds the id index and canonical preorder. Throws ConfigError on a
  // duplicate id; every other defect is left for validate_forest to report.
  Forest(std::vector<QuestionNode> nodes, std::vector<std::string> roots);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<QuestionNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& roots() const { return roots_; }

  bool has(std::string_view id) const;
  const QuestionNode* find(std::string_view id) const;
  const QuestionNode& node(std::string_view id) const;  // throws DataError if unknown

  // Depth-first preorder over roots then children in declared order; the
  // canonical question order used by traversal, synthesis, and reports.
  const std::vector<std::string>& canonical_order() const { return preorder_; }

  bool operator==(const Forest& other) const {
    return nodes_ == other.nodes_ && roots_ == other.roots_;
  }

 private:
  std::vector<QuestionNode> nodes_;
  std::vector<std::string> roots_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> preorder_;
};

struct ForestStats {
  std::size_t node_count = 0;
  std::size_t root_count = 0;
  std::size_t max_depth = 0;  // root-only forest has depth 1
  std::vector<std::pair<std::string, std::size_t>> subtree_sizes;  // per root
};

// Parses and fully validates; throws ConfigError describing every problem.
Forest parse_forest(const std::string& config_text);
Forest parse_forest_file(const std::string& path);

// Schema-level parse only: throws ConfigError on malformed JSON or missing
// fields, but leaves structural rule checks to validate_forest so callers
// can list violations instead of failing on the first.
Forest parse_forest_unchecked(const std::string& config_text);

std::string serialize_forest(const Forest& forest);

// Empty result iff every structural invariant holds. Violations are data,
// not failures; each carries the node id and the rule it breaks.
std::vector<Violation> validate_forest(const Forest& forest);

ForestStats forest_stats(const Forest& forest);

// Five-question fixture covering road curvature and an intersection subtree;
// also shipped as assets/demo_forest.json.
Forest demo_forest();

// Deterministic scale fixture: seven binary roots with a fixed fan-out
// profile (7/14/12/8 layers at 41 nodes), every child gated on its parent's
// "yes". A sprinkling of categorical leaves exercises multi-choice answers.
Forest make_synthetic_forest(std::size_t node_count);

}  // namespace hqa
