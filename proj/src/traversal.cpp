#include "hqa/traversal.hpp"

#include <chrono>

#include "hqa/errors.hpp"

namespace hqa {

double SteadyClock::now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string_view record_status_name(RecordStatus status) {
  return status == RecordStatus::Asked ? "asked" : "pruned";
}

namespace {

std::string resolve_label(const QuestionNode& question, const std::string& raw,
                          LabelMode mode, const std::string& frame_ref, bool& coerced) {
  std::string label = normalize_label(raw);
  if (question.domain.contains(label)) return label;
  if (mode == LabelMode::Strict) {
    throw DataError("answer '" + raw + "' for question '" + question.id + "' (frame '" +
                    frame_ref + "') is outside the domain");
  }
  double best = -1.0;
  const std::string* pick = nullptr;
  for (const std::string& candidate : question.domain.labels) {
    const double s = normalized_similarity(label, candidate);
    if (s > best) {
      best = s;
      pick = &candidate;
    }
  }
  coerced = true;
  return *pick;
}

struct Walker {
  const Forest& forest;
  Answerer& answerer;
  Clock& clock;
  const TraversalOptions& options;
  const std::string& frame_ref;
  TraversalResult result;

  // Asks one question and appends its record; returns the resolved label.
  std::string ask(const QuestionNode& node) {
    Answer a = answerer.answer(frame_ref, node);
    bool coerced = false;
    std::string label = resolve_label(node, a.label, options.label_mode, frame_ref, coerced);
    clock.advance_ms(a.elapsed_ms);
    result.records.push_back({node.id, RecordStatus::Asked, label, a.elapsed_ms,
                              static_cast<int>(result.records.size()), coerced, a.defaulted});
    result.asked_count += 1;
    result.total_elapsed_ms += a.elapsed_ms;
    return label;
  }

  void walk(const QuestionNode& node) {
    const std::string answer = ask(node);
    for (const ChildLink& link : node.children) {
      if (link.gate.passes(answer)) {
        walk(forest.node(link.id));
      } else {
        prune(forest.node(link.id));
      }
    }
  }

  void prune(const QuestionNode& node) {
    result.records.push_back({node.id, RecordStatus::Pruned, std::string(kNoneLabel), 0.0,
                              static_cast<int>(result.records.size()), false, false});
    for (const ChildLink& link : node.children) prune(forest.node(link.id));
  }
};

}  // namespace

TraversalResult traverse_hierarchical(const Forest& forest, Answerer& answerer,
                                      const std::string& frame_ref, Clock& clock,
                                      const TraversalOptions& options) {
  Walker walker{forest, answerer, clock, options, frame_ref, {}};
  walker.result.frame_ref = frame_ref;
  walker.result.started_at_ms = clock.now_ms();
  for (const std::string& root : forest.roots()) walker.walk(forest.node(root));
  return std::move(walker.result);
}

TraversalResult traverse_flat(const Forest& forest, Answerer& answerer,
                              const std::string& frame_ref, Clock& clock,
                              const TraversalOptions& options) {
  Walker walker{forest, answerer, clock, options, frame_ref, {}};
  walker.result.frame_ref = frame_ref;
  walker.result.started_at_ms = clock.now_ms();
  for (const std::string& id : forest.canonical_order()) walker.ask(forest.node(id));
  return std::move(walker.result);
}

namespace {

struct GateChecker {
  const Forest& forest;
  const std::map<std::string, std::string>& answers;
  std::set<std::string>& pruned;

  void visit(const std::string& id, bool ancestor_failed) {
    const QuestionNode& node = forest.node(id);
    if (ancestor_failed) {
      pruned.insert(id);
      for (const ChildLink& link : node.children) visit(link.id, true);
      return;
    }
    auto it = answers.find(id);
    if (it == answers.end()) {
      throw DataError("missing required answer for question '" + id + "'");
    }
    for (const ChildLink& link : node.children) {
      visit(link.id, !link.gate.passes(it->second));
    }
  }
};

}  // namespace

std::set<std::string> pruned_set(const Forest& forest,
                                 const std::map<std::string, std::string>& answers) {
  std::set<std::string> pruned;
  GateChecker checker{forest, answers, pruned};
  for (const std::string& root : forest.roots()) checker.visit(root, false);
  return pruned;
}

}  // namespace hqa
