#pragma once

// Hierarchical (gated) and flat (ask-everything) traversals over a question
// forest. An asked node's answer decides which children are worth asking;
// everything beneath a failed gate is recorded as "none" at zero cost, which
// is the entire latency win of the gated walk.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hqa/answerers.hpp"
#include "hqa/forest.hpp"

namespace hqa {

// Injected time source. Simulated clocks advance by reported answer
// latencies, so benchmark timelines are wall-clock-free and reproducible.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() = 0;
  virtual void advance_ms(double) {}
};

class SteadyClock final : public Clock {
 public:
  double now_ms() override;
};

class SimClock final : public Clock {
 public:
  explicit SimClock(double start_ms = 0.0) : t_(start_ms) {}
  double now_ms() override { return t_; }
  void advance_ms(double delta_ms) override { t_ += delta_ms; }

 private:
  double t_;
};

enum class RecordStatus { Asked, Pruned };
std::string_view record_status_name(RecordStatus status);

// Out-of-domain answers: strict errors; lenient coerces to the most similar
// domain label (ties broken by domain order) and flags the record.
enum class LabelMode { Strict, Lenient };

struct TraversalRecord {
  std::string question_id;
  RecordStatus status = RecordStatus::Asked;
  std::string answer;       // "none" iff pruned
  double elapsed_ms = 0.0;  // 0 for pruned
  int order_index = 0;      // position in canonical preorder
  bool coerced = false;     // lenient mode mapped an out-of-domain answer
  bool defaulted = false;   // answerer substituted for an inapplicable truth
};

struct TraversalResult {
  std::string frame_ref;
  std::vector<TraversalRecord> records;  // canonical preorder, every node exactly once
  int asked_count = 0;
  double total_elapsed_ms = 0.0;  // sum of asked records
  double started_at_ms = 0.0;
};

struct TraversalOptions {
  LabelMode label_mode = LabelMode::Strict;
};

TraversalResult traverse_hierarchical(const Forest& forest, Answerer& answerer,
                                      const std::string& frame_ref, Clock& clock,
                                      const TraversalOptions& options = {});

TraversalResult traverse_flat(const Forest& forest, Answerer& answerer,
                              const std::string& frame_ref, Clock& clock,
                              const TraversalOptions& options = {});

// Pure gating oracle: the exact set of ids whose ancestor chain contains a
// failed gate, given already-known answers. Independent of answerers and
// timing; throws DataError when a reachable question has no answer.
std::set<std::string> pruned_set(const Forest& forest,
                                 const std::map<std::string, std::string>& answers);

}  // namespace hqa
