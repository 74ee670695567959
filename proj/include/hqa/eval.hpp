#pragma once

// Scoring and benchmarking harness: per-category accuracy under a pluggable
// judge, latency statistics, hierarchical-vs-flat run comparison, and the
// run-record / report file formats.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hqa/dataset.hpp"
#include "hqa/forest.hpp"
#include "hqa/traversal.hpp"

namespace hqa {

// ---------------------------------------------------------------------------
// Judges
// ---------------------------------------------------------------------------

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string_view name() const = 0;
  // Similarity in [0, 1]; must be 1.0 whenever the normalized strings match.
  virtual double score(const std::string& question_text, const std::string& ground_truth,
                       const std::string& predicted) const = 0;
};

std::unique_ptr<Judge> exact_judge();
// 1 - normalized edit distance between the normalized strings.
std::unique_ptr<Judge> similarity_judge();
std::unique_ptr<Judge> make_judge(const std::string& spec);  // "exact" | "sim"

inline constexpr double kDefaultJudgeThreshold = 0.85;

// ---------------------------------------------------------------------------
// Category accuracy
// ---------------------------------------------------------------------------

enum class AnswerCategory { Yes, No, None, Other };

AnswerCategory category_of(std::string_view ground_truth);
std::string_view category_name(AnswerCategory category);

struct CategoryCount {
  std::size_t correct = 0;
  std::size_t total = 0;
  double percent() const {
    return total == 0 ? 0.0
                      : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
  }
};

struct CategoryAccuracy {
  CategoryCount yes, no, none, other, overall;

  CategoryCount& bucket(AnswerCategory category);
  const CategoryCount& bucket(AnswerCategory category) const;
};

using QAKey = std::pair<std::string, std::string>;  // (frame_ref, question_id)
using QAMap = std::map<QAKey, std::string>;

// Each pair judged with the question text attached; correct iff the judge's
// score >= threshold. Buckets by category_of(ground truth); throws DataError
// when the key sets differ.
CategoryAccuracy score_run(const Forest& forest, const QAMap& predictions,
                           const QAMap& ground_truth, const Judge& judge, double threshold);

// ---------------------------------------------------------------------------
// Latency statistics
// ---------------------------------------------------------------------------

struct LatencyStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;  // sample standard deviation (n-1); 0 when n == 1
  double max_ms = 0.0;
  double min_ms = 0.0;
  std::size_t count = 0;
};

LatencyStats latency_stats(const std::vector<double>& per_frame_total_ms);  // throws on empty

nlohmann::json latency_stats_to_json(const LatencyStats& stats);
LatencyStats latency_stats_from_json(const nlohmann::json& j);  // validates invariants

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class Approach { Hierarchical, Flat };
std::string_view approach_name(Approach approach);

struct RunRecord {
  std::string approach;  // "hierarchical" | "flat" | "external"
  uint64_t seed = 0;
  std::vector<TraversalResult> frames;
};

struct AskedCountStats {
  double mean = 0.0;
  int min = 0;
  int max = 0;
};

AskedCountStats asked_count_stats(const RunRecord& run);
std::vector<double> per_frame_totals(const RunRecord& run);

struct RunComparison {
  std::string label_a, label_b;
  LatencyStats latency_a, latency_b;
  AskedCountStats asked_a, asked_b;
  double speedup_ratio = 0.0;  // mean_b / mean_a
};

// Requires both runs to cover the same frame multiset.
RunComparison compare_runs(const RunRecord& a, const RunRecord& b);

// Frame-parallel driver with per-frame simulated clocks; deterministic for
// any worker count with the bundled answerers.
RunRecord run_frames(const Forest& forest, const std::vector<std::string>& frame_refs,
                     Answerer& answerer, Approach approach, uint64_t seed, int workers = 1,
                     const TraversalOptions& options = {});

// One label per (frame, question); pruned questions predict "none".
QAMap predictions_of(const RunRecord& run);
QAMap ground_truth_of(const Forest& forest, const AnnotationSet& annotations);

// Run-record file: one JSON object per line, one line per frame.
std::string run_record_to_jsonl(const RunRecord& run);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

nlohmann::json bench_report_json(const RunComparison& comparison, std::size_t frames,
                                 int repetitions, uint64_t seed,
                                 const std::string& cost_model);
std::string bench_report_text(const RunComparison& comparison);

nlohmann::json eval_report_json(const CategoryAccuracy& accuracy, const std::string& judge,
                                double threshold, const std::string& approach,
                                std::size_t frames, uint64_t seed);
std::string eval_report_text(const CategoryAccuracy& accuracy);

}  // namespace hqa
