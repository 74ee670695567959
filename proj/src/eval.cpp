#include "hqa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "hqa/errors.hpp"
#include "hqa/labels.hpp"

namespace hqa {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Judges
// ---------------------------------------------------------------------------

namespace {

class ExactJudge final : public Judge {
 public:
  std::string_view name() const override { return "exact"; }
  double score(const std::string&, const std::string& ground_truth,
               const std::string& predicted) const override {
    return normalize_label(ground_truth) == normalize_label(predicted) ? 1.0 : 0.0;
  }
};

class SimilarityJudge final : public Judge {
 public:
  std::string_view name() const override { return "sim"; }
  double score(const std::string&, const std::string& ground_truth,
               const std::string& predicted) const override {
    return normalized_similarity(normalize_label(ground_truth), normalize_label(predicted));
  }
};

}  // namespace

std::unique_ptr<Judge> exact_judge() { return std::make_unique<ExactJudge>(); }
std::unique_ptr<Judge> similarity_judge() { return std::make_unique<SimilarityJudge>(); }

std::unique_ptr<Judge> make_judge(const std::string& spec) {
  if (spec == "exact") return exact_judge();
  if (spec == "sim" || spec == "similarity") return similarity_judge();
  throw ConfigError("unknown judge '" + spec + "' (expected exact|sim)");
}

// ---------------------------------------------------------------------------
// Categories
// ---------------------------------------------------------------------------

AnswerCategory category_of(std::string_view ground_truth) {
  if (ground_truth == "yes") return AnswerCategory::Yes;
  if (ground_truth == "no") return AnswerCategory::No;
  if (ground_truth == kNoneLabel) return AnswerCategory::None;
  return AnswerCategory::Other;
}

std::string_view category_name(AnswerCategory category) {
  switch (category) {
    case AnswerCategory::Yes: return "yes";
    case AnswerCategory::No: return "no";
    case AnswerCategory::None: return "none";
    case AnswerCategory::Other: return "other";
  }
  return "other";
}

CategoryCount& CategoryAccuracy::bucket(AnswerCategory category) {
  switch (category) {
    case AnswerCategory::Yes: return yes;
    case AnswerCategory::No: return no;
    case AnswerCategory::None: return none;
    case AnswerCategory::Other: return other;
  }
  return other;
}

const CategoryCount& CategoryAccuracy::bucket(AnswerCategory category) const {
  return const_cast<CategoryAccuracy*>(this)->bucket(category);
}

CategoryAccuracy score_run(const Forest& forest, const QAMap& predictions,
                           const QAMap& ground_truth, const Judge& judge, double threshold) {
  if (threshold <= 0.0 || threshold > 1.0) {
    throw ConfigError("judge threshold must be in (0, 1]");
  }
  if (predictions.size() != ground_truth.size()) {
    throw DataError("prediction/ground-truth key sets differ in size (" +
                    std::to_string(predictions.size()) + " vs " +
                    std::to_string(ground_truth.size()) + ")");
  }

  CategoryAccuracy acc;
  auto p = predictions.begin();
  for (const auto& [key, truth] : ground_truth) {
    if (p == predictions.end() || p->first != key) {
      throw DataError("prediction missing for frame '" + key.first + "' question '" +
                      key.second + "'");
    }
    const std::string& question_text = forest.node(key.second).text;
    const bool correct = judge.score(question_text, truth, p->second) >= threshold;
    CategoryCount& bucket = acc.bucket(category_of(truth));
    bucket.total += 1;
    acc.overall.total += 1;
    if (correct) {
      bucket.correct += 1;
      acc.overall.correct += 1;
    }
    ++p;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Latency statistics
// ---------------------------------------------------------------------------

LatencyStats latency_stats(const std::vector<double>& per_frame_total_ms) {
  if (per_frame_total_ms.empty()) throw DataError("latency stats need >=1 sample");
  LatencyStats stats;
  stats.count = per_frame_total_ms.size();
  stats.min_ms = per_frame_total_ms.front();
  stats.max_ms = per_frame_total_ms.front();
  double sum = 0.0;
  for (double v : per_frame_total_ms) {
    sum += v;
    stats.min_ms = std::min(stats.min_ms, v);
    stats.max_ms = std::max(stats.max_ms, v);
  }
  stats.mean_ms = sum / static_cast<double>(stats.count);
  if (stats.count > 1) {
    double sq = 0.0;
    for (double v : per_frame_total_ms) {
      const double d = v - stats.mean_ms;
      sq += d * d;
    }
    stats.std_ms = std::sqrt(sq / static_cast<double>(stats.count - 1));
  }
  return stats;
}

nlohmann::json latency_stats_to_json(const LatencyStats& stats) {
  return json{{"mean_ms", stats.mean_ms},
              {"std_ms", stats.std_ms},
              {"max_ms", stats.max_ms},
              {"min_ms", stats.min_ms},
              {"count", stats.count}};
}

LatencyStats latency_stats_from_json(const nlohmann::json& j) {
  LatencyStats stats;
  try {
    stats.mean_ms = j.at("mean_ms").get<double>();
    stats.std_ms = j.at("std_ms").get<double>();
    stats.max_ms = j.at("max_ms").get<double>();
    stats.min_ms = j.at("min_ms").get<double>();
    stats.count = j.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed latency stats: ") + e.what());
  }
  if (stats.std_ms < 0.0 || stats.min_ms > stats.mean_ms || stats.mean_ms > stats.max_ms) {
    throw DataError("latency stats violate min <= mean <= max, std >= 0");
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

std::string_view approach_name(Approach approach) {
  return approach == Approach::Hierarchical ? "hierarchical" : "flat";
}

AskedCountStats asked_count_stats(const RunRecord& run) {
  AskedCountStats stats;
  if (run.frames.empty()) return stats;
  stats.min = run.frames.front().asked_count;
  stats.max = run.frames.front().asked_count;
  double sum = 0.0;
  for (const TraversalResult& frame : run.frames) {
    sum += frame.asked_count;
    stats.min = std::min(stats.min, frame.asked_count);
    stats.max = std::max(stats.max, frame.asked_count);
  }
  stats.mean = sum / static_cast<double>(run.frames.size());
  return stats;
}

std::vector<double> per_frame_totals(const RunRecord& run) {
  std::vector<double> totals;
  totals.reserve(run.frames.size());
  for (const TraversalResult& frame : run.frames) totals.push_back(frame.total_elapsed_ms);
  return totals;
}

RunComparison compare_runs(const RunRecord& a, const RunRecord& b) {
  std::vector<std::string> frames_a, frames_b;
  for (const TraversalResult& f : a.frames) frames_a.push_back(f.frame_ref);
  for (const TraversalResult& f : b.frames) frames_b.push_back(f.frame_ref);
  std::sort(frames_a.begin(), frames_a.end());
  std::sort(frames_b.begin(), frames_b.end());
  if (frames_a != frames_b) {
    throw DataError("dataset mismatch: runs '" + a.approach + "' and '" + b.approach +
                    "' cover different frames");
  }

  RunComparison cmp;
  cmp.label_a = a.approach;
  cmp.label_b = b.approach;
  cmp.latency_a = latency_stats(per_frame_totals(a));
  cmp.latency_b = latency_stats(per_frame_totals(b));
  cmp.asked_a = asked_count_stats(a);
  cmp.asked_b = asked_count_stats(b);
  cmp.speedup_ratio = cmp.latency_b.mean_ms / cmp.latency_a.mean_ms;
  return cmp;
}

RunRecord run_frames(const Forest& forest, const std::vector<std::string>& frame_refs,
                     Answerer& answerer, Approach approach, uint64_t seed, int workers,
                     const TraversalOptions& options) {
  RunRecord run;
  run.approach = std::string(approach_name(approach));
  run.seed = seed;
  run.frames.resize(frame_refs.size());

  const int n_workers =
      std::max(1, std::min<int>(workers, static_cast<int>(frame_refs.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= frame_refs.size()) return;
      try {
        SimClock clock;
        run.frames[i] = approach == Approach::Hierarchical
                            ? traverse_hierarchical(forest, answerer, frame_refs[i], clock,
                                                    options)
                            : traverse_flat(forest, answerer, frame_refs[i], clock, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(frame_refs.size());
        return;
      }
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return run;
}

QAMap predictions_of(const RunRecord& run) {
  QAMap out;
  for (const TraversalResult& frame : run.frames) {
    for (const TraversalRecord& record : frame.records) {
      out[{frame.frame_ref, record.question_id}] = record.answer;
    }
  }
  return out;
}

QAMap ground_truth_of(const Forest& forest, const AnnotationSet& annotations) {
  QAMap out;
  for (const FrameAnnotation& frame : annotations.frames()) {
    for (const std::string& id : forest.canonical_order()) {
      out[{frame.frame_id, id}] = frame.answers.at(id);
    }
  }
  return out;
}

std::string run_record_to_jsonl(const RunRecord& run) {
  std::string out;
  for (const TraversalResult& frame : run.frames) {
    json records = json::array();
    for (const TraversalRecord& record : frame.records) {
      records.push_back({{"question_id", record.question_id},
                         {"status", std::string(record_status_name(record.status))},
                         {"answer", record.answer},
                         {"elapsed_ms", record.elapsed_ms}});
    }
    json line{{"frame_ref", frame.frame_ref},
              {"approach", run.approach},
              {"seed", run.seed},
              {"asked_count", frame.asked_count},
              {"total_elapsed_ms", frame.total_elapsed_ms},
              {"records", std::move(records)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

nlohmann::json bench_report_json(const RunComparison& comparison, std::size_t frames,
                                 int repetitions, uint64_t seed,
                                 const std::string& cost_model) {
  auto approach = [](const LatencyStats& latency, const AskedCountStats& asked) {
    return json{{"latency_ms", latency_stats_to_json(latency)},
                {"asked_count", {{"mean", asked.mean}, {"min", asked.min}, {"max", asked.max}}}};
  };
  return json{{"approaches",
               {{comparison.label_a, approach(comparison.latency_a, comparison.asked_a)},
                {comparison.label_b, approach(comparison.latency_b, comparison.asked_b)}}},
              {"speedup_ratio", comparison.speedup_ratio},
              {"frames", frames},
              {"repetitions", repetitions},
              {"seed", seed},
              {"cost_model", cost_model}};
}

std::string bench_report_text(const RunComparison& comparison) {
  char buf[160];
  std::string out = "Approach            Mean (ms)    STD (ms)    Max (ms)    Min (ms)\n";
  auto row = [&](const std::string& label, const LatencyStats& s) {
    std::snprintf(buf, sizeof(buf), "%-18s %10.2f  %10.2f  %10.2f  %10.2f\n", label.c_str(),
                  s.mean_ms, s.std_ms, s.max_ms, s.min_ms);
    out += buf;
  };
  row(comparison.label_a, comparison.latency_a);
  row(comparison.label_b, comparison.latency_b);
  std::snprintf(buf, sizeof(buf), "speedup ratio (%s / %s): %.3f\n", comparison.label_b.c_str(),
                comparison.label_a.c_str(), comparison.speedup_ratio);
  out += buf;
  std::snprintf(buf, sizeof(buf), "asked per frame: %s mean %.2f [%d, %d], %s mean %.2f [%d, %d]\n",
                comparison.label_a.c_str(), comparison.asked_a.mean, comparison.asked_a.min,
                comparison.asked_a.max, comparison.label_b.c_str(), comparison.asked_b.mean,
                comparison.asked_b.min, comparison.asked_b.max);
  out += buf;
  return out;
}

nlohmann::json eval_report_json(const CategoryAccuracy& accuracy, const std::string& judge,
                                double threshold, const std::string& approach,
                                std::size_t frames, uint64_t seed) {
  auto row = [](const CategoryCount& c) {
    return json{{"correct", c.correct}, {"total", c.total}, {"percent", c.percent()}};
  };
  return json{{"categories",
               {{"yes", row(accuracy.yes)},
                {"no", row(accuracy.no)},
                {"none", row(accuracy.none)},
                {"other", row(accuracy.other)},
                {"total", row(accuracy.overall)}}},
              {"judge", judge},
              {"threshold", threshold},
              {"approach", approach},
              {"frames", frames},
              {"seed", seed}};
}

std::string eval_report_text(const CategoryAccuracy& accuracy) {
  char buf[96];
  std::string out = "Answer Category    Accuracy (%)    Correct/Total\n";
  auto row = [&](const char* label, const CategoryCount& c) {
    std::snprintf(buf, sizeof(buf), "%-16s %14.2f    %zu/%zu\n", label, c.percent(), c.correct,
                  c.total);
    out += buf;
  };
  row("Yes", accuracy.yes);
  row("No", accuracy.no);
  row("None", accuracy.none);
  row("Other", accuracy.other);
  row("Total", accuracy.overall);
  return out;
}

}  // namespace hqa
