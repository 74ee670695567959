#pragma once

// Frame annotations over a question forest: CSV ingestion (wide format, one
// column per question), none-propagation consistency checks, scenario-
// stratified train/val splits, and a consistent-by-construction synthetic
// dataset generator for desk-scale benchmarks.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hqa/forest.hpp"

namespace hqa {

struct FrameAnnotation {
  std::string frame_id;
  std::string image_ref;
  std::string scenario;
  std::map<std::string, std::string> answers;  // total over the forest, may hold "none"

  bool operator==(const FrameAnnotation&) const = default;
};

class AnnotationSet {
 public:
  void add(FrameAnnotation frame);  // throws DataError on a duplicate frame id

  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  const std::vector<FrameAnnotation>& frames() const { return frames_; }
  const FrameAnnotation* find(std::string_view frame_id) const;
  const FrameAnnotation& at(std::string_view frame_id) const;  // throws DataError

 private:
  std::vector<FrameAnnotation> frames_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Scenario vocabulary of the dataset summary; annotations must use one of
// these (underscores accepted in files and normalized to spaces).
const std::vector<std::string>& scenario_names();
bool is_known_scenario(std::string_view name);
std::string normalize_scenario(std::string_view raw);

struct SplitPlanRow {
  std::string scenario;
  std::size_t frames = 0;
  double train_fraction = 0.0;  // in [0, 1]
};

struct SplitPlan {
  std::vector<SplitPlanRow> rows;

  static SplitPlan parse(const std::string& json_text);
  static SplitPlan from_file(const std::string& path);
  // The published plan: 250@0.75, 117@0.80, 60@0.80, 20@1.0, 18@1.0.
  static SplitPlan table_defaults();
};

struct DatasetSplit {
  std::vector<std::string> train;  // frame ids, dataset order
  std::vector<std::string> val;
  std::size_t train_qa_pairs = 0;
  std::size_t val_qa_pairs = 0;
};

struct DatasetStats {
  std::size_t frames = 0;
  std::size_t qa_pairs = 0;
  std::vector<std::pair<std::string, std::size_t>> per_scenario;  // first-seen order
  std::map<std::string, std::size_t> label_histogram;             // includes "none"
};

struct ConsistencyViolation {
  std::string frame_id;
  std::string question_id;
  std::string rule;  // "expected-none" | "unexpected-none"
  std::string message;
};

AnnotationSet parse_annotations(const std::string& csv_text, const Forest& forest);
AnnotationSet load_annotations(const std::string& path, const Forest& forest);
std::string serialize_annotations(const AnnotationSet& annotations, const Forest& forest);

// Flags every frame/question where gating demands "none" but the label
// differs, and every "none" on a question whose gates all pass. Violations
// are warnings; the engine still runs on inconsistent data.
std::vector<ConsistencyViolation> check_consistency(const Forest& forest,
                                                    const AnnotationSet& annotations);

// Per scenario: train takes floor(frames * fraction) frames sampled without
// replacement (seeded), the remainder goes to val.
DatasetSplit split_dataset(const AnnotationSet& annotations, const SplitPlan& plan,
                           uint64_t seed);

DatasetStats dataset_stats(const AnnotationSet& annotations, const Forest& forest);

struct SyntheticMix {
  std::vector<std::pair<std::string, double>> weights;  // scenario -> weight

  // Scenario weights proportional to the published 250/117/60/20/18 counts.
  static SyntheticMix table_defaults();
};

// Gate-pass probability that lands the 41-node synthetic forest at a mean
// asked-count of ~11 questions per frame.
inline constexpr double kCalibratedGatePassProb = 0.2323;

// Walks the forest per frame: each gating node's answer activates its
// children with the depth-indexed probability (last entry repeats); leaves
// draw uniformly from their domain; everything behind a failed gate is
// labeled "none". Consistent by construction.
AnnotationSet generate_synthetic_dataset(const Forest& forest, std::size_t n_frames,
                                         const SyntheticMix& mix,
                                         const std::vector<double>& gate_pass_probs,
                                         uint64_t seed);

}  // namespace hqa
