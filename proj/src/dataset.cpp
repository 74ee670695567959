#include "hqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hqa/errors.hpp"
#include "hqa/rng.hpp"
#include "hqa/traversal.hpp"

namespace hqa {

using nlohmann::json;

// ---------------------------------------------------------------------------
// AnnotationSet
// ---------------------------------------------------------------------------

void AnnotationSet::add(FrameAnnotation frame) {
  auto [it, inserted] = index_.emplace(frame.frame_id, frames_.size());
  if (!inserted) throw DataError("duplicate frame_id '" + frame.frame_id + "'");
  frames_.push_back(std::move(frame));
}

const FrameAnnotation* AnnotationSet::find(std::string_view frame_id) const {
  auto it = index_.find(std::string(frame_id));
  return it == index_.end() ? nullptr : &frames_[it->second];
}

const FrameAnnotation& AnnotationSet::at(std::string_view frame_id) const {
  const FrameAnnotation* f = find(frame_id);
  if (!f) throw DataError("unknown frame '" + std::string(frame_id) + "'");
  return *f;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "comprehensive area exploration", "unprotected left turn", "pedestrian on the road",
      "vehicle blocking the road", "merging traffic"};
  return names;
}

std::string normalize_scenario(std::string_view raw) {
  std::string s = normalize_label(raw);
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

bool is_known_scenario(std::string_view name) {
  const auto& names = scenario_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

// ---------------------------------------------------------------------------
// CSV (RFC4180-ish: quoted fields, "" escapes, one record per line)
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

AnnotationSet parse_annotations(const std::string& csv_text, const Forest& forest) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("annotation file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv_row(line);
  if (header.size() < 3 || header[0] != "frame_id" || header[1] != "image_ref" ||
      header[2] != "scenario") {
    throw DataError("annotation header must start with frame_id,image_ref,scenario");
  }

  // Map header question columns onto the forest; every node must be covered.
  std::map<std::string, std::size_t> column_of;
  for (std::size_t i = 3; i < header.size(); ++i) {
    const std::string& id = header[i];
    if (!forest.has(id)) throw DataError("unknown question column '" + id + "'");
    if (!column_of.emplace(id, i).second) {
      throw DataError("duplicate question column '" + id + "'");
    }
  }
  for (const std::string& id : forest.canonical_order()) {
    if (!column_of.count(id)) throw DataError("missing question column '" + id + "'");
  }

  AnnotationSet out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row = split_csv_row(line);
    if (row.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(row.size()));
    }

    FrameAnnotation frame;
    frame.frame_id = row[0];
    frame.image_ref = row[1];
    frame.scenario = normalize_scenario(row[2]);
    if (frame.frame_id.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty frame_id");
    }
    if (!is_known_scenario(frame.scenario)) {
      throw DataError("line " + std::to_string(line_no) + ": unknown scenario '" +
                      frame.scenario + "'");
    }
    for (const auto& [id, col] : column_of) {
      std::string label = normalize_label(row[col]);
      if (label != kNoneLabel && !forest.node(id).domain.contains(label)) {
        throw DataError("frame '" + frame.frame_id + "': unknown label '" + label +
                        "' for question '" + id + "'");
      }
      frame.answers.emplace(id, std::move(label));
    }
    out.add(std::move(frame));
  }
  return out;
}

AnnotationSet load_annotations(const std::string& path, const Forest& forest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotation file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_annotations(buf.str(), forest);
}

std::string serialize_annotations(const AnnotationSet& annotations, const Forest& forest) {
  std::ostringstream out;
  out << "frame_id,image_ref,scenario";
  for (const std::string& id : forest.canonical_order()) out << ',' << csv_escape(id);
  out << '\n';
  for (const FrameAnnotation& frame : annotations.frames()) {
    out << csv_escape(frame.frame_id) << ',' << csv_escape(frame.image_ref) << ','
        << csv_escape(frame.scenario);
    for (const std::string& id : forest.canonical_order()) {
      out << ',' << csv_escape(frame.answers.at(id));
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Consistency
// ---------------------------------------------------------------------------

std::vector<ConsistencyViolation> check_consistency(const Forest& forest,
                                                    const AnnotationSet& annotations) {
  std::vector<ConsistencyViolation> out;
  for (const FrameAnnotation& frame : annotations.frames()) {
    std::set<std::string> pruned = pruned_set(forest, frame.answers);
    for (const std::string& id : forest.canonical_order()) {
      const std::string& label = frame.answers.at(id);
      if (pruned.count(id)) {
        if (label != kNoneLabel) {
          out.push_back({frame.frame_id, id, "expected-none",
                         "frame '" + frame.frame_id + "': expected none at " + id +
                             " (an ancestor gate fails), got '" + label + "'"});
        }
      } else if (label == kNoneLabel) {
        out.push_back({frame.frame_id, id, "unexpected-none",
                       "frame '" + frame.frame_id + "': unexpected none at " + id +
                           " (all gates to it pass)"});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

SplitPlan SplitPlan::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("split plan: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw ConfigError("split plan: expected {\"scenarios\": [...]}");
  }
  SplitPlan plan;
  for (const json& row : doc["scenarios"]) {
    SplitPlanRow r;
    if (!row.is_object() || !row.contains("name") || !row.contains("frames") ||
        !row.contains("train_fraction")) {
      throw ConfigError("split plan: each row needs name, frames, train_fraction");
    }
    r.scenario = normalize_scenario(row["name"].get<std::string>());
    r.frames = row["frames"].get<std::size_t>();
    r.train_fraction = row["train_fraction"].get<double>();
    if (r.train_fraction < 0.0 || r.train_fraction > 1.0) {
      throw ConfigError("split plan: train_fraction for '" + r.scenario +
                        "' must be in [0, 1]");
    }
    plan.rows.push_back(std::move(r));
  }
  return plan;
}

SplitPlan SplitPlan::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open split plan '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

SplitPlan SplitPlan::table_defaults() {
  SplitPlan plan;
  plan.rows = {{"comprehensive area exploration", 250, 0.75},
               {"unprotected left turn", 117, 0.80},
               {"pedestrian on the road", 60, 0.80},
               {"vehicle blocking the road", 20, 1.0},
               {"merging traffic", 18, 1.0}};
  return plan;
}

DatasetSplit split_dataset(const AnnotationSet& annotations, const SplitPlan& plan,
                           uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_scenario;
  for (const FrameAnnotation& frame : annotations.frames()) {
    by_scenario[frame.scenario].push_back(frame.frame_id);
  }

  std::set<std::string> planned;
  for (const SplitPlanRow& row : plan.rows) planned.insert(row.scenario);
  for (const auto& [scenario, ids] : by_scenario) {
    if (!planned.count(scenario)) {
      throw DataError("scenario count mismatch: dataset scenario '" + scenario +
                      "' is missing from the plan");
    }
  }

  std::set<std::string> train_ids;
  for (const SplitPlanRow& row : plan.rows) {
    auto it = by_scenario.find(row.scenario);
    const std::size_t actual = it == by_scenario.end() ? 0 : it->second.size();
    if (actual != row.frames) {
      throw DataError("scenario count mismatch for '" + row.scenario + "': plan says " +
                      std::to_string(row.frames) + ", dataset has " + std::to_string(actual));
    }
    if (actual == 0) continue;
    // floor() on the exact product; the epsilon absorbs binary representation
    // error in fractions like 0.8.
    const auto train_n = static_cast<std::size_t>(
        std::floor(static_cast<double>(actual) * row.train_fraction + 1e-9));
    std::vector<std::string> pool = it->second;
    auto rng = derived_stream(seed, {"split", row.scenario});
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < train_n && i < pool.size(); ++i) train_ids.insert(pool[i]);
  }

  DatasetSplit split;
  for (const FrameAnnotation& frame : annotations.frames()) {
    if (train_ids.count(frame.frame_id)) split.train.push_back(frame.frame_id);
    else split.val.push_back(frame.frame_id);
  }
  const std::size_t node_count =
      annotations.empty() ? 0 : annotations.frames().front().answers.size();
  split.train_qa_pairs = split.train.size() * node_count;
  split.val_qa_pairs = split.val.size() * node_count;
  return split;
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

DatasetStats dataset_stats(const AnnotationSet& annotations, const Forest& forest) {
  DatasetStats stats;
  stats.frames = annotations.size();
  stats.qa_pairs = stats.frames * forest.size();
  std::map<std::string, std::size_t> scenario_index;
  for (const FrameAnnotation& frame : annotations.frames()) {
    auto [it, inserted] = scenario_index.emplace(frame.scenario, stats.per_scenario.size());
    if (inserted) stats.per_scenario.emplace_back(frame.scenario, 0);
    stats.per_scenario[it->second].second += 1;
    for (const auto& [id, label] : frame.answers) {
      (void)id;
      stats.label_histogram[label] += 1;
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

SyntheticMix SyntheticMix::table_defaults() {
  SyntheticMix mix;
  mix.weights = {{"comprehensive area exploration", 250},
                 {"unprotected left turn", 117},
                 {"pedestrian on the road", 60},
                 {"vehicle blocking the road", 20},
                 {"merging traffic", 18}};
  return mix;
}

namespace {

// Largest-remainder apportionment; exact when weights are integer counts
// summing to n.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw ConfigError("scenario mix weights must sum to > 0");
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = static_cast<double>(n) * weights[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    counts[remainders[k % remainders.size()].second] += 1;
  }
  return counts;
}

struct SyntheticWalker {
  const Forest& forest;
  const std::vector<double>& probs;
  std::mt19937_64& rng;
  std::map<std::string, std::string>& answers;

  double prob_at_depth(std::size_t parent_depth) const {
    if (probs.empty()) return kCalibratedGatePassProb;
    return probs[std::min(parent_depth - 1, probs.size() - 1)];
  }

  void visit(const std::string& id, bool reachable, std::size_t depth) {
    const QuestionNode& node = forest.node(id);
    if (!reachable) {
      answers[id] = std::string(kNoneLabel);
      for (const ChildLink& link : node.children) visit(link.id, false, depth + 1);
      return;
    }
    std::string answer;
    if (node.children.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, node.domain.labels.size() - 1);
      answer = node.domain.labels[pick(rng)];
    } else {
      // Activating labels in domain order, then the complement.
      std::vector<const std::string*> gate_labels, other_labels;
      for (const std::string& label : node.domain.labels) {
        bool gates = false;
        for (const ChildLink& link : node.children) {
          if (link.gate.passes(label)) {
            gates = true;
            break;
          }
        }
        (gates ? gate_labels : other_labels).push_back(&label);
      }
      const double p = prob_at_depth(depth);
      const bool pass =
          other_labels.empty() ||
          (!gate_labels.empty() && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p);
      const auto& pool = pass ? gate_labels : other_labels;
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      answer = *pool[pick(rng)];
    }
    answers[id] = answer;
    for (const ChildLink& link : node.children) {
      visit(link.id, link.gate.passes(answer), depth + 1);
    }
  }
};

}  // namespace

AnnotationSet generate_synthetic_dataset(const Forest& forest, std::size_t n_frames,
                                         const SyntheticMix& mix,
                                         const std::vector<double>& gate_pass_probs,
                                         uint64_t seed) {
  for (double p : gate_pass_probs) {
    if (p < 0.0 || p > 1.0) throw ConfigError("gate-pass probabilities must be in [0, 1]");
  }
  if (mix.weights.empty()) throw ConfigError("scenario mix must not be empty");
  for (const auto& [scenario, weight] : mix.weights) {
    if (!is_known_scenario(scenario)) {
      throw ConfigError("unknown scenario '" + scenario + "' in mix");
    }
    if (weight < 0.0) throw ConfigError("scenario mix weights must be >= 0");
  }

  std::vector<double> weights;
  for (const auto& [scenario, weight] : mix.weights) weights.push_back(weight);
  std::vector<std::size_t> counts = apportion(n_frames, weights);

  AnnotationSet out;
  std::size_t frame_no = 0;
  for (std::size_t s = 0; s < mix.weights.size(); ++s) {
    for (std::size_t i = 0; i < counts[s]; ++i) {
      char buf[24];
      std::snprintf(buf, sizeof(buf), "synth_%06zu", ++frame_no);
      FrameAnnotation frame;
      frame.frame_id = buf;
      frame.image_ref = "frames/" + frame.frame_id + ".png";
      frame.scenario = mix.weights[s].first;

      auto rng = derived_stream(seed, {"synth", frame.frame_id});
      SyntheticWalker walker{forest, gate_pass_probs, rng, frame.answers};
      for (const std::string& root : forest.roots()) walker.visit(root, true, 1);
      out.add(std::move(frame));
    }
  }
  return out;
}

}  // namespace hqa
