// hqa — gated question-forest inference CLI: validate forests, run single
// frames, benchmark hierarchical vs flat traversal, score accuracy, and
// split datasets. All randomness flows from one --seed via labeled
// derivation, so every command is reproducible with the bundled answerers.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hqa/dataset.hpp"
#include "hqa/errors.hpp"
#include "hqa/eval.hpp"
#include "hqa/forest.hpp"
#include "hqa/remote.hpp"
#include "hqa/rng.hpp"
#include "hqa/synthesis.hpp"
#include "hqa/traversal.hpp"

namespace fs = std::filesystem;
using namespace hqa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnknown = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNetwork = 4;
constexpr int kExitValidation = 5;

// Per-question cost matching the reference flat-baseline mean over 41
// questions; override with --cost-model.
constexpr double kDefaultCostMs = 1573.0 / 41.0;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

struct AnswererSpec {
  std::string kind = "oracle";  // oracle | scripted | remote
  double noise = 0.0;
  std::string cost_model;  // empty -> constant default
  std::string script_path;
  std::string endpoint;
  double timeout_ms = 5000;
  int retries = 3;
};

void add_answerer_flags(CLI::App* cmd, AnswererSpec& spec) {
  cmd->add_option("--answerer", spec.kind, "Answer backend: oracle, scripted, or remote")
      ->check(CLI::IsMember({"oracle", "scripted", "remote"}));
  cmd->add_option("--noise", spec.noise, "Oracle flip probability in [0,1]");
  cmd->add_option("--cost-model", spec.cost_model,
                  "Latency model: constant:MS | gaussian:MEAN,STD | empirical:FILE");
  cmd->add_option("--script", spec.script_path,
                  "Script CSV (frame_id,question_id,label) for --answerer scripted");
  cmd->add_option("--endpoint", spec.endpoint, "Remote answerer URL (env HQA_ENDPOINT wins)");
  cmd->add_option("--timeout-ms", spec.timeout_ms, "Remote request timeout");
  cmd->add_option("--retries", spec.retries, "Remote retry budget (total attempts)");
}

LatencyModel latency_of(const AnswererSpec& spec) {
  if (spec.cost_model.empty()) return LatencyModel::constant(kDefaultCostMs);
  return LatencyModel::parse(spec.cost_model);
}

std::string effective_cost_model(const AnswererSpec& spec) {
  return spec.cost_model.empty() ? "constant:" + std::to_string(kDefaultCostMs)
                                 : spec.cost_model;
}

std::map<ScriptKey, std::string> load_script(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("script file '" + path + "' is empty");
  std::map<ScriptKey, std::string> script;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string frame, question, label;
    if (!std::getline(row, frame, ',') || !std::getline(row, question, ',') ||
        !std::getline(row, label)) {
      throw ConfigError("script '" + path + "' line " + std::to_string(line_no) +
                        ": expected frame_id,question_id,label");
    }
    script[{frame, question}] = label;
  }
  return script;
}

std::unique_ptr<Answerer> build_answerer(const AnswererSpec& spec,
                                         const AnnotationSet& annotations, uint64_t seed) {
  if (spec.kind == "oracle") {
    return oracle_answerer(annotations, spec.noise, latency_of(spec), seed);
  }
  if (spec.kind == "scripted") {
    if (spec.script_path.empty()) throw ConfigError("--answerer scripted requires --script");
    return scripted_answerer(load_script(spec.script_path), latency_of(spec), seed);
  }
  RemoteOptions options;
  options.endpoint = spec.endpoint;
  if (const char* env = std::getenv("HQA_ENDPOINT"); env && *env) options.endpoint = env;
  if (options.endpoint.empty()) {
    throw ConfigError("--answerer remote requires --endpoint or HQA_ENDPOINT");
  }
  options.timeout_ms = spec.timeout_ms;
  options.retry.max_attempts = spec.retries;
  return remote_answerer(std::move(options));
}

Approach parse_mode(const std::string& mode) {
  if (mode == "hier" || mode == "hierarchical") return Approach::Hierarchical;
  if (mode == "flat") return Approach::Flat;
  throw ConfigError("unknown mode '" + mode + "' (expected hier|flat)");
}

std::vector<std::string> frame_ids_of(const AnnotationSet& annotations) {
  std::vector<std::string> ids;
  ids.reserve(annotations.size());
  for (const FrameAnnotation& frame : annotations.frames()) ids.push_back(frame.frame_id);
  return ids;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& forest_path) {
  Forest forest = parse_forest_unchecked(read_file(forest_path));
  std::vector<Violation> violations = validate_forest(forest);
  ForestStats stats = forest_stats(forest);

  std::cout << "forest: " << stats.node_count << " questions, " << stats.root_count
            << " roots, max depth " << stats.max_depth << "\n";
  for (const auto& [root, size] : stats.subtree_sizes) {
    std::cout << "  root " << root << ": " << size << " questions\n";
  }
  if (!violations.empty()) {
    for (const Violation& v : violations) {
      std::cout << "violation [" << v.rule << "] " << v.message << "\n";
    }
    std::cout << violations.size() << " violation(s)\n";
    return kExitValidation;
  }
  std::cout << "ok\n";
  return kExitOk;
}

struct InferArgs {
  std::string forest_path, dataset_path, frame, mode = "hier", out_dir;
  AnswererSpec answerer;
  uint64_t seed = 0;
  bool lenient = false;
};

int cmd_infer(const InferArgs& args) {
  Forest forest = parse_forest(read_file(args.forest_path));
  AnnotationSet annotations = load_annotations(args.dataset_path, forest);
  if (!annotations.find(args.frame)) throw DataError("unknown frame '" + args.frame + "'");

  std::unique_ptr<Answerer> answerer = build_answerer(args.answerer, annotations, args.seed);
  TraversalOptions options;
  options.label_mode = args.lenient ? LabelMode::Lenient : LabelMode::Strict;

  const Approach approach = parse_mode(args.mode);
  std::unique_ptr<Clock> clock;
  if (args.answerer.kind == "remote") clock = std::make_unique<SteadyClock>();
  else clock = std::make_unique<SimClock>();

  TraversalResult result =
      approach == Approach::Hierarchical
          ? traverse_hierarchical(forest, *answerer, args.frame, *clock, options)
          : traverse_flat(forest, *answerer, args.frame, *clock, options);

  std::cout << "frame " << args.frame << " (" << approach_name(approach) << "): asked "
            << result.asked_count << " of " << forest.size() << " questions, "
            << result.total_elapsed_ms << " ms total\n";
  for (const TraversalRecord& record : result.records) {
    char line[160];
    std::snprintf(line, sizeof(line), "%3d  %-14s %-7s %-22s %9.2f ms", record.order_index,
                  record.question_id.c_str(),
                  std::string(record_status_name(record.status)).c_str(),
                  record.answer.c_str(), record.elapsed_ms);
    std::cout << line;
    if (record.coerced) std::cout << "  (coerced)";
    if (record.defaulted) std::cout << "  (defaulted)";
    std::cout << "\n";
  }

  SceneDescription description = synthesize(forest, result);
  std::cout << "description: " << description.rendered << "\n";

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    RunRecord run{std::string(approach_name(approach)), args.seed, {result}};
    write_file(fs::path(args.out_dir) / "run_record.jsonl", run_record_to_jsonl(run));
    write_file(fs::path(args.out_dir) / "description.txt",
               args.frame + "\t" + description.rendered + "\n");
  }
  return kExitOk;
}

struct BenchArgs {
  std::string forest_path, dataset_path, out_dir;
  AnswererSpec answerer;
  uint64_t seed = 0;
  int repetitions = 1;
  int workers = 1;
};

int cmd_bench(const BenchArgs& args) {
  Forest forest = parse_forest(read_file(args.forest_path));
  AnnotationSet annotations = load_annotations(args.dataset_path, forest);
  const std::vector<std::string> frames = frame_ids_of(annotations);
  if (frames.empty()) throw DataError("dataset has no frames");

  RunRecord hier{std::string(approach_name(Approach::Hierarchical)), args.seed, {}};
  RunRecord flat{std::string(approach_name(Approach::Flat)), args.seed, {}};
  for (int rep = 0; rep < std::max(1, args.repetitions); ++rep) {
    const uint64_t rep_seed = derive_seed(args.seed, {"rep", std::to_string(rep)});
    std::unique_ptr<Answerer> answerer = build_answerer(args.answerer, annotations, rep_seed);
    RunRecord h = run_frames(forest, frames, *answerer, Approach::Hierarchical, rep_seed,
                             args.workers);
    RunRecord f = run_frames(forest, frames, *answerer, Approach::Flat, rep_seed, args.workers);
    hier.frames.insert(hier.frames.end(), h.frames.begin(), h.frames.end());
    flat.frames.insert(flat.frames.end(), f.frames.begin(), f.frames.end());
  }

  RunComparison comparison = compare_runs(flat, hier);
  std::cout << bench_report_text(comparison);

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    nlohmann::json report =
        bench_report_json(comparison, frames.size(), std::max(1, args.repetitions), args.seed,
                          effective_cost_model(args.answerer));
    write_file(fs::path(args.out_dir) / "bench_report.json", report.dump(2) + "\n");
    write_file(fs::path(args.out_dir) / "run_hierarchical.jsonl", run_record_to_jsonl(hier));
    write_file(fs::path(args.out_dir) / "run_flat.jsonl", run_record_to_jsonl(flat));
  }
  return kExitOk;
}

struct EvalArgs {
  std::string forest_path, dataset_path, mode = "hier", judge = "exact", out_dir;
  double threshold = kDefaultJudgeThreshold;
  AnswererSpec answerer;
  uint64_t seed = 0;
  int workers = 1;
  bool lenient = false;
};

int cmd_eval(const EvalArgs& args) {
  Forest forest = parse_forest(read_file(args.forest_path));
  AnnotationSet annotations = load_annotations(args.dataset_path, forest);
  const std::vector<std::string> frames = frame_ids_of(annotations);
  if (frames.empty()) throw DataError("dataset has no frames");

  std::unique_ptr<Answerer> answerer = build_answerer(args.answerer, annotations, args.seed);
  TraversalOptions options;
  options.label_mode = args.lenient ? LabelMode::Lenient : LabelMode::Strict;
  const Approach approach = parse_mode(args.mode);

  RunRecord run = run_frames(forest, frames, *answerer, approach, args.seed, args.workers,
                             options);
  QAMap predictions = predictions_of(run);
  QAMap truth = ground_truth_of(forest, annotations);
  std::unique_ptr<Judge> judge = make_judge(args.judge);
  CategoryAccuracy accuracy = score_run(forest, predictions, truth, *judge, args.threshold);

  std::cout << eval_report_text(accuracy);

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    nlohmann::json report =
        eval_report_json(accuracy, args.judge, args.threshold,
                         std::string(approach_name(approach)), frames.size(), args.seed);
    write_file(fs::path(args.out_dir) / "eval_report.json", report.dump(2) + "\n");
    write_file(fs::path(args.out_dir) / ("run_" + std::string(approach_name(approach)) +
                                         ".jsonl"),
               run_record_to_jsonl(run));
  }
  return kExitOk;
}

struct SplitArgs {
  std::string forest_path, dataset_path, plan_path, out_dir = ".";
  uint64_t seed = 0;
};

int cmd_split(const SplitArgs& args) {
  Forest forest = parse_forest(read_file(args.forest_path));
  AnnotationSet annotations = load_annotations(args.dataset_path, forest);
  SplitPlan plan = SplitPlan::from_file(args.plan_path);
  DatasetSplit split = split_dataset(annotations, plan, args.seed);

  std::cout << "train: " << split.train.size() << " frames (" << split.train_qa_pairs
            << " qa pairs)\n";
  std::cout << "val:   " << split.val.size() << " frames (" << split.val_qa_pairs
            << " qa pairs)\n";

  fs::create_directories(args.out_dir);
  std::string train_txt, val_txt;
  for (const std::string& id : split.train) train_txt += id + "\n";
  for (const std::string& id : split.val) val_txt += id + "\n";
  write_file(fs::path(args.out_dir) / "train.txt", train_txt);
  write_file(fs::path(args.out_dir) / "val.txt", val_txt);

  std::map<std::string, std::pair<std::size_t, std::size_t>> per_scenario;  // train, val
  std::set<std::string> train_ids(split.train.begin(), split.train.end());
  for (const FrameAnnotation& frame : annotations.frames()) {
    auto& counts = per_scenario[frame.scenario];
    if (train_ids.count(frame.frame_id)) counts.first += 1;
    else counts.second += 1;
  }
  nlohmann::json scenarios = nlohmann::json::array();
  for (const SplitPlanRow& row : plan.rows) {
    const auto& counts = per_scenario[row.scenario];
    scenarios.push_back({{"scenario", row.scenario},
                         {"frames", row.frames},
                         {"train", counts.first},
                         {"val", counts.second}});
  }
  nlohmann::json stats{{"seed", args.seed},
                       {"train_frames", split.train.size()},
                       {"val_frames", split.val.size()},
                       {"train_qa_pairs", split.train_qa_pairs},
                       {"val_qa_pairs", split.val_qa_pairs},
                       {"per_scenario", std::move(scenarios)}};
  write_file(fs::path(args.out_dir) / "split_stats.json", stats.dump(2) + "\n");
  return kExitOk;
}

struct GenForestArgs {
  std::size_t nodes = 41;
  std::string out_path;
};

int cmd_gen_forest(const GenForestArgs& args) {
  const std::string text = serialize_forest(make_synthetic_forest(args.nodes));
  if (args.out_path.empty()) std::cout << text;
  else write_file(args.out_path, text);
  return kExitOk;
}

struct GenDataArgs {
  std::string forest_path, mix_spec, pass_prob_spec, out_path;
  std::size_t frames = 465;
  uint64_t seed = 0;
};

SyntheticMix parse_mix(const std::string& spec) {
  if (spec.empty()) return SyntheticMix::table_defaults();
  SyntheticMix mix;
  std::istringstream in(spec);
  std::string entry;
  while (std::getline(in, entry, ',')) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("bad --mix entry '" + entry + "' (expected scenario=weight)");
    }
    mix.weights.emplace_back(normalize_scenario(entry.substr(0, eq)),
                             std::stod(entry.substr(eq + 1)));
  }
  return mix;
}

std::vector<double> parse_probs(const std::string& spec) {
  std::vector<double> probs;
  if (spec.empty()) return probs;
  std::istringstream in(spec);
  std::string entry;
  while (std::getline(in, entry, ',')) probs.push_back(std::stod(entry));
  return probs;
}

int cmd_gen_data(const GenDataArgs& args) {
  Forest forest = parse_forest(read_file(args.forest_path));
  AnnotationSet annotations = generate_synthetic_dataset(
      forest, args.frames, parse_mix(args.mix_spec), parse_probs(args.pass_prob_spec),
      args.seed);
  const std::string text = serialize_annotations(annotations, forest);
  if (args.out_path.empty()) std::cout << text;
  else write_file(args.out_path, text);
  return kExitOk;
}

struct ScoreArgs {
  std::string endpoint, image_ref, description, ground_truth, prompt_path;
  double timeout_ms = 10000;
  bool with_gt = false;
};

int cmd_score_description(const ScoreArgs& args) {
  DescriptionScoreRequest request;
  request.image_ref = args.image_ref;
  request.description = args.description;
  if (args.with_gt) request.ground_truth = args.ground_truth;
  if (!args.prompt_path.empty()) request.prompt_template = read_file(args.prompt_path);
  request.timeout_ms = args.timeout_ms;

  std::string endpoint = args.endpoint;
  if (const char* env = std::getenv("HQA_ENDPOINT"); env && *env) endpoint = env;
  if (endpoint.empty()) throw ConfigError("score-description requires --endpoint or HQA_ENDPOINT");

  const int score = remote_description_score(endpoint, request, &std::cerr);
  std::cout << score << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hqa — gated question-forest scene description engine"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "Parse a forest config and list violations");
  std::string validate_forest_path;
  validate->add_option("--forest", validate_forest_path, "Forest config JSON")->required();

  // infer
  auto* infer = app.add_subcommand("infer", "Run one frame and print the description");
  InferArgs infer_args;
  infer->add_option("--forest", infer_args.forest_path)->required();
  infer->add_option("--dataset", infer_args.dataset_path)->required();
  infer->add_option("--frame", infer_args.frame)->required();
  infer->add_option("--mode", infer_args.mode, "hier|flat");
  infer->add_option("--seed", infer_args.seed);
  infer->add_option("--out", infer_args.out_dir, "Directory for run records");
  infer->add_flag("--lenient", infer_args.lenient, "Coerce out-of-domain answers");
  add_answerer_flags(infer, infer_args.answerer);

  // bench
  auto* bench = app.add_subcommand("bench", "Hierarchical vs flat latency report");
  BenchArgs bench_args;
  bench->add_option("--forest", bench_args.forest_path)->required();
  bench->add_option("--dataset", bench_args.dataset_path)->required();
  bench->add_option("--reps", bench_args.repetitions, "Repetitions over the dataset");
  bench->add_option("--workers", bench_args.workers, "Frame-parallel workers");
  bench->add_option("--seed", bench_args.seed);
  bench->add_option("--out", bench_args.out_dir, "Directory for reports and run records");
  add_answerer_flags(bench, bench_args.answerer);

  // eval
  auto* eval = app.add_subcommand("eval", "Per-category accuracy report");
  EvalArgs eval_args;
  eval->add_option("--forest", eval_args.forest_path)->required();
  eval->add_option("--dataset", eval_args.dataset_path)->required();
  eval->add_option("--mode", eval_args.mode, "hier|flat");
  eval->add_option("--judge", eval_args.judge, "exact|sim");
  eval->add_option("--threshold", eval_args.threshold, "Judge correctness threshold");
  eval->add_option("--workers", eval_args.workers);
  eval->add_option("--seed", eval_args.seed);
  eval->add_option("--out", eval_args.out_dir);
  eval->add_flag("--lenient", eval_args.lenient);
  add_answerer_flags(eval, eval_args.answerer);

  // split
  auto* split = app.add_subcommand("split", "Scenario-stratified train/val split");
  SplitArgs split_args;
  split->add_option("--forest", split_args.forest_path)->required();
  split->add_option("--dataset", split_args.dataset_path)->required();
  split->add_option("--plan", split_args.plan_path, "Split plan JSON")->required();
  split->add_option("--seed", split_args.seed);
  split->add_option("--out", split_args.out_dir, "Output directory");

  // gen-forest
  auto* gen_forest = app.add_subcommand("gen-forest", "Emit a synthetic forest config");
  GenForestArgs gen_forest_args;
  gen_forest->add_option("--nodes", gen_forest_args.nodes, "Question count");
  gen_forest->add_option("--out", gen_forest_args.out_path, "Output file (default stdout)");

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "Emit a synthetic annotation CSV");
  GenDataArgs gen_data_args;
  gen_data->add_option("--forest", gen_data_args.forest_path)->required();
  gen_data->add_option("--frames", gen_data_args.frames);
  gen_data->add_option("--mix", gen_data_args.mix_spec,
                       "scenario=weight,... (default: reference scenario mix)");
  gen_data->add_option("--pass-prob", gen_data_args.pass_prob_spec,
                       "Gate-pass probability, or comma list per depth");
  gen_data->add_option("--seed", gen_data_args.seed);
  gen_data->add_option("--out", gen_data_args.out_path, "Output file (default stdout)");

  // score-description
  auto* score = app.add_subcommand("score-description",
                                   "Submit a description to a remote 0-100 scorer");
  ScoreArgs score_args;
  score->add_option("--endpoint", score_args.endpoint);
  score->add_option("--image", score_args.image_ref)->required();
  score->add_option("--description", score_args.description)->required();
  score->add_option("--ground-truth", score_args.ground_truth)
      ->each([&](const std::string&) { score_args.with_gt = true; });
  score->add_option("--prompt", score_args.prompt_path, "Prompt template file");
  score->add_option("--timeout-ms", score_args.timeout_ms);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_forest_path);
    if (infer->parsed()) return cmd_infer(infer_args);
    if (bench->parsed()) return cmd_bench(bench_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (split->parsed()) return cmd_split(split_args);
    if (gen_forest->parsed()) return cmd_gen_forest(gen_forest_args);
    if (gen_data->parsed()) return cmd_gen_data(gen_data_args);
    if (score->parsed()) return cmd_score_description(score_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NetworkError& e) {
    std::cerr << "network error: " << e.what() << "\n";
    return kExitNetwork;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnknown;
  }
  return kExitOk;
}
