#pragma once

// Pluggable answer backends. One contract: given a frame reference and a
// question, produce a label and the time it took. Oracle and scripted
// answerers are immutable and derive per-(frame, question) random streams,
// so they are safe to call from concurrent workers.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hqa/dataset.hpp"
#include "hqa/forest.hpp"

namespace hqa {

struct Answer {
  std::string label;       // normalized; "none" is never a legal return
  double elapsed_ms = 0.0;
  bool defaulted = false;  // ground truth was "none" but the question was asked anyway
};

class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual Answer answer(const std::string& frame_ref, const QuestionNode& question) = 0;
};

struct LatencyModel {
  enum class Kind { Constant, Gaussian, Empirical };

  Kind kind = Kind::Constant;
  double constant_ms = 0.0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::vector<double> samples;

  static LatencyModel constant(double ms);
  static LatencyModel gaussian(double mean_ms, double std_ms);
  static LatencyModel empirical(std::vector<double> samples);

  // "constant:38.4" | "gaussian:38.4,5.0" | "empirical:<path>" (one ms per line)
  static LatencyModel parse(const std::string& spec);

  std::string describe() const;
  double sample(std::mt19937_64& rng) const;  // always >= 0
};

// Replays dataset ground truth, flipping each answer to a uniformly random
// wrong label with probability noise_rate. A ground truth of "none" cannot be
// returned, so the domain's default label is substituted and flagged.
std::unique_ptr<Answerer> oracle_answerer(AnnotationSet annotations, double noise_rate,
                                          LatencyModel latency, uint64_t seed);

using ScriptKey = std::pair<std::string, std::string>;  // (frame_ref, question_id)

std::unique_ptr<Answerer> scripted_answerer(std::map<ScriptKey, std::string> script,
                                            LatencyModel latency, uint64_t seed = 0);

}  // namespace hqa
