#include "hqa/answerers.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hqa/errors.hpp"
#include "hqa/rng.hpp"

namespace hqa {

// ---------------------------------------------------------------------------
// LatencyModel
// ---------------------------------------------------------------------------

LatencyModel LatencyModel::constant(double ms) {
  LatencyModel m;
  m.kind = Kind::Constant;
  m.constant_ms = ms;
  return m;
}

LatencyModel LatencyModel::gaussian(double mean_ms, double std_ms) {
  LatencyModel m;
  m.kind = Kind::Gaussian;
  m.mean_ms = mean_ms;
  m.std_ms = std_ms;
  return m;
}

LatencyModel LatencyModel::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("empirical latency model needs >=1 sample");
  LatencyModel m;
  m.kind = Kind::Empirical;
  m.samples = std::move(samples);
  return m;
}

LatencyModel LatencyModel::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    if (kind == "constant") {
      return constant(std::stod(arg));
    }
    if (kind == "gaussian") {
      const auto comma = arg.find(',');
      if (comma == std::string::npos) throw ConfigError("gaussian needs mean,std");
      return gaussian(std::stod(arg.substr(0, comma)), std::stod(arg.substr(comma + 1)));
    }
    if (kind == "empirical") {
      std::ifstream in(arg);
      if (!in) throw ConfigError("cannot open latency samples '" + arg + "'");
      std::vector<double> samples;
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) samples.push_back(std::stod(line));
      }
      return empirical(std::move(samples));
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad cost model spec '" + spec + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("bad cost model spec '" + spec + "'");
  }
  throw ConfigError("unknown cost model kind '" + kind +
                    "' (expected constant|gaussian|empirical)");
}

std::string LatencyModel::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::Constant:
      out << "constant:" << constant_ms;
      break;
    case Kind::Gaussian:
      out << "gaussian:" << mean_ms << "," << std_ms;
      break;
    case Kind::Empirical:
      out << "empirical:" << samples.size() << " samples";
      break;
  }
  return out.str();
}

double LatencyModel::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::Constant:
      return std::max(0.0, constant_ms);
    case Kind::Gaussian: {
      std::normal_distribution<double> dist(mean_ms, std_ms);
      return std::max(0.0, dist(rng));
    }
    case Kind::Empirical: {
      std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
      return std::max(0.0, samples[pick(rng)]);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Oracle answerer
// ---------------------------------------------------------------------------

namespace {

class OracleAnswerer final : public Answerer {
 public:
  OracleAnswerer(AnnotationSet annotations, double noise_rate, LatencyModel latency,
                 uint64_t seed)
      : annotations_(std::move(annotations)),
        noise_rate_(noise_rate),
        latency_(std::move(latency)),
        seed_(seed) {
    if (noise_rate_ < 0.0 || noise_rate_ > 1.0) {
      throw ConfigError("noise rate must be in [0, 1]");
    }
  }

  Answer answer(const std::string& frame_ref, const QuestionNode& question) override {
    const FrameAnnotation* frame = annotations_.find(frame_ref);
    if (!frame) throw DataError("oracle answerer: unknown frame '" + frame_ref + "'");
    auto it = frame->answers.find(question.id);
    if (it == frame->answers.end()) {
      throw DataError("oracle answerer: frame '" + frame_ref + "' has no answer for question '" +
                      question.id + "'");
    }

    Answer out;
    auto latency_rng = derived_stream(seed_, {"latency", frame_ref, question.id});
    out.elapsed_ms = latency_.sample(latency_rng);

    const std::string& truth = it->second;
    if (truth == kNoneLabel) {
      out.label = question.domain.default_label();
      out.defaulted = true;
      return out;
    }

    out.label = truth;
    if (noise_rate_ > 0.0 && question.domain.labels.size() > 1) {
      auto rng = derived_stream(seed_, {"answer", frame_ref, question.id});
      if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < noise_rate_) {
        std::vector<const std::string*> wrong;
        for (const std::string& label : question.domain.labels) {
          if (label != truth) wrong.push_back(&label);
        }
        std::uniform_int_distribution<std::size_t> pick(0, wrong.size() - 1);
        out.label = *wrong[pick(rng)];
      }
    }
    return out;
  }

 private:
  AnnotationSet annotations_;
  double noise_rate_;
  LatencyModel latency_;
  uint64_t seed_;
};

class ScriptedAnswerer final : public Answerer {
 public:
  ScriptedAnswerer(std::map<ScriptKey, std::string> script, LatencyModel latency, uint64_t seed)
      : latency_(std::move(latency)), seed_(seed) {
    for (auto& [key, label] : script) script_.emplace(key, normalize_label(label));
  }

  Answer answer(const std::string& frame_ref, const QuestionNode& question) override {
    auto it = script_.find({frame_ref, question.id});
    if (it == script_.end()) {
      throw DataError("unscripted question " + question.id + " for frame " + frame_ref);
    }
    Answer out;
    out.label = it->second;
    auto latency_rng = derived_stream(seed_, {"latency", frame_ref, question.id});
    out.elapsed_ms = latency_.sample(latency_rng);
    return out;
  }

 private:
  std::map<ScriptKey, std::string> script_;
  LatencyModel latency_;
  uint64_t seed_;
};

}  // namespace

std::unique_ptr<Answerer> oracle_answerer(AnnotationSet annotations, double noise_rate,
                                          LatencyModel latency, uint64_t seed) {
  return std::make_unique<OracleAnswerer>(std::move(annotations), noise_rate,
                                          std::move(latency), seed);
}

std::unique_ptr<Answerer> scripted_answerer(std::map<ScriptKey, std::string> script,
                                            LatencyModel latency, uint64_t seed) {
  return std::make_unique<ScriptedAnswerer>(std::move(script), std::move(latency), seed);
}

}  // namespace hqa
