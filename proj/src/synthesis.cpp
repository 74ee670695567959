#include "hqa/synthesis.hpp"

namespace hqa {

std::string render(const std::vector<std::string>& sentences) {
  std::string out;
  for (const std::string& sentence : sentences) {
    if (!out.empty()) out.push_back(' ');
    out += sentence;
  }
  return out;
}

SceneDescription synthesize(const Forest& forest, const TraversalResult& result) {
  SceneDescription description;
  for (const TraversalRecord& record : result.records) {
    if (record.status != RecordStatus::Asked) continue;
    const QuestionNode& node = forest.node(record.question_id);
    auto it = node.templates.find(record.answer);
    if (it != node.templates.end()) description.sentences.push_back(it->second);
  }
  description.rendered = render(description.sentences);
  return description;
}

}  // namespace hqa
