#pragma once

// Template-based scene description: each asked question whose answer has a
// template contributes one sentence, in canonical preorder. Pruned and
// untemplated answers contribute nothing.

#include <string>
#include <vector>

#include "hqa/forest.hpp"
#include "hqa/traversal.hpp"

namespace hqa {

struct SceneDescription {
  std::vector<std::string> sentences;  // traversal order
  std::string rendered;                // sentences joined by one space
};

std::string render(const std::vector<std::string>& sentences);

SceneDescription synthesize(const Forest& forest, const TraversalResult& result);

}  // namespace hqa
