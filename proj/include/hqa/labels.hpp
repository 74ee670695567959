#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace hqa {

// Reserved marker for questions made inapplicable by an ancestor's answer.
// Never a member of any answer domain, gate, or template key.
inline constexpr std::string_view kNoneLabel = "none";

// Canonical label form: lowercased, internal whitespace collapsed to single
// spaces, trimmed, trailing punctuation stripped ("Yes ." -> "yes").
std::string normalize_label(std::string_view raw);

bool is_normalized(std::string_view label);

// Classic two-row Levenshtein over bytes.
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

// 1 - distance / max(len); 1.0 when both strings are empty.
double normalized_similarity(std::string_view a, std::string_view b);

}  // namespace hqa
