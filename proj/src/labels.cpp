#include "hqa/labels.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace hqa {

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  // Trailing punctuation (and any space freed up by stripping it).
  while (!out.empty()) {
    unsigned char back = static_cast<unsigned char>(out.back());
    if (std::ispunct(back) || back == ' ') {
      out.pop_back();
    } else {
      break;
    }
  }
  return out;
}

bool is_normalized(std::string_view label) {
  return normalize_label(label) == label;
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t n = b.size();
  std::vector<std::size_t> row(n + 1);
  for (std::size_t j = 0; j <= n; ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t saved = row[j];
      if (a[i - 1] == b[j - 1]) {
        row[j] = diag;
      } else {
        row[j] = 1 + std::min({row[j], row[j - 1], diag});
      }
      diag = saved;
    }
  }
  return row[n];
}

double normalized_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const std::size_t dist = levenshtein_distance(a, b);
  return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

}  // namespace hqa
