#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cataudit {

namespace detail {

inline const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",       "about",   "above",  "after",  "again",   "against", "all",     "also",
      "am",      "an",      "and",    "any",    "are",     "as",      "at",      "be",
      "because", "been",    "before", "being",  "below",   "between", "both",    "but",
      "by",      "can",     "could",  "did",    "do",      "does",    "doing",   "down",
      "during",  "each",    "few",    "for",    "from",    "further", "had",     "has",
      "have",    "having",  "he",     "her",    "here",    "hers",    "herself", "him",
      "himself", "his",     "how",    "i",      "if",      "in",      "into",    "is",
      "it",      "its",     "itself", "just",   "me",      "more",    "most",    "my",
      "myself",  "no",      "nor",    "not",    "now",     "of",      "off",     "on",
      "once",    "only",    "or",     "other",  "our",     "ours",    "out",     "over",
      "own",     "same",    "she",    "should", "so",      "some",    "such",    "than",
      "that",    "the",     "their",  "theirs", "them",    "then",    "there",   "these",
      "they",    "this",    "those",  "through", "to",     "too",     "under",   "until",
      "up",      "very",    "was",    "we",     "were",    "what",    "when",    "where",
      "which",   "while",   "who",    "whom",   "why",     "will",    "with",    "would",
      "you",     "your",    "yours",  "yourself", "s",     "t",       "one",     "two",
      "first",   "new",     "may",    "many",   "well",    "used",    "since",   "within",
  };
  return words;
}

// Bytes >= 0x80 are kept as word characters so UTF-8 words survive intact.
inline bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace detail

/// Most frequent non-stopword tokens of `text`, ties broken alphabetically.
/// Tokens are maximal runs of letters/digits (any non-ASCII byte counts as a
/// letter), lowercased; single-character tokens are dropped.
inline std::vector<std::string> extract_keywords(std::string_view text, std::size_t top_k) {
  std::map<std::string, std::size_t> counts;
  std::string token;
  auto flush = [&] {
    if (token.size() > 1 && !detail::stopwords().count(token)) ++counts[token];
    token.clear();
  };
  for (unsigned char c : text) {
    if (detail::word_byte(c)) {
      token.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
    }
  }
  flush();

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) out.push_back(ranked[i].first);
  return out;
}

}  // namespace cataudit
