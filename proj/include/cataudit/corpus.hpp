#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cataudit/error.hpp"

namespace cataudit {

struct EmbeddedArticle {
  std::string id;
  std::string title;
  std::vector<double> embedding;
  std::set<std::string> categories;
  std::optional<std::string> text;

  bool in_category(const std::string& category_id) const {
    return categories.count(category_id) != 0;
  }

  friend bool operator==(const EmbeddedArticle&, const EmbeddedArticle&) = default;
};

/// An immutable, id-indexed collection of articles sharing one embedding
/// dimension. An empty corpus (dimension 0) is representable so that an
/// empty embedding request has a value to return; load_corpus never yields one.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::size_t dimension, std::vector<EmbeddedArticle> articles)
      : dimension_(dimension), articles_(std::move(articles)) {
    index_.reserve(articles_.size());
    for (std::size_t i = 0; i < articles_.size(); ++i) {
      const auto& a = articles_[i];
      if (a.embedding.size() != dimension_) {
        throw DimensionError("article '" + a.id + "' has dimension " +
                             std::to_string(a.embedding.size()) + ", corpus dimension is " +
                             std::to_string(dimension_));
      }
      for (double v : a.embedding) {
        if (!std::isfinite(v)) throw Error("article '" + a.id + "' has a non-finite component");
      }
      if (!index_.emplace(a.id, i).second) throw Error("duplicate article id '" + a.id + "'");
    }
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return articles_.size(); }
  bool empty() const noexcept { return articles_.empty(); }
  const std::vector<EmbeddedArticle>& articles() const noexcept { return articles_; }
  const EmbeddedArticle& operator[](std::size_t i) const { return articles_[i]; }

  const EmbeddedArticle* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &articles_[it->second];
  }

  const EmbeddedArticle& at(const std::string& id) const {
    if (const auto* a = find(id)) return *a;
    throw Error("unknown article id '" + id + "'");
  }

  std::optional<std::size_t> position(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.dimension_ == b.dimension_ && a.articles_ == b.articles_;
  }

 private:
  std::size_t dimension_ = 0;
  std::vector<EmbeddedArticle> articles_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline std::string require_string(const nlohmann::json& rec, const char* key, bool required,
                                  const std::string& source, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end()) {
    if (required) throw ParseError(source, line, std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

// Finiteness is checked separately so that the caller can name the article.
inline std::vector<double> require_vector(const nlohmann::json& rec, const std::string& source,
                                          std::size_t line) {
  auto it = rec.find("vector");
  if (it == rec.end()) throw ParseError(source, line, "missing field 'vector'");
  if (!it->is_array()) throw ParseError(source, line, "field 'vector' must be an array");
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw ParseError(source, line, "field 'vector' must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

inline EmbeddedArticle parse_article_record(const std::string& text, const std::string& source,
                                            std::size_t line) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, line, std::string("malformed record: ") + e.what());
  }
  if (!rec.is_object()) throw ParseError(source, line, "record must be an object");

  EmbeddedArticle a;
  a.id = detail::require_string(rec, "id", true, source, line);
  if (a.id.empty()) throw ParseError(source, line, "empty id");
  a.title = detail::require_string(rec, "title", true, source, line);
  a.embedding = detail::require_vector(rec, source, line);
  if (auto it = rec.find("categories"); it != rec.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(source, line, "field 'categories' must be an array");
    for (const auto& c : *it) {
      if (!c.is_string()) throw ParseError(source, line, "categories must be strings");
      a.categories.insert(c.get<std::string>());
    }
  }
  if (auto it = rec.find("text"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(source, line, "field 'text' must be a string");
    a.text = it->get<std::string>();
  }
  return a;
}

/// Parses line-delimited article records. Blank lines are skipped but still
/// counted so that error messages carry the physical line number.
inline Corpus parse_corpus(std::istream& in, const std::string& source = "<stream>") {
  std::vector<EmbeddedArticle> articles;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t dimension = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    auto a = parse_article_record(line, source, lineno);
    if (articles.empty()) {
      dimension = a.embedding.size();
      if (dimension < 2) {
        throw ParseError(source, lineno, "embedding dimension must be at least 2, got " +
                                             std::to_string(dimension));
      }
    } else if (a.embedding.size() != dimension) {
      throw DimensionError(source + ":" + std::to_string(lineno) + ": article '" + a.id +
                           "' has dimension " + std::to_string(a.embedding.size()) +
                           ", expected " + std::to_string(dimension));
    }
    for (double v : a.embedding) {
      if (!std::isfinite(v)) {
        throw ParseError(source, lineno, "article '" + a.id + "' has a non-finite component");
      }
    }
    if (auto [it, fresh] = seen.emplace(a.id, lineno); !fresh) {
      throw ParseError(source, lineno, "duplicate id '" + a.id + "' (first seen on line " +
                                           std::to_string(it->second) + ")");
    }
    articles.push_back(std::move(a));
  }
  if (articles.empty()) throw Error(source + ": empty corpus");
  return Corpus(dimension, std::move(articles));
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return parse_corpus(in, path);
}

inline nlohmann::json article_to_json(const EmbeddedArticle& a) {
  nlohmann::json rec;
  rec["id"] = a.id;
  rec["title"] = a.title;
  rec["vector"] = a.embedding;
  rec["categories"] = a.categories;
  if (a.text) rec["text"] = *a.text;
  return rec;
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& a : corpus.articles()) out << article_to_json(a).dump() << '\n';
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
}

/// Draws n distinct articles with a seeded partial Fisher-Yates shuffle. The
/// result keeps the draw order.
inline Corpus sample_random(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n > corpus.size()) {
    throw Error("sample size " + std::to_string(n) + " exceeds corpus size " +
                std::to_string(corpus.size()));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<EmbeddedArticle> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(corpus[order[i]]);
  return Corpus(corpus.dimension(), std::move(out));
}

/// Keeps every article of `category_id` and a seeded sample of n of the
/// remaining articles, preserving corpus order. This mirrors an audit setup of
/// "category articles plus a random background sample".
inline Corpus sample_background(const Corpus& corpus, const std::string& category_id,
                                std::size_t n, std::uint64_t seed) {
  std::vector<EmbeddedArticle> others;
  for (const auto& a : corpus.articles()) {
    if (!a.in_category(category_id)) others.push_back(a);
  }
  Corpus background(corpus.dimension(), std::move(others));
  Corpus drawn = sample_random(background, n, seed);
  std::set<std::string> keep;
  for (const auto& a : drawn.articles()) keep.insert(a.id);
  std::vector<EmbeddedArticle> out;
  for (const auto& a : corpus.articles()) {
    if (a.in_category(category_id) || keep.count(a.id)) out.push_back(a);
  }
  return Corpus(corpus.dimension(), std::move(out));
}

}  // namespace cataudit
