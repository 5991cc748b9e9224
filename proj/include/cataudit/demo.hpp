#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cataudit/cohesion.hpp"
#include "cataudit/corpus.hpp"

namespace cataudit {

// Synthetic corpora with known answers, so the whole audit runs offline.
//
// The audit corpus is built so that the three methods disagree in a known
// way. The category is a Gaussian cloud around the origin, wide in the first
// two coordinates and narrow in the rest. Planted intruders sit inside the
// category radius: a handful of scattered singles plus a block of articles
// with identical encodings. Background articles spread widely over the first
// two coordinates but sit far away in the remaining ones.
//
// A projection onto the dominant plane lands many distant background
// articles inside the category hull. In the HNSW graph the duplicates fill
// each other's link lists at distance zero, so pruning cuts them off from
// the rest of layer 0 and a search from the centroid passes them by.

struct AuditDemoSpec {
  std::size_t dimension = 32;
  std::size_t members = 60;
  std::size_t background = 400;
  std::size_t singles = 8;
  std::size_t duplicates = 80;
  std::uint64_t seed = 7;
  std::string category = "demo_films";
};

struct AuditDemo {
  Corpus corpus;
  std::string category;
  std::vector<std::string> planted;  // intruders placed inside the category radius
};

namespace detail {

inline const std::array<const char*, 16> kCategoryWords = {
    "film",     "director", "premiere", "cinema",  "drama",   "festival", "actor",   "screenplay",
    "belgrade", "studio",   "comedy",   "producer", "cast",   "release",  "yugoslav", "documentary"};

inline const std::array<const char*, 24> kBackgroundWords = {
    "river",   "province", "railway", "species", "album",   "football", "election", "chemistry",
    "castle",  "battle",   "island",  "protein", "senator", "orbit",    "cathedral", "software",
    "tribe",   "glacier",  "harbour", "parish",  "volcano", "league",   "manuscript", "engine"};

template <std::size_t N>
std::string synthetic_text(std::mt19937_64& rng, const std::array<const char*, N>& vocab,
                           std::size_t words) {
  std::uniform_int_distribution<std::size_t> pick(0, N - 1);
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) text += ' ';
    text += vocab[pick(rng)];
  }
  return text;
}

inline std::vector<double> random_direction(std::mt19937_64& rng, std::size_t dim, std::size_t from) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim, 0.0);
  double norm = 0.0;
  for (std::size_t i = from; i < dim; ++i) {
    v[i] = g(rng);
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

inline std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, i);
  return buf;
}

}  // namespace detail

inline AuditDemo make_audit_demo(const AuditDemoSpec& spec = {}) {
  if (spec.dimension < 4) throw Error("demo corpus needs dimension >= 4");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> wide(0.0, 3.0), narrow(0.0, 0.5);
  std::uniform_real_distribution<double> plane(-20.0, 20.0), depth(14.0, 18.0);
  const std::size_t dim = spec.dimension;

  AuditDemo demo;
  demo.category = spec.category;
  std::vector<EmbeddedArticle> articles;

  for (std::size_t i = 0; i < spec.members; ++i) {
    EmbeddedArticle a;
    a.id = detail::numbered("member", i);
    a.title = "Category film " + std::to_string(i);
    a.embedding.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) a.embedding[j] = j < 2 ? wide(rng) : narrow(rng);
    a.categories = {spec.category};
    a.text = detail::synthetic_text(rng, detail::kCategoryWords, 12);
    articles.push_back(std::move(a));
  }

  // Singles at evenly spaced radii in [1.5, 5], random directions.
  for (std::size_t i = 0; i < spec.singles; ++i) {
    const double r = spec.singles == 1 ? 3.0 : 1.5 + 3.5 * static_cast<double>(i) / static_cast<double>(spec.singles - 1);
    auto dir = detail::random_direction(rng, dim, 0);
    EmbeddedArticle a;
    a.id = detail::numbered("single", i);
    a.title = "Uncategorised film " + std::to_string(i);
    for (auto x : dir) a.embedding.push_back(r * x);
    a.text = detail::synthetic_text(rng, detail::kCategoryWords, 12);
    demo.planted.push_back(a.id);
    articles.push_back(std::move(a));
  }

  for (std::size_t i = 0; i < spec.background; ++i) {
    auto dir = detail::random_direction(rng, dim, 2);
    const double r = depth(rng);
    EmbeddedArticle a;
    a.id = detail::numbered("background", i);
    a.title = "Background article " + std::to_string(i);
    a.embedding.resize(dim);
    a.embedding[0] = plane(rng);
    a.embedding[1] = plane(rng);
    for (std::size_t j = 2; j < dim; ++j) a.embedding[j] = r * dir[j];
    if (i % 3 == 0) a.categories = {"demo_other"};
    a.text = detail::synthetic_text(rng, detail::kBackgroundWords, 12);
    articles.push_back(std::move(a));
  }

  // Identical encodings (duplicate stubs) at radius 4 in the narrow
  // coordinates, inserted last.
  const auto stub_dir = detail::random_direction(rng, dim, 2);
  for (std::size_t i = 0; i < spec.duplicates; ++i) {
    EmbeddedArticle a;
    a.id = detail::numbered("stub", i);
    a.title = "Film stub " + std::to_string(i);
    for (auto x : stub_dir) a.embedding.push_back(4.0 * x);
    a.text = detail::synthetic_text(rng, detail::kCategoryWords, 6);
    demo.planted.push_back(a.id);
    articles.push_back(std::move(a));
  }

  demo.corpus = Corpus(dim, std::move(articles));
  return demo;
}

struct CohesionDemoSpec {
  std::size_t dimension = 8;
  std::size_t per_cluster = 30;
  std::size_t subcategories_per_cluster = 3;
  double sigma = 1.0;
  double separation = 10.0;  // in units of sigma
  std::uint64_t seed = 11;
};

struct CohesionDemo {
  Corpus corpus;
  std::vector<Subcategory> subcategories;
  std::map<std::string, std::size_t> labels;  // ground-truth cluster of every article
};

/// Two isotropic Gaussian clusters whose centers differ by `separation`
/// sigmas along the first axis, each split round-robin into subcategories.
inline CohesionDemo make_cohesion_demo(const CohesionDemoSpec& spec = {}) {
  if (spec.dimension < 2) throw Error("cohesion demo needs dimension >= 2");
  if (spec.subcategories_per_cluster < 1 || spec.subcategories_per_cluster > spec.per_cluster) {
    throw Error("cohesion demo needs 1 <= subcategories per cluster <= points per cluster");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> g(0.0, spec.sigma);
  CohesionDemo demo;
  std::vector<EmbeddedArticle> articles;
  for (std::size_t c = 0; c < 2; ++c) {
    const std::string cluster = c == 0 ? "cluster_a" : "cluster_b";
    std::vector<Subcategory> subs(spec.subcategories_per_cluster);
    for (std::size_t s = 0; s < subs.size(); ++s) subs[s].id = cluster + "/sub" + std::to_string(s);
    for (std::size_t i = 0; i < spec.per_cluster; ++i) {
      EmbeddedArticle a;
      a.id = detail::numbered(cluster.c_str(), i);
      a.title = cluster + " article " + std::to_string(i);
      a.embedding.resize(spec.dimension);
      for (auto& x : a.embedding) x = g(rng);
      a.embedding[0] += static_cast<double>(c) * spec.separation * spec.sigma;
      a.categories = {cluster};
      subs[i % subs.size()].member_ids.push_back(a.id);
      demo.labels[a.id] = c;
      articles.push_back(std::move(a));
    }
    demo.subcategories.insert(demo.subcategories.end(), subs.begin(), subs.end());
  }
  demo.corpus = Corpus(spec.dimension, std::move(articles));
  return demo;
}

}  // namespace cataudit
