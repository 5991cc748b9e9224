#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cataudit/corpus.hpp"
#include "cataudit/error.hpp"
#include "cataudit/vecmath.hpp"

namespace cataudit {

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // parallel to the clustered vectors
  std::size_t k = 0;
};

struct KMeansResult {
  ClusterAssignment assignment;
  std::vector<std::vector<double>> centers;
  std::vector<double> objective;  // within-cluster sum of squares, per iteration
  std::size_t iterations = 0;
  bool converged = false;
};

inline double within_cluster_ss(std::span<const std::vector<double>> vectors,
                                std::span<const std::size_t> labels,
                                std::span<const std::vector<double>> centers) {
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) total += squared_distance(vectors[i], centers[labels[i]]);
  return total;
}

/// Lloyd's iteration from k-means++ seeding. Stops when the assignment is
/// unchanged or after max_iters assignment steps. A cluster that empties out
/// is re-seeded with the point farthest from its center among clusters that
/// can spare one, so every label in [0, k) is always in use.
inline KMeansResult kmeans(std::span<const std::vector<double>> vectors, std::size_t k,
                           std::uint64_t seed, std::size_t max_iters = 300) {
  const std::size_t n = vectors.size();
  if (k < 1) throw Error("k-means needs k >= 1");
  if (k > n) throw Error("k-means with k = " + std::to_string(k) + " over " + std::to_string(n) + " points");
  if (max_iters < 1) throw Error("k-means needs max_iters >= 1");

  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.assignment.k = k;

  // k-means++ seeding
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < k; ++c) {
    r.centers.push_back(vectors[pick]);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(vectors[i], r.centers.back()));
      total += nearest[i];
    }
    if (c + 1 == k) break;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] > 0.0 && (target -= nearest[i]) < 0.0) {
          pick = i;
          break;
        }
      }
      while (nearest[pick] == 0.0) --pick;  // rounding fallback: last positive weight
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
  }

  auto& labels = r.assignment.labels;
  labels.assign(n, k);  // k marks "unassigned"
  std::vector<std::size_t> next(n);
  for (r.iterations = 1; r.iterations <= max_iters; ++r.iterations) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(vectors[i], r.centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(vectors[i], r.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      next[i] = best;
    }

    std::vector<std::size_t> counts(k, 0);
    for (auto l : next) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[next[i]] < 2) continue;
        const double d = squared_distance(vectors[i], r.centers[next[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[next[far]];
      next[far] = c;
      counts[c] = 1;
      r.centers[c] = vectors[far];
    }

    r.objective.push_back(within_cluster_ss(vectors, next, r.centers));
    if (next == labels) {
      r.converged = true;
      break;
    }
    labels = next;

    for (std::size_t c = 0; c < k; ++c) std::fill(r.centers[c].begin(), r.centers[c].end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& center = r.centers[labels[i]];
      for (std::size_t j = 0; j < center.size(); ++j) center[j] += vectors[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (auto& v : r.centers[c]) v /= static_cast<double>(counts[c]);
    }
  }
  r.iterations = std::min(r.iterations, max_iters);
  return r;
}

/// Per-point silhouette values (b - a) / max(a, b). Points in singleton
/// clusters score 0, as do points with a = b = 0.
inline std::vector<double> silhouette_samples(std::span<const std::vector<double>> vectors,
                                              const ClusterAssignment& assignment) {
  const std::size_t n = vectors.size();
  const std::size_t k = assignment.k;
  if (k < 2) throw Error("silhouette needs at least 2 clusters");
  if (assignment.labels.size() != n) throw Error("silhouette: label count does not match point count");
  std::vector<std::size_t> counts(k, 0);
  for (auto l : assignment.labels) {
    if (l >= k) throw Error("silhouette: label " + std::to_string(l) + " outside [0, k)");
    ++counts[l];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw Error("silhouette: cluster " + std::to_string(c) + " is empty");
  }

  std::vector<double> s(n, 0.0);
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignment.labels[i];
    if (counts[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[assignment.labels[j]] += euclidean_distance(vectors[i], vectors[j]);
    }
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

inline double silhouette(std::span<const std::vector<double>> vectors, const ClusterAssignment& assignment) {
  const auto s = silhouette_samples(vectors, assignment);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

// ---------------------------------------------------------------------------
// Hierarchical vectors
// ---------------------------------------------------------------------------

struct Subcategory {
  std::string id;
  std::vector<std::string> member_ids;
};

inline std::vector<Subcategory> parse_subcategories(std::istream& in,
                                                    const std::string& source = "<stream>") {
  std::vector<Subcategory> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, lineno, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(source, lineno, "record must be an object");
    Subcategory sub;
    sub.id = detail::require_string(rec, "subcategory_id", true, source, lineno);
    auto it = rec.find("member_article_ids");
    if (it == rec.end() || !it->is_array()) {
      throw ParseError(source, lineno, "field 'member_article_ids' must be an array");
    }
    for (const auto& m : *it) {
      if (!m.is_string()) throw ParseError(source, lineno, "member ids must be strings");
      sub.member_ids.push_back(m.get<std::string>());
    }
    out.push_back(std::move(sub));
  }
  return out;
}

inline std::vector<Subcategory> load_subcategories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open subcategory file '" + path + "'");
  return parse_subcategories(in, path);
}

inline void write_subcategories(std::ostream& out, std::span<const Subcategory> subs) {
  for (const auto& s : subs) {
    out << nlohmann::json{{"subcategory_id", s.id}, {"member_article_ids", s.member_ids}}.dump() << '\n';
  }
}

struct HierarchicalVector {
  std::string subcategory_id;
  std::vector<double> vector;
};

/// One centroid per subcategory, in map order.
inline std::vector<HierarchicalVector> hierarchical_vectors(const Corpus& corpus,
                                                            std::span<const Subcategory> subcategories) {
  std::vector<HierarchicalVector> out;
  out.reserve(subcategories.size());
  for (const auto& sub : subcategories) {
    if (sub.member_ids.empty()) throw Error("subcategory '" + sub.id + "' has no members");
    std::vector<std::vector<double>> members;
    members.reserve(sub.member_ids.size());
    for (const auto& id : sub.member_ids) members.push_back(corpus.at(id).embedding);
    out.push_back({sub.id, centroid(members)});
  }
  return out;
}

struct CohesionResult {
  double score_base = 0.0;
  double score_augmented = 0.0;
  double relative_change = 0.0;
  std::size_t k = 0;
  std::size_t points_base = 0;
  std::size_t points_augmented = 0;
};

/// Silhouette of the labelled articles before and after appending each
/// subcategory's mean vector to the cluster its members share.
/// relative_change = (after - before) / |before|, and 0 when the two agree.
inline CohesionResult cohesion_experiment(const Corpus& corpus,
                                          const std::map<std::string, std::size_t>& labels,
                                          std::span<const Subcategory> subcategories) {
  std::vector<std::vector<double>> points;
  ClusterAssignment assignment;
  for (const auto& a : corpus.articles()) {
    if (auto it = labels.find(a.id); it != labels.end()) {
      points.push_back(a.embedding);
      assignment.labels.push_back(it->second);
      assignment.k = std::max(assignment.k, it->second + 1);
    }
  }
  if (assignment.labels.size() != labels.size()) {
    for (const auto& [id, l] : labels) corpus.at(id);  // names the unknown id
  }

  CohesionResult result;
  result.k = assignment.k;
  result.points_base = points.size();
  result.score_base = silhouette(points, assignment);

  const auto hv = hierarchical_vectors(corpus, subcategories);
  for (std::size_t s = 0; s < subcategories.size(); ++s) {
    const auto& sub = subcategories[s];
    std::size_t label = 0;
    for (std::size_t m = 0; m < sub.member_ids.size(); ++m) {
      auto it = labels.find(sub.member_ids[m]);
      if (it == labels.end()) {
        throw Error("subcategory '" + sub.id + "' member '" + sub.member_ids[m] + "' has no cluster label");
      }
      if (m == 0) {
        label = it->second;
      } else if (it->second != label) {
        throw Error("subcategory '" + sub.id + "' spans clusters " + std::to_string(label) + " and " +
                    std::to_string(it->second));
      }
    }
    points.push_back(hv[s].vector);
    assignment.labels.push_back(label);
  }
  result.points_augmented = points.size();
  result.score_augmented = silhouette(points, assignment);
  result.relative_change = result.score_augmented == result.score_base
                               ? 0.0
                               : (result.score_augmented - result.score_base) / std::abs(result.score_base);
  return result;
}

// ---------------------------------------------------------------------------
// Centroid stability
// ---------------------------------------------------------------------------

struct StabilityResult {
  std::size_t n_samples = 0;
  double fraction = 0.0;
  std::size_t sample_size = 0;
  double mean_shift = 0.0;
  double std_shift = 0.0;  // population standard deviation
  std::uint64_t seed = 0;
  std::vector<double> shifts;
};

/// Distance between the full category centroid and the centroid of
/// floor(fraction * |members|) members drawn without replacement, repeated
/// n_samples times. Sub-centroids accumulate in member order, so fraction = 1
/// reproduces the full centroid bit for bit.
inline StabilityResult centroid_stability(const Corpus& corpus, const CategoryModel& model,
                                          std::size_t n_samples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("stability fraction must lie in (0, 1]");
  if (n_samples < 1) throw Error("stability needs at least one sample");
  const std::size_t n = model.member_ids.size();
  const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  if (m < 1) {
    throw Error("fraction " + std::to_string(fraction) + " of " + std::to_string(n) +
                " members selects no member");
  }

  std::vector<std::vector<double>> members;
  members.reserve(n);
  for (const auto& id : model.member_ids) members.push_back(corpus.at(id).embedding);

  StabilityResult r;
  r.n_samples = n_samples;
  r.fraction = fraction;
  r.sample_size = m;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::vector<std::vector<double>> subset(m);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    for (std::size_t i = 0; i < m; ++i) subset[i] = members[order[i]];
    r.shifts.push_back(euclidean_distance(centroid(subset), model.centroid));
  }
  const double count = static_cast<double>(n_samples);
  r.mean_shift = std::accumulate(r.shifts.begin(), r.shifts.end(), 0.0) / count;
  double var = 0.0;
  for (double s : r.shifts) var += (s - r.mean_shift) * (s - r.mean_shift);
  r.std_shift = std::sqrt(var / count);
  return r;
}

}  // namespace cataudit
