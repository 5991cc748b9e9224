#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cataudit/corpus.hpp"
#include "cataudit/error.hpp"

namespace cataudit {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("distance between vectors of length " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

/// Componentwise mean, accumulated in input order.
inline std::vector<double> centroid(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) throw Error("centroid of an empty set");
  const std::size_t dim = vectors.front().size();
  std::vector<double> sum(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != dim) throw DimensionError("centroid over vectors of mixed dimension");
    for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
  }
  const double n = static_cast<double>(vectors.size());
  for (auto& s : sum) s /= n;
  return sum;
}

/// Linear-interpolation percentile: rank r = p/100 * (n-1) on the sorted
/// values, interpolated between floor(r) and ceil(r).
inline double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw Error("percentile p must lie in [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double median(std::span<const double> values) { return percentile(values, 50.0); }

/// A category's centroid and the spread of its members around it. `d_c` is
/// the 75th-percentile member distance, the radius inside which outside
/// articles are treated as full reconsideration candidates.
struct CategoryModel {
  std::string category_id;
  std::vector<std::string> member_ids;
  std::vector<double> centroid;
  std::vector<double> member_distances;  // parallel to member_ids
  double d_c = 0.0;

  bool is_member(const std::string& id) const {
    return std::find(member_ids.begin(), member_ids.end(), id) != member_ids.end();
  }

  double max_member_distance() const {
    return member_distances.empty()
               ? 0.0
               : *std::max_element(member_distances.begin(), member_distances.end());
  }
};

inline constexpr double kCategoryRadiusPercentile = 75.0;

inline CategoryModel build_category_model(const Corpus& corpus, const std::string& category_id) {
  CategoryModel model;
  model.category_id = category_id;
  std::vector<std::vector<double>> members;
  for (const auto& a : corpus.articles()) {
    if (a.in_category(category_id)) {
      model.member_ids.push_back(a.id);
      members.push_back(a.embedding);
    }
  }
  if (members.empty()) throw Error("category '" + category_id + "' has no members in the corpus");
  model.centroid = centroid(members);
  model.member_distances.reserve(members.size());
  for (const auto& v : members) model.member_distances.push_back(euclidean_distance(v, model.centroid));
  model.d_c = percentile(model.member_distances, kCategoryRadiusPercentile);
  return model;
}

inline std::map<std::string, double> distances_to_centroid(const Corpus& corpus,
                                                           const CategoryModel& model) {
  if (corpus.dimension() != model.centroid.size()) {
    throw DimensionError("corpus dimension " + std::to_string(corpus.dimension()) +
                         " does not match centroid dimension " +
                         std::to_string(model.centroid.size()));
  }
  std::map<std::string, double> out;
  for (const auto& a : corpus.articles()) out.emplace(a.id, euclidean_distance(a.embedding, model.centroid));
  return out;
}

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

/// Fixed-width bins aligned to multiples of `width`, covering [min, max].
/// Every bin between the first and last occupied one is emitted, including
/// empty ones.
inline std::vector<HistogramBin> histogram(std::span<const double> values, double width) {
  if (!(width > 0.0)) throw Error("histogram bin width must be positive");
  if (values.empty()) return {};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const auto first = static_cast<long long>(std::floor(*mn / width));
  const auto last = static_cast<long long>(std::floor(*mx / width));
  std::vector<HistogramBin> bins;
  for (long long b = first; b <= last; ++b) {
    bins.push_back({static_cast<double>(b) * width, static_cast<double>(b + 1) * width, 0});
  }
  for (double v : values) {
    const auto b = static_cast<long long>(std::floor(v / width));
    ++bins[static_cast<std::size_t>(b - first)].count;
  }
  return bins;
}

/// Number of (flagged, ignored) pairs where the flagged article is strictly
/// farther from the centroid than the ignored one. Zero exactly when the
/// flagged set is a distance prefix of flagged + ignored.
inline std::size_t blindness_pairs(std::span<const double> flagged, std::span<const double> ignored) {
  std::vector<double> sorted(ignored.begin(), ignored.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t pairs = 0;
  for (double d : flagged) {
    pairs += static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), d) - sorted.begin());
  }
  return pairs;
}

}  // namespace cataudit
