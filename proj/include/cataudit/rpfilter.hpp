#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cataudit/corpus.hpp"
#include "cataudit/error.hpp"
#include "cataudit/vecmath.hpp"

namespace cataudit {

// Reconsideration Probability (RP): an exponential decay over the distance
// from an outside article to the category centroid, shifted so that it is
// exactly 100% at the category radius d_c and saturated at 100% inside it:
//
//   RP(d) = min(100, 100 * exp(-k * (d - d_c)))
//
// k is fixed by one anchor point. MedianHalfLife puts the median outside
// distance at 50%; FarthestAnchor puts the farthest outside article at 0.1%.

enum class CalibrationMode { MedianHalfLife, FarthestAnchor };

inline const char* to_string(CalibrationMode m) {
  return m == CalibrationMode::MedianHalfLife ? "median" : "farthest";
}

struct RpCalibration {
  double d_c = 0.0;
  double k = 1.0;
  CalibrationMode mode = CalibrationMode::MedianHalfLife;
  std::optional<double> median_noncat;
  std::optional<double> d_farthest;
};

struct RpFlag {
  std::string article_id;
  double d_ea = 0.0;
  double rp_percent = 0.0;
};

inline constexpr double kHalfLifeFraction = 0.5;
inline constexpr double kFarthestAnchorFraction = 0.001;

inline RpCalibration calibrate_median(double d_c, std::span<const double> noncat_distances) {
  if (noncat_distances.empty()) throw CalibrationError("no non-category distances to calibrate on");
  const double med = median(noncat_distances);
  if (!(med > d_c)) {
    throw CalibrationError("median non-category distance " + std::to_string(med) +
                           " does not exceed the category radius " + std::to_string(d_c) +
                           "; the filter is undefined");
  }
  RpCalibration cal;
  cal.d_c = d_c;
  cal.k = -std::log(kHalfLifeFraction) / (med - d_c);
  cal.mode = CalibrationMode::MedianHalfLife;
  cal.median_noncat = med;
  return cal;
}

inline RpCalibration calibrate_farthest(double d_c, double d_farthest) {
  if (!(d_farthest > d_c)) {
    throw CalibrationError("farthest distance " + std::to_string(d_farthest) +
                           " does not exceed the category radius " + std::to_string(d_c));
  }
  RpCalibration cal;
  cal.d_c = d_c;
  cal.k = -std::log(kFarthestAnchorFraction) / (d_farthest - d_c);
  cal.mode = CalibrationMode::FarthestAnchor;
  cal.d_farthest = d_farthest;
  return cal;
}

/// 100 * exp(-k (d - d_c)) without saturation; exceeds 100 inside d_c.
inline double rp_unsaturated(const RpCalibration& cal, double d_ea) {
  return 100.0 * std::exp(-cal.k * (d_ea - cal.d_c));
}

inline double rp(const RpCalibration& cal, double d_ea) {
  if (d_ea <= cal.d_c) return 100.0;
  return std::min(100.0, rp_unsaturated(cal, d_ea));
}

/// Distances of every article outside the category, in corpus order.
inline std::vector<double> noncategory_distances(const Corpus& corpus, const CategoryModel& model) {
  std::vector<double> out;
  for (const auto& a : corpus.articles()) {
    if (!a.in_category(model.category_id)) out.push_back(euclidean_distance(a.embedding, model.centroid));
  }
  return out;
}

inline RpCalibration calibrate(const Corpus& corpus, const CategoryModel& model, CalibrationMode mode) {
  const auto distances = noncategory_distances(corpus, model);
  if (distances.empty()) throw CalibrationError("corpus has no articles outside the category");
  if (mode == CalibrationMode::MedianHalfLife) return calibrate_median(model.d_c, distances);
  return calibrate_farthest(model.d_c, *std::max_element(distances.begin(), distances.end()));
}

/// Non-category articles with RP strictly above `threshold_percent`, highest
/// RP first; ties (saturated articles in particular) go to the closer article,
/// then to the smaller id.
inline std::vector<RpFlag> audit_category(const Corpus& corpus, const CategoryModel& model,
                                          const RpCalibration& cal, double threshold_percent) {
  std::vector<RpFlag> flags;
  for (const auto& a : corpus.articles()) {
    if (a.in_category(model.category_id)) continue;
    const double d = euclidean_distance(a.embedding, model.centroid);
    const double score = rp(cal, d);
    if (score > threshold_percent) flags.push_back({a.id, d, score});
  }
  std::sort(flags.begin(), flags.end(), [](const RpFlag& x, const RpFlag& y) {
    if (x.rp_percent != y.rp_percent) return x.rp_percent > y.rp_percent;
    if (x.d_ea != y.d_ea) return x.d_ea < y.d_ea;
    return x.article_id < y.article_id;
  });
  return flags;
}

}  // namespace cataudit
