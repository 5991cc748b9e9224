#pragma once

// Reference implementations shared by the unit tests and the acceptance
// binary. None of them call into the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "cataudit/geometry.hpp"

namespace oracles {

using cataudit::ProjectedPoint;
using Points = std::vector<ProjectedPoint>;

inline double plain_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double orient(const ProjectedPoint& a, const ProjectedPoint& b, const ProjectedPoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool in_closed_triangle(const ProjectedPoint& p, const ProjectedPoint& a, const ProjectedPoint& b,
                        const ProjectedPoint& c) {
  const double d1 = orient(a, b, p), d2 = orient(b, c, p), d3 = orient(c, a, p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  if (neg && pos) return false;
  if (orient(a, b, c) != 0) return true;
  // Degenerate triangle: p must lie within the bounding box of the segment.
  const double lx = std::min({a.x, b.x, c.x}), hx = std::max({a.x, b.x, c.x});
  const double ly = std::min({a.y, b.y, c.y}), hy = std::max({a.y, b.y, c.y});
  return p.x >= lx && p.x <= hx && p.y >= ly && p.y <= hy;
}

// O(n^3) per point: a distinct point is a strict hull vertex iff it lies in
// no closed (possibly degenerate) triangle of the other distinct points.
inline std::set<std::pair<double, double>> brute_hull(const Points& in) {
  std::set<std::pair<double, double>> uniq;
  for (const auto& p : in) uniq.insert({p.x, p.y});
  Points pts;
  for (const auto& [x, y] : uniq) pts.push_back({"", x, y});
  std::set<std::pair<double, double>> out;
  const std::size_t n = pts.size();
  for (std::size_t p = 0; p < n; ++p) {
    bool covered = false;
    for (std::size_t i = 0; i < n && !covered; ++i) {
      if (i == p) continue;
      for (std::size_t j = i; j < n && !covered; ++j) {
        if (j == p) continue;
        for (std::size_t k = j; k < n && !covered; ++k) {
          if (k == p) continue;
          covered = in_closed_triangle(pts[p], pts[i], pts[j], pts[k]);
        }
      }
    }
    if (!covered) out.insert({pts[p].x, pts[p].y});
  }
  return out;
}

// Winding number of a closed polygon around q (q off the boundary).
inline int winding_number(const Points& poly, const ProjectedPoint& q) {
  int wn = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    if (a.y <= q.y) {
      if (b.y > q.y && orient(a, b, q) > 0) ++wn;
    } else if (b.y <= q.y && orient(a, b, q) < 0) {
      --wn;
    }
  }
  return wn;
}

// The silhouette written out term by term.
inline double oracle_silhouette(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& label, std::size_t k) {
  double total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> sum(k, 0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i) continue;
      sum[label[j]] += plain_distance(x[i], x[j]);
      ++cnt[label[j]];
    }
    if (cnt[label[i]] == 0) continue;  // singleton scores 0
    const double a = sum[label[i]] / cnt[label[i]];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != label[i] && cnt[c]) b = std::min(b, sum[c] / cnt[c]);
    const double m = std::max(a, b);
    total += m == 0 ? 0 : (b - a) / m;
  }
  return total / x.size();
}

}  // namespace oracles
