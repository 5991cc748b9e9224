#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cataudit/corpus.hpp"
#include "cataudit/error.hpp"
#include "cataudit/vecmath.hpp"

namespace cataudit {

struct ProjectedPoint {
  std::string article_id;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const ProjectedPoint&, const ProjectedPoint&) = default;
};

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

/// Top-two principal axes of a point cloud. Eigenvalues are those of the
/// sample covariance (1/(n-1) normalisation), all of them, descending.
struct PcaModel {
  std::vector<double> mean;
  std::vector<double> axis_x;
  std::vector<double> axis_y;
  std::vector<double> eigenvalues;

  ProjectedPoint project(const std::string& id, std::span<const double> v) const {
    double px = 0.0, py = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double c = v[i] - mean[i];
      px += c * axis_x[i];
      py += c * axis_y[i];
    }
    return {id, px, py};
  }
};

namespace detail {

// Flip so that the largest-magnitude loading (first one on ties) is positive.
inline void orient_axis(std::vector<double>& axis) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (std::abs(axis[i]) > std::abs(axis[arg])) arg = i;
  }
  if (axis[arg] < 0) {
    for (auto& a : axis) a = -a;
  }
}

}  // namespace detail

inline PcaModel fit_pca(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw Error("PCA projection needs at least 2 points");
  const std::size_t dim = vectors.front().size();
  if (dim < 2) throw DimensionError("PCA projection needs at least 2 dimensions");
  const auto n = static_cast<Eigen::Index>(vectors.size());
  const auto d = static_cast<Eigen::Index>(dim);

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& v = vectors[static_cast<std::size_t>(r)];
    if (v.size() != dim) throw DimensionError("PCA over vectors of mixed dimension");
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = v[static_cast<std::size_t>(c)];
  }
  const Eigen::RowVectorXd mu = x.colwise().mean();
  x.rowwise() -= mu;

  const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  if (x.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    throw Error("PCA projection of zero-variance input (all points identical)");
  }

  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("PCA eigen-decomposition failed");

  // Eigen returns ascending eigenvalues.
  const auto& evals = solver.eigenvalues();
  const auto& evecs = solver.eigenvectors();
  PcaModel model;
  model.mean.assign(mu.data(), mu.data() + d);
  for (Eigen::Index i = d; i-- > 0;) model.eigenvalues.push_back(evals(i));
  model.axis_x.assign(evecs.col(d - 1).data(), evecs.col(d - 1).data() + d);
  model.axis_y.assign(evecs.col(d - 2).data(), evecs.col(d - 2).data() + d);
  detail::orient_axis(model.axis_x);
  detail::orient_axis(model.axis_y);
  return model;
}

/// Deterministic 2D projection of every article onto the corpus's top two
/// principal directions, in corpus order.
inline std::vector<ProjectedPoint> project_pca(const Corpus& corpus) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(corpus.size());
  for (const auto& a : corpus.articles()) vectors.push_back(a.embedding);
  const auto model = fit_pca(vectors);
  std::vector<ProjectedPoint> out;
  out.reserve(corpus.size());
  for (const auto& a : corpus.articles()) out.push_back(model.project(a.id, a.embedding));
  return out;
}

inline std::vector<ProjectedPoint> parse_projection(std::istream& in,
                                                    const std::string& source = "<stream>") {
  std::vector<ProjectedPoint> out;
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
    ProjectedPoint p;
    p.article_id = detail::require_string(rec, "article_id", true, source, lineno);
    for (auto [key, slot] : {std::pair{"x", &p.x}, std::pair{"y", &p.y}}) {
      auto it = rec.find(key);
      if (it == rec.end() || !(it->is_number() || it->is_null())) {
        throw ParseError(source, lineno, std::string("field '") + key + "' must be a number");
      }
      *slot = it->is_null() ? std::nan("") : it->get<double>();
      if (!std::isfinite(*slot)) {
        throw ParseError(source, lineno, "article '" + p.article_id + "' has non-finite " + key);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<ProjectedPoint> load_projection(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open projection file '" + path + "'");
  return parse_projection(in, path);
}

inline void write_projection(std::ostream& out, std::span<const ProjectedPoint> points) {
  for (const auto& p : points) {
    out << nlohmann::json{{"article_id", p.article_id}, {"x", p.x}, {"y", p.y}}.dump() << '\n';
  }
}

inline void save_projection(std::span<const ProjectedPoint> points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write projection file '" + path + "'");
  write_projection(out, points);
}

/// Reorders externally supplied points to corpus order. Every corpus article
/// needs a point and every point must name a corpus article.
inline std::vector<ProjectedPoint> align_projection(std::span<const ProjectedPoint> points,
                                                    const Corpus& corpus) {
  std::unordered_map<std::string, const ProjectedPoint*> by_id;
  for (const auto& p : points) {
    if (!corpus.find(p.article_id)) throw Error("projection names unknown article '" + p.article_id + "'");
    if (!by_id.emplace(p.article_id, &p).second) {
      throw Error("projection has duplicate article '" + p.article_id + "'");
    }
  }
  std::vector<ProjectedPoint> out;
  out.reserve(corpus.size());
  for (const auto& a : corpus.articles()) {
    auto it = by_id.find(a.id);
    if (it == by_id.end()) throw Error("no projection for article '" + a.id + "'");
    out.push_back(*it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convex hull
// ---------------------------------------------------------------------------

inline constexpr double kOrientationEpsilon = 1e-12;

/// (a - o) x (b - o); positive for a left turn o -> a -> b.
inline double cross(const ProjectedPoint& o, const ProjectedPoint& a, const ProjectedPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Strictly convex hull, counterclockwise from the lexicographically smallest
/// vertex. Inputs with fewer than three non-collinear points give a
/// degenerate hull of one or two vertices.
struct Hull2D {
  std::vector<ProjectedPoint> vertices;

  bool degenerate() const noexcept { return vertices.size() < 3; }
};

/// Andrew's monotone chain. Points within kOrientationEpsilon of an edge's
/// line are dropped, so the result has no collinear vertices.
inline Hull2D convex_hull(std::vector<ProjectedPoint> points) {
  std::sort(points.begin(), points.end(), [](const ProjectedPoint& a, const ProjectedPoint& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.article_id < b.article_id;
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const ProjectedPoint& a, const ProjectedPoint& b) {
                             return a.x == b.x && a.y == b.y;
                           }),
               points.end());
  if (points.size() < 3) return {points};

  std::vector<ProjectedPoint> h(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= kOrientationEpsilon) --k;
    h[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], points[i]) <= kOrientationEpsilon) --k;
    h[k++] = points[i];
  }
  h.resize(k - 1);
  return {h};
}

/// True when p is inside the hull or on its boundary.
inline bool contains(const Hull2D& hull, const ProjectedPoint& p) {
  if (hull.degenerate()) {
    throw Error("containment test on a degenerate hull of " + std::to_string(hull.vertices.size()) +
                " vertices; audit such categories by distance instead");
  }
  const auto& v = hull.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (cross(v[i], v[(i + 1) % v.size()], p) < -kOrientationEpsilon) return false;
  }
  return true;
}

/// Hull of the category members' projected points.
inline Hull2D category_hull(std::span<const ProjectedPoint> aligned, const Corpus& corpus,
                            const CategoryModel& model) {
  std::vector<ProjectedPoint> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].in_category(model.category_id)) members.push_back(aligned[i]);
  }
  return convex_hull(std::move(members));
}

// ---------------------------------------------------------------------------
// Breach audit
// ---------------------------------------------------------------------------

struct BreachRecord {
  std::string article_id;
  double x = 0.0;
  double y = 0.0;
  double d_to_centroid = 0.0;
};

inline constexpr double kBreachHistogramWidth = 0.5;

struct BreachReport {
  std::vector<BreachRecord> breaches;  // ascending by d_to_centroid, then id
  std::vector<HistogramBin> histogram;
  std::size_t noncategory_count = 0;
  std::size_t blindness_pairs_count = 0;
};

/// Non-category articles whose projection falls inside or on the hull, with
/// their distance to the centroid in the original space. `projected` must
/// cover every corpus article (any order).
inline BreachReport breach_audit(const Hull2D& hull, std::span<const ProjectedPoint> projected,
                                 const CategoryModel& model, const Corpus& corpus) {
  std::unordered_map<std::string, const ProjectedPoint*> by_id;
  for (const auto& p : projected) by_id.emplace(p.article_id, &p);

  BreachReport report;
  std::vector<double> flagged, ignored;
  for (const auto& a : corpus.articles()) {
    auto it = by_id.find(a.id);
    if (it == by_id.end()) throw Error("no projection for article '" + a.id + "'");
    if (a.in_category(model.category_id)) continue;
    ++report.noncategory_count;
    const double d = euclidean_distance(a.embedding, model.centroid);
    if (contains(hull, *it->second)) {
      report.breaches.push_back({a.id, it->second->x, it->second->y, d});
      flagged.push_back(d);
    } else {
      ignored.push_back(d);
    }
  }
  std::sort(report.breaches.begin(), report.breaches.end(),
            [](const BreachRecord& a, const BreachRecord& b) {
              return a.d_to_centroid != b.d_to_centroid ? a.d_to_centroid < b.d_to_centroid
                                                        : a.article_id < b.article_id;
            });
  report.histogram = histogram(flagged, kBreachHistogramWidth);
  report.blindness_pairs_count = blindness_pairs(flagged, ignored);
  return report;
}

}  // namespace cataudit
