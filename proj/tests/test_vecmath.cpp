#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cataudit/vecmath.hpp"
#include "support.hpp"

using namespace cataudit;

namespace {

// Oracles, coded independently of the library.

double oracle_distance(const std::vector<double>& a, const std::vector<double>& b) {
  long double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (long double)(a[i] - b[i]) * (a[i] - b[i]);
  return static_cast<double>(std::sqrt(acc));
}

std::vector<double> oracle_mean(const testsupport::Vectors& vs) {
  std::vector<double> out;
  for (std::size_t j = 0; j < vs.front().size(); ++j) {
    long double s = 0;
    for (const auto& v : vs) s += v[j];
    out.push_back(static_cast<double>(s / vs.size()));
  }
  return out;
}

// Insertion sort, then the stated interpolation rule.
double oracle_percentile(std::vector<double> v, double p) {
  for (std::size_t i = 1; i < v.size(); ++i)
    for (std::size_t j = i; j > 0 && v[j - 1] > v[j]; --j) std::swap(v[j - 1], v[j]);
  const double r = p / 100.0 * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(r);
  if (lo + 1 >= v.size()) return v[lo];
  return v[lo] + (r - lo) * (v[lo + 1] - v[lo]);
}

}  // namespace

TEST(EuclideanDistance, ClosedForms) {
  EXPECT_DOUBLE_EQ(euclidean_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}), 5.0);
  const std::vector<double> v{1.5, -2, 7};
  EXPECT_EQ(euclidean_distance(v, v), 0.0);
  EXPECT_THROW(euclidean_distance(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST(EuclideanDistance, MatchesSumOfSquaresOracle) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 500; ++t) {
    auto ab = testsupport::gaussian_vectors(rng, 2, 16, 10.0);
    const double got = euclidean_distance(ab[0], ab[1]);
    const double want = oracle_distance(ab[0], ab[1]);
    ASSERT_NEAR(got, want, 1e-12 * want);
    ASSERT_EQ(got, euclidean_distance(ab[1], ab[0]));
  }
}

TEST(EuclideanDistance, PropertyTriangleInequality) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 1000; ++t) {
    auto v = testsupport::gaussian_vectors(rng, 3, 8, 5.0);
    ASSERT_LE(euclidean_distance(v[0], v[2]), euclidean_distance(v[0], v[1]) + euclidean_distance(v[1], v[2]) + 1e-9);
  }
}

TEST(Centroid, ClosedFormsAndOracle) {
  testsupport::Vectors two{{1, 1}, {3, 3}};
  EXPECT_EQ(centroid(two), (std::vector<double>{2, 2}));
  testsupport::Vectors one{{4, -1, 2}};
  EXPECT_EQ(centroid(one), one[0]);
  EXPECT_THROW(centroid(testsupport::Vectors{}), Error);
  EXPECT_THROW(centroid(testsupport::Vectors{{1, 2}, {1}}), DimensionError);

  std::mt19937_64 rng(13);
  const auto vs = testsupport::gaussian_vectors(rng, 100, 12, 3.0);
  const auto got = centroid(vs);
  const auto want = oracle_mean(vs);
  for (std::size_t j = 0; j < got.size(); ++j) EXPECT_NEAR(got[j], want[j], 1e-12 * std::max(1.0, std::abs(want[j])));
}

TEST(Centroid, PropertyMinimisesSquaredCost) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g(0, 1);
  for (int t = 0; t < 200; ++t) {
    const auto vs = testsupport::gaussian_vectors(rng, 20, 5);
    const auto c = centroid(vs);
    auto cost = [&](const std::vector<double>& p) {
      double s = 0;
      for (const auto& v : vs) s += squared_distance(v, p);
      return s;
    };
    auto moved = c;
    for (auto& x : moved) x += 1e-3 * g(rng);
    ASSERT_GT(cost(moved), cost(c));
  }
}

TEST(Percentile, ClosedForms) {
  EXPECT_EQ(percentile(std::vector<double>{1, 2, 3, 4}, 50), 2.5);
  EXPECT_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
  for (double p : {0.0, 13.0, 75.0, 100.0}) EXPECT_EQ(percentile(std::vector<double>{5}, p), 5.0);
  EXPECT_EQ(percentile(std::vector<double>{5, 1, 4, 2, 3}, 75), 4.0);
  EXPECT_EQ(oracle_percentile({5, 1, 4, 2, 3}, 75), 4.0);
  EXPECT_THROW(percentile(std::vector<double>{}, 50), Error);
  EXPECT_THROW(percentile(std::vector<double>{1}, 100.5), Error);
  EXPECT_THROW(percentile(std::vector<double>{1}, -1), Error);
}

TEST(Percentile, MatchesHandSortedOracleAndIsMonotone) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0, 100);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    double prev = -1;
    for (double p = 0; p <= 100; p += 2.5) {
      const double got = percentile(v, p);
      ASSERT_NEAR(got, oracle_percentile(v, p), 1e-12 * 100);
      ASSERT_GE(got, *mn);
      ASSERT_LE(got, *mx);
      ASSERT_GE(got, prev);
      prev = got;
    }
  }
}

TEST(CategoryModel, SmallClosedForms) {
  const Corpus two(2, {{"a", "A", {0, 0}, {"c"}, {}}, {"b", "B", {2, 0}, {"c"}, {}}, {"x", "X", {9, 9}, {}, {}}});
  const auto m = build_category_model(two, "c");
  EXPECT_EQ(m.centroid, (std::vector<double>{1, 0}));
  EXPECT_EQ(m.member_distances, (std::vector<double>{1, 1}));
  EXPECT_EQ(m.d_c, 1.0);
  EXPECT_TRUE(m.is_member("a"));
  EXPECT_FALSE(m.is_member("x"));

  const Corpus one(2, {{"a", "A", {3, 4}, {"c"}, {}}});
  const auto s = build_category_model(one, "c");
  EXPECT_EQ(s.centroid, (std::vector<double>{3, 4}));
  EXPECT_EQ(s.member_distances, (std::vector<double>{0}));
  EXPECT_EQ(s.d_c, 0.0);

  EXPECT_THROW(build_category_model(two, "missing"), Error);
}

TEST(CategoryModel, GaussianCloudMatchesOracle) {
  std::mt19937_64 rng(16);
  auto vs = testsupport::gaussian_vectors(rng, 80, 10, 2.0);
  const auto corpus = testsupport::labelled_corpus(vs, 50);
  const auto m = build_category_model(corpus, "cat");
  const testsupport::Vectors members(vs.begin(), vs.begin() + 50);
  const auto c = oracle_mean(members);
  std::vector<double> d;
  for (const auto& v : members) d.push_back(oracle_distance(v, c));
  EXPECT_NEAR(m.d_c, oracle_percentile(d, 75), 1e-9);
  ASSERT_EQ(m.member_distances.size(), m.member_ids.size());
  const auto [mn, mx] = std::minmax_element(m.member_distances.begin(), m.member_distances.end());
  EXPECT_LE(*mn, m.d_c);
  EXPECT_LE(m.d_c, *mx);
  EXPECT_EQ(m.max_member_distance(), *mx);
}

TEST(DistancesToCentroid, CoversEveryArticle) {
  std::mt19937_64 rng(17);
  const auto members_only = testsupport::labelled_corpus(testsupport::gaussian_vectors(rng, 12, 4), 12);
  const auto m = build_category_model(members_only, "cat");
  const auto d = distances_to_centroid(members_only, m);
  ASSERT_EQ(d.size(), 12u);
  for (std::size_t i = 0; i < m.member_ids.size(); ++i) EXPECT_EQ(d.at(m.member_ids[i]), m.member_distances[i]);

  const Corpus at_centre(2, {{"a", "A", {0, 0}, {"c"}, {}}, {"b", "B", {2, 2}, {"c"}, {}}, {"z", "Z", {1, 1}, {}, {}}});
  EXPECT_EQ(distances_to_centroid(at_centre, build_category_model(at_centre, "c")).at("z"), 0.0);

  CategoryModel wrong = m;
  wrong.centroid.push_back(0);
  EXPECT_THROW(distances_to_centroid(members_only, wrong), DimensionError);
}

TEST(Histogram, BinCountsMatchOracleRecount) {
  std::mt19937_64 rng(18);
  const auto corpus = testsupport::labelled_corpus(testsupport::gaussian_vectors(rng, 200, 6, 1.5), 40);
  const auto m = build_category_model(corpus, "cat");
  std::vector<double> values;
  for (const auto& [id, d] : distances_to_centroid(corpus, m)) values.push_back(d);
  const auto bins = histogram(values, 0.5);
  std::size_t total = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    EXPECT_DOUBLE_EQ(bins[b].high - bins[b].low, 0.5);
    if (b) {
      EXPECT_EQ(bins[b].low, bins[b - 1].high);
    }
    std::size_t count = 0;
    for (double v : values) count += (v >= bins[b].low && v < bins[b].high);
    EXPECT_EQ(bins[b].count, count);
    total += bins[b].count;
  }
  EXPECT_EQ(total, values.size());
  EXPECT_GT(bins.front().count, 0u);
  EXPECT_GT(bins.back().count, 0u);
  EXPECT_TRUE(histogram(std::vector<double>{}, 0.5).empty());
  EXPECT_THROW(histogram(values, 0), Error);
}

TEST(BlindnessPairs, CountsFlaggedFartherThanIgnored) {
  EXPECT_EQ(blindness_pairs(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 0u);
  EXPECT_EQ(blindness_pairs(std::vector<double>{5}, std::vector<double>{3, 4, 6}), 2u);
  EXPECT_EQ(blindness_pairs(std::vector<double>{2}, std::vector<double>{2}), 0u);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0, 10);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> f(rng() % 20), ig(rng() % 20);
    for (auto& x : f) x = std::floor(u(rng));
    for (auto& x : ig) x = std::floor(u(rng));
    std::size_t want = 0;
    for (double a : f)
      for (double b : ig) want += a > b;
    ASSERT_EQ(blindness_pairs(f, ig), want);
  }
}
