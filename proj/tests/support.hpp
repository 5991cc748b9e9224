#pragma once

// Seeded generators and scratch-directory helpers shared by the test suites.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cataudit/corpus.hpp"

namespace testsupport {

using Vectors = std::vector<std::vector<double>>;

inline Vectors gaussian_vectors(std::mt19937_64& rng, std::size_t n, std::size_t dim, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  Vectors out(n, std::vector<double>(dim));
  for (auto& v : out)
    for (auto& x : v) x = g(rng);
  return out;
}

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(dim);
  for (auto& x : v) x = u(rng);
  return v;
}

inline std::string id_of(const char* prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

/// First `members` vectors go into `category`, the rest into no category.
inline cataudit::Corpus labelled_corpus(const Vectors& vectors, std::size_t members,
                                        const std::string& category = "cat") {
  std::vector<cataudit::EmbeddedArticle> articles;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    cataudit::EmbeddedArticle a;
    a.id = id_of(i < members ? "m" : "o", i);
    a.title = a.id;
    a.embedding = vectors[i];
    if (i < members) a.categories = {category};
    articles.push_back(std::move(a));
  }
  return cataudit::Corpus(vectors.front().size(), std::move(articles));
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cataudit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testsupport
