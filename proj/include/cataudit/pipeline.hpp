#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cataudit/cohesion.hpp"
#include "cataudit/corpus.hpp"
#include "cataudit/demo.hpp"
#include "cataudit/error.hpp"
#include "cataudit/geometry.hpp"
#include "cataudit/hnsw.hpp"
#include "cataudit/keywords.hpp"
#include "cataudit/rpfilter.hpp"
#include "cataudit/vecmath.hpp"

namespace cataudit {

enum class Method { Rp, Hull, Hnsw, All };
enum class OutputFormat { JsonLines, Csv };

inline Method parse_method(const std::string& s) {
  if (s == "rp") return Method::Rp;
  if (s == "hull") return Method::Hull;
  if (s == "hnsw") return Method::Hnsw;
  if (s == "all") return Method::All;
  throw Error("unknown method '" + s + "' (expected rp, hull, hnsw or all)");
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Rp: return "rp";
    case Method::Hull: return "hull";
    case Method::Hnsw: return "hnsw";
    case Method::All: return "all";
  }
  return "?";
}

inline CalibrationMode parse_calibration_mode(const std::string& s) {
  if (s == "median") return CalibrationMode::MedianHalfLife;
  if (s == "farthest") return CalibrationMode::FarthestAnchor;
  throw Error("unknown RP mode '" + s + "' (expected median or farthest)");
}

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "jsonlines" || s == "jsonl") return OutputFormat::JsonLines;
  if (s == "csv") return OutputFormat::Csv;
  throw Error("unknown output format '" + s + "' (expected jsonlines or csv)");
}

/// Everything a command needs. All randomness is seeded from here, so a
/// command's output is a function of its config.
struct RunConfig {
  std::string corpus_path;
  std::string category_id;
  Method method = Method::All;
  double rp_threshold_percent = 75.0;
  CalibrationMode rp_mode = CalibrationMode::MedianHalfLife;
  HnswParams hnsw{};
  std::size_t hnsw_ef_search = 64;
  std::uint64_t hnsw_seed = 42;
  std::string projection = "pca";  // "pca" or a projection file path
  std::optional<std::size_t> sample_size;
  std::uint64_t sample_seed = 1;
  std::string output_dir = "cataudit-out";
  OutputFormat output_format = OutputFormat::JsonLines;
  std::size_t keywords_top_k = 5;
  std::string index_out;  // optional HNSW index record path

  // cohesion
  std::string subcategories_path;
  std::size_t clusters = 2;
  std::uint64_t cluster_seed = 1;
  std::size_t max_iters = 300;
  std::vector<std::string> cluster_categories;  // label by category instead of k-means

  // stability
  std::size_t stability_samples = 100;
  double stability_fraction = 0.8;
  std::uint64_t stability_seed = 1;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["corpus_path"] = corpus_path;
    j["category_id"] = category_id;
    j["method"] = to_string(method);
    j["rp_threshold_percent"] = rp_threshold_percent;
    j["rp_mode"] = to_string(rp_mode);
    j["hnsw"] = {{"M", hnsw.M},
                 {"ef_construction", hnsw.ef_construction},
                 {"ef_search", hnsw_ef_search},
                 {"seed", hnsw_seed}};
    j["projection"] = projection;
    j["sample_size"] = sample_size ? nlohmann::json(*sample_size) : nlohmann::json(nullptr);
    j["sample_seed"] = sample_seed;
    j["output_dir"] = output_dir;
    j["output_format"] = output_format == OutputFormat::Csv ? "csv" : "jsonlines";
    j["keywords_top_k"] = keywords_top_k;
    j["subcategories_path"] = subcategories_path;
    j["clusters"] = clusters;
    j["cluster_seed"] = cluster_seed;
    j["max_iters"] = max_iters;
    j["cluster_categories"] = cluster_categories;
    j["stability"] = {{"n_samples", stability_samples},
                      {"fraction", stability_fraction},
                      {"seed", stability_seed}};
    return j;
  }
};

namespace detail {

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw Error(std::string(what) + " path is required");
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(std::string(what) + " file '" + path + "' does not exist");
  }
}

}  // namespace detail

inline void validate_audit_config(const RunConfig& c) {
  detail::require_file(c.corpus_path, "corpus");
  if (c.category_id.empty()) throw Error("category id is required");
  if (!(c.rp_threshold_percent > 0.0 && c.rp_threshold_percent <= 100.0)) {
    throw Error("RP threshold must lie in (0, 100]");
  }
  if (c.hnsw.M < 2) throw Error("HNSW M must be at least 2");
  if (c.hnsw.ef_construction < 1 || c.hnsw_ef_search < 1) throw Error("HNSW ef values must be positive");
  if (c.projection != "pca") detail::require_file(c.projection, "projection");
  if (c.sample_size && *c.sample_size < 1) throw Error("sample size must be positive");
}

inline void validate_cohesion_config(const RunConfig& c) {
  detail::require_file(c.corpus_path, "corpus");
  detail::require_file(c.subcategories_path, "subcategory");
  if (c.cluster_categories.empty() && c.clusters < 2) throw Error("cohesion needs at least 2 clusters");
  if (!c.cluster_categories.empty() && c.cluster_categories.size() < 2) {
    throw Error("cohesion needs at least 2 cluster categories");
  }
  if (c.max_iters < 1) throw Error("max iterations must be positive");
}

inline void validate_stability_config(const RunConfig& c) {
  detail::require_file(c.corpus_path, "corpus");
  if (c.category_id.empty()) throw Error("category id is required");
  if (!(c.stability_fraction > 0.0 && c.stability_fraction <= 1.0)) {
    throw Error("stability fraction must lie in (0, 1]");
  }
  if (c.stability_samples < 1) throw Error("stability sample count must be positive");
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

/// A line-delimited JSON or CSV table whose first line carries the resolved
/// config. CSV cells hold the JSON rendering of numbers; arrays are joined
/// with ';'.
class TableWriter {
 public:
  TableWriter(const std::filesystem::path& path, OutputFormat format, const nlohmann::json& config,
              std::vector<std::string> columns)
      : out_(path, std::ios::binary), format_(format), columns_(std::move(columns)) {
    if (!out_) throw Error("cannot write report '" + path.string() + "'");
    if (format_ == OutputFormat::JsonLines) {
      out_ << nlohmann::json{{"config", config}}.dump() << '\n';
    } else {
      out_ << "# config: " << config.dump() << '\n';
      for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
      out_ << '\n';
    }
  }

  void add(const nlohmann::json& record) {
    if (format_ == OutputFormat::JsonLines) {
      out_ << record.dump() << '\n';
      return;
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out_ << ',';
      out_ << cell(record.at(columns_[i]));
    }
    out_ << '\n';
  }

  static std::string extension(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".jsonl"; }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n#") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  static std::string cell(const nlohmann::json& v) {
    if (v.is_string()) return quote(v.get<std::string>());
    if (v.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) {
        joined += (i ? ";" : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
      }
      return quote(joined);
    }
    return v.dump();
  }

  std::ofstream out_;
  OutputFormat format_;
  std::vector<std::string> columns_;
};

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

inline void write_histogram_csv(const std::filesystem::path& path, const nlohmann::json& config,
                                const std::vector<std::pair<std::string, std::vector<HistogramBin>>>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "# config: " << config.dump() << '\n';
  out << "series,bin_low,bin_high,count\n";
  for (const auto& [name, bins] : series) {
    for (const auto& b : bins) {
      out << name << ',' << nlohmann::json(b.low).dump() << ',' << nlohmann::json(b.high).dump() << ','
          << b.count << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// audit / compare
// ---------------------------------------------------------------------------

inline constexpr double kDistanceHistogramWidth = 0.5;

struct AuditOutcome {
  Corpus corpus;
  CategoryModel model;
  std::optional<RpCalibration> calibration;
  std::vector<RpFlag> rp_flags;
  std::optional<BreachReport> hull;
  std::optional<Hull2D> hull_shape;
  std::optional<FishnetResult> fishnet;
};

inline Corpus load_working_corpus(const RunConfig& config) {
  Corpus corpus = load_corpus(config.corpus_path);
  if (config.sample_size) corpus = sample_background(corpus, config.category_id, *config.sample_size, config.sample_seed);
  return corpus;
}

/// Runs the selected methods without writing anything.
inline AuditOutcome evaluate_audit(const RunConfig& config, Method method) {
  AuditOutcome o{load_working_corpus(config), {}, {}, {}, {}, {}, {}};
  o.model = build_category_model(o.corpus, config.category_id);
  const bool rp_needed = method == Method::Rp || method == Method::All;

  try {
    o.calibration = calibrate(o.corpus, o.model, config.rp_mode);
  } catch (const CalibrationError&) {
    if (rp_needed) throw;
  }
  if (rp_needed) o.rp_flags = audit_category(o.corpus, o.model, *o.calibration, config.rp_threshold_percent);

  if (method == Method::Hull || method == Method::All) {
    auto projected = config.projection == "pca"
                         ? project_pca(o.corpus)
                         : align_projection(load_projection(config.projection), o.corpus);
    o.hull_shape = category_hull(projected, o.corpus, o.model);
    o.hull = breach_audit(*o.hull_shape, projected, o.model, o.corpus);
  }

  if (method == Method::Hnsw || method == Method::All) {
    const auto index = HnswIndex::build(o.corpus, config.hnsw, config.hnsw_seed);
    if (!config.index_out.empty()) {
      std::ofstream out(config.index_out, std::ios::binary);
      if (!out) throw Error("cannot write index record '" + config.index_out + "'");
      index.save(out);
    }
    o.fishnet = fishnet_retrieval(index, o.model, config.hnsw_ef_search);
  }
  return o;
}

inline nlohmann::json summary_record(const char* method, std::size_t flagged, nlohmann::json parameters,
                                     const AuditOutcome& o) {
  return {{"method", method},
          {"flagged_count", flagged},
          {"parameters", std::move(parameters)},
          {"k", o.calibration ? nlohmann::json(o.calibration->k) : nlohmann::json(nullptr)},
          {"d_c", o.model.d_c}};
}

/// `audit`: evaluates the configured methods and writes rp_report,
/// hull_report (+ hull_histogram), hnsw_report, histogram and summary under
/// output_dir.
inline AuditOutcome run_audit(const RunConfig& config) {
  validate_audit_config(config);
  auto o = evaluate_audit(config, config.method);

  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  const auto cfg = config.to_json();
  const auto ext = TableWriter::extension(config.output_format);
  nlohmann::json methods = nlohmann::json::array();

  if (config.method == Method::Rp || config.method == Method::All) {
    TableWriter w(dir / ("rp_report" + ext), config.output_format, cfg,
                  {"article_id", "title", "d_ea", "rp_percent", "keywords"});
    for (const auto& f : o.rp_flags) {
      const auto& a = o.corpus.at(f.article_id);
      w.add({{"article_id", f.article_id},
             {"title", a.title},
             {"d_ea", f.d_ea},
             {"rp_percent", f.rp_percent},
             {"keywords", extract_keywords(a.text.value_or(a.title), config.keywords_top_k)}});
    }
    nlohmann::json params{{"threshold_percent", config.rp_threshold_percent},
                          {"mode", to_string(o.calibration->mode)}};
    if (o.calibration->median_noncat) params["median_noncat"] = *o.calibration->median_noncat;
    if (o.calibration->d_farthest) params["d_farthest"] = *o.calibration->d_farthest;
    methods.push_back(summary_record("rp", o.rp_flags.size(), params, o));
  }

  if (o.hull) {
    TableWriter w(dir / ("hull_report" + ext), config.output_format, cfg,
                  {"article_id", "x", "y", "d_to_centroid"});
    for (const auto& b : o.hull->breaches) {
      w.add({{"article_id", b.article_id}, {"x", b.x}, {"y", b.y}, {"d_to_centroid", b.d_to_centroid}});
    }
    write_histogram_csv(dir / "hull_histogram.csv", cfg, {{"hull_breach", o.hull->histogram}});
    methods.push_back(summary_record("hull", o.hull->breaches.size(),
                                     {{"projection", config.projection},
                                      {"hull_vertices", o.hull_shape->vertices.size()},
                                      {"noncategory_count", o.hull->noncategory_count},
                                      {"blindness_pairs_count", o.hull->blindness_pairs_count}},
                                     o));
  }

  if (o.fishnet) {
    TableWriter w(dir / ("hnsw_report" + ext), config.output_format, cfg,
                  {"article_id", "title", "d_to_centroid"});
    for (const auto& n : o.fishnet->intruders) {
      w.add({{"article_id", n.id}, {"title", o.corpus.at(n.id).title}, {"d_to_centroid", n.distance}});
    }
    methods.push_back(summary_record("hnsw", o.fishnet->intruders.size(),
                                     {{"M", config.hnsw.M},
                                      {"ef_construction", config.hnsw.ef_construction},
                                      {"ef_search", config.hnsw_ef_search},
                                      {"seed", config.hnsw_seed},
                                      {"final_k", o.fishnet->final_k},
                                      {"rounds", o.fishnet->rounds},
                                      {"members_retrieved", o.fishnet->members_retrieved},
                                      {"all_members_retrieved", o.fishnet->all_members_retrieved}},
                                     o));
  }

  std::vector<double> member_d = o.model.member_distances;
  std::vector<double> other_d = noncategory_distances(o.corpus, o.model);
  write_histogram_csv(dir / "histogram.csv", cfg,
                      {{"category", histogram(member_d, kDistanceHistogramWidth)},
                       {"noncategory", histogram(other_d, kDistanceHistogramWidth)}});
  write_json_file(dir / "summary.json", {{"config", cfg}, {"methods", methods}});
  return o;
}

struct MethodComparison {
  std::string method;
  std::vector<std::pair<std::string, double>> flagged;  // (id, distance to centroid), ascending
  std::size_t blindness_pairs_count = 0;
};

inline MethodComparison compare_entry(const std::string& method, const Corpus& corpus,
                                      const CategoryModel& model, const std::set<std::string>& flagged_ids) {
  MethodComparison m;
  m.method = method;
  std::vector<double> flagged, ignored;
  for (const auto& a : corpus.articles()) {
    if (a.in_category(model.category_id)) continue;
    const double d = euclidean_distance(a.embedding, model.centroid);
    if (flagged_ids.count(a.id)) {
      m.flagged.emplace_back(a.id, d);
      flagged.push_back(d);
    } else {
      ignored.push_back(d);
    }
  }
  std::sort(m.flagged.begin(), m.flagged.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second < y.second : x.first < y.first;
  });
  m.blindness_pairs_count = blindness_pairs(flagged, ignored);
  return m;
}

/// `compare`: runs all three methods and reports, for each, the flagged
/// articles with their true distances and the number of blindness pairs
/// (a flagged article strictly farther from the centroid than an ignored one).
inline std::vector<MethodComparison> run_compare(const RunConfig& config) {
  validate_audit_config(config);
  const auto o = evaluate_audit(config, Method::All);

  std::set<std::string> rp_ids, hull_ids, hnsw_ids;
  for (const auto& f : o.rp_flags) rp_ids.insert(f.article_id);
  for (const auto& b : o.hull->breaches) hull_ids.insert(b.article_id);
  for (const auto& n : o.fishnet->intruders) hnsw_ids.insert(n.id);
  std::vector<MethodComparison> out{compare_entry("rp", o.corpus, o.model, rp_ids),
                                    compare_entry("hull", o.corpus, o.model, hull_ids),
                                    compare_entry("hnsw", o.corpus, o.model, hnsw_ids)};

  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : out) {
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& [id, d] : m.flagged) flagged.push_back({{"article_id", id}, {"d_to_centroid", d}});
    methods.push_back({{"method", m.method},
                       {"flagged_count", m.flagged.size()},
                       {"blindness_pairs_count", m.blindness_pairs_count},
                       {"distance_prefix", m.blindness_pairs_count == 0},
                       {"flagged", flagged}});
  }
  std::filesystem::create_directories(config.output_dir);
  write_json_file(std::filesystem::path(config.output_dir) / "comparison.json",
                  {{"config", config.to_json()},
                   {"category_id", o.model.category_id},
                   {"d_c", o.model.d_c},
                   {"max_member_distance", o.model.max_member_distance()},
                   {"methods", methods}});
  return out;
}

// ---------------------------------------------------------------------------
// cohesion / stability
// ---------------------------------------------------------------------------

/// Cluster labels for the cohesion experiment: membership in one of
/// `cluster_categories` when given (articles in none are left out, articles
/// in several are an error), k-means over the whole corpus otherwise.
inline std::map<std::string, std::size_t> cohesion_labels(const Corpus& corpus, const RunConfig& config) {
  std::map<std::string, std::size_t> labels;
  if (!config.cluster_categories.empty()) {
    for (const auto& a : corpus.articles()) {
      std::optional<std::size_t> label;
      for (std::size_t c = 0; c < config.cluster_categories.size(); ++c) {
        if (!a.in_category(config.cluster_categories[c])) continue;
        if (label) throw Error("article '" + a.id + "' belongs to more than one cluster category");
        label = c;
      }
      if (label) labels[a.id] = *label;
    }
    return labels;
  }
  std::vector<std::vector<double>> vectors;
  for (const auto& a : corpus.articles()) vectors.push_back(a.embedding);
  const auto km = kmeans(vectors, config.clusters, config.cluster_seed, config.max_iters);
  for (std::size_t i = 0; i < corpus.size(); ++i) labels[corpus[i].id] = km.assignment.labels[i];
  return labels;
}

inline CohesionResult run_cohesion(const RunConfig& config) {
  validate_cohesion_config(config);
  const auto corpus = load_corpus(config.corpus_path);
  const auto subs = load_subcategories(config.subcategories_path);
  const auto result = cohesion_experiment(corpus, cohesion_labels(corpus, config), subs);
  std::filesystem::create_directories(config.output_dir);
  write_json_file(std::filesystem::path(config.output_dir) / "cohesion_report.json",
                  {{"config", config.to_json()},
                   {"subcategories", subs.size()},
                   {"k", result.k},
                   {"points_base", result.points_base},
                   {"points_augmented", result.points_augmented},
                   {"score_base", result.score_base},
                   {"score_augmented", result.score_augmented},
                   {"relative_change", result.relative_change}});
  return result;
}

inline StabilityResult run_stability(const RunConfig& config) {
  validate_stability_config(config);
  const auto corpus = load_corpus(config.corpus_path);
  const auto model = build_category_model(corpus, config.category_id);
  auto result = centroid_stability(corpus, model, config.stability_samples, config.stability_fraction,
                                   config.stability_seed);
  std::filesystem::create_directories(config.output_dir);
  write_json_file(std::filesystem::path(config.output_dir) / "stability_report.json",
                  {{"config", config.to_json()},
                   {"n_samples", result.n_samples},
                   {"fraction", result.fraction},
                   {"sample_size", result.sample_size},
                   {"mean_shift", result.mean_shift},
                   {"std_shift", result.std_shift},
                   {"seed", result.seed}});
  return result;
}

// ---------------------------------------------------------------------------
// gen-demo
// ---------------------------------------------------------------------------

struct DemoFiles {
  std::filesystem::path corpus;
  std::filesystem::path cohesion_corpus;
  std::filesystem::path subcategories;
  std::filesystem::path manifest;
};

/// Writes the synthetic audit corpus, the two-cluster cohesion corpus with
/// its subcategory map, and a manifest naming the category and the planted
/// intruders.
inline DemoFiles run_gen_demo(const std::string& output_dir, const AuditDemoSpec& audit_spec = {},
                              const CohesionDemoSpec& cohesion_spec = {}) {
  const std::filesystem::path dir(output_dir);
  std::filesystem::create_directories(dir);
  DemoFiles files{dir / "corpus.jsonl", dir / "cohesion_corpus.jsonl", dir / "subcategories.jsonl",
                  dir / "demo_manifest.json"};

  const auto audit = make_audit_demo(audit_spec);
  save_corpus(audit.corpus, files.corpus.string());
  const auto cohesion = make_cohesion_demo(cohesion_spec);
  save_corpus(cohesion.corpus, files.cohesion_corpus.string());
  {
    std::ofstream out(files.subcategories, std::ios::binary);
    if (!out) throw Error("cannot write '" + files.subcategories.string() + "'");
    write_subcategories(out, cohesion.subcategories);
  }
  write_json_file(files.manifest, {{"category_id", audit.category},
                                   {"planted_intruders", audit.planted},
                                   {"audit_seed", audit_spec.seed},
                                   {"cohesion_seed", cohesion_spec.seed},
                                   {"cohesion_cluster_categories", {"cluster_a", "cluster_b"}}});
  return files;
}

}  // namespace cataudit
