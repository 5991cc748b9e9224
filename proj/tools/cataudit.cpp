// cataudit: command-line front end for the category audit pipeline.
//
// Options may come from a TOML/INI file given with --config; flags given on
// the command line win over file values. Subcommand options live in a
// section named after the subcommand, e.g. [audit].

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cataudit/cataudit.hpp"

namespace {

struct TextOptions {
  std::string method = "all";
  std::string rp_mode = "median";
  std::string output_format = "jsonlines";
  std::size_t sample_size = 0;  // 0: no sampling
};

void add_corpus_options(CLI::App& cmd, cataudit::RunConfig& c) {
  cmd.add_option("--corpus", c.corpus_path, "Embedded article corpus (JSON lines)")->required();
  cmd.add_option("--output-dir", c.output_dir, "Directory for report files")->capture_default_str();
}

void add_audit_options(CLI::App& cmd, cataudit::RunConfig& c, TextOptions& t, bool with_method) {
  add_corpus_options(cmd, c);
  cmd.add_option("--category", c.category_id, "Category id to audit")->required();
  if (with_method) {
    cmd.add_option("--method", t.method, "rp, hull, hnsw or all")
        ->check(CLI::IsMember({"rp", "hull", "hnsw", "all"}))
        ->capture_default_str();
  }
  cmd.add_option("--rp-threshold", c.rp_threshold_percent, "Flag articles with RP above this percent")
      ->capture_default_str();
  cmd.add_option("--rp-mode", t.rp_mode, "Decay calibration: median or farthest")
      ->check(CLI::IsMember({"median", "farthest"}))
      ->capture_default_str();
  cmd.add_option("--hnsw-m", c.hnsw.M, "HNSW links per node")->capture_default_str();
  cmd.add_option("--hnsw-ef-construction", c.hnsw.ef_construction, "HNSW build beam width")
      ->capture_default_str();
  cmd.add_option("--hnsw-ef-search", c.hnsw_ef_search, "Minimum HNSW query beam width")->capture_default_str();
  cmd.add_option("--hnsw-seed", c.hnsw_seed, "HNSW level-assignment seed")->capture_default_str();
  cmd.add_option("--projection", c.projection, "pca, or a projection file of {article_id, x, y} records")
      ->capture_default_str();
  cmd.add_option("--sample-size", t.sample_size, "Keep only this many non-category articles (0: all)");
  cmd.add_option("--sample-seed", c.sample_seed, "Seed for --sample-size")->capture_default_str();
  cmd.add_option("--output-format", t.output_format, "jsonlines or csv")
      ->check(CLI::IsMember({"jsonlines", "jsonl", "csv"}))
      ->capture_default_str();
  cmd.add_option("--keywords", c.keywords_top_k, "Keywords listed per RP-flagged article")
      ->capture_default_str();
  cmd.add_option("--index-out", c.index_out, "Also write the HNSW index record here");
}

void resolve(cataudit::RunConfig& c, const TextOptions& t) {
  c.method = cataudit::parse_method(t.method);
  c.rp_mode = cataudit::parse_calibration_mode(t.rp_mode);
  c.output_format = cataudit::parse_output_format(t.output_format);
  if (t.sample_size > 0) c.sample_size = t.sample_size;
}

std::vector<cataudit::EmbeddingItem> load_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cataudit::Error("cannot open item file '" + path + "'");
  std::vector<cataudit::EmbeddingItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (cataudit::detail::blank(line)) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw cataudit::ParseError(path, lineno, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) throw cataudit::ParseError(path, lineno, "record must be an object");
    cataudit::EmbeddingItem item;
    item.id = cataudit::detail::require_string(rec, "id", true, path, lineno);
    item.title = cataudit::detail::require_string(rec, "title", true, path, lineno);
    item.text = cataudit::detail::require_string(rec, "text", false, path, lineno);
    if (auto it = rec.find("categories"); it != rec.end()) {
      if (!it->is_array()) throw cataudit::ParseError(path, lineno, "field 'categories' must be an array");
      for (const auto& c : *it) {
        if (!c.is_string()) throw cataudit::ParseError(path, lineno, "categories must be strings");
        item.categories.insert(c.get<std::string>());
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit Wikipedia-style categories for missing articles using embedding distances"};
  app.set_config("--config", "", "TOML/INI file with option values; flags override it");
  app.require_subcommand(1);

  cataudit::RunConfig config;
  TextOptions text;

  auto* audit = app.add_subcommand("audit", "Flag non-category articles with RP, hull breach and HNSW fishnet");
  add_audit_options(*audit, config, text, true);

  auto* compare = app.add_subcommand("compare", "Run all three methods and count blindness pairs per method");
  add_audit_options(*compare, config, text, false);

  auto* cohesion = app.add_subcommand("cohesion", "Silhouette before and after adding subcategory mean vectors");
  add_corpus_options(*cohesion, config);
  cohesion->add_option("--subcategories", config.subcategories_path, "Subcategory map (JSON lines)")
      ->required();
  cohesion->add_option("--clusters", config.clusters, "k for k-means labelling")->capture_default_str();
  cohesion->add_option("--cluster-seed", config.cluster_seed, "k-means seed")->capture_default_str();
  cohesion->add_option("--max-iters", config.max_iters, "k-means iteration cap")->capture_default_str();
  cohesion->add_option("--cluster-categories", config.cluster_categories,
                       "Label articles by these categories instead of k-means")
      ->delimiter(',');

  auto* stability = app.add_subcommand("stability", "Centroid shift under member resampling");
  add_corpus_options(*stability, config);
  stability->add_option("--category", config.category_id, "Category id")->required();
  stability->add_option("--samples", config.stability_samples, "Number of resamples")->capture_default_str();
  stability->add_option("--fraction", config.stability_fraction, "Fraction of members per resample")
      ->capture_default_str();
  stability->add_option("--seed", config.stability_seed, "Resampling seed")->capture_default_str();

  std::string demo_dir = "demo";
  cataudit::AuditDemoSpec demo_spec;
  cataudit::CohesionDemoSpec cohesion_spec;
  auto* gen_demo = app.add_subcommand("gen-demo", "Write the synthetic demo corpora");
  gen_demo->add_option("--output-dir", demo_dir, "Directory for the demo files")->capture_default_str();
  gen_demo->add_option("--seed", demo_spec.seed, "Audit corpus seed")->capture_default_str();
  gen_demo->add_option("--dimension", demo_spec.dimension, "Audit corpus dimension")->capture_default_str();
  gen_demo->add_option("--members", demo_spec.members, "Category members")->capture_default_str();
  gen_demo->add_option("--background", demo_spec.background, "Background articles")->capture_default_str();
  gen_demo->add_option("--cohesion-seed", cohesion_spec.seed, "Cohesion corpus seed")->capture_default_str();

  cataudit::EmbeddingProviderConfig provider;
  std::string items_path, embed_out;
  std::size_t expect_dim = 0;
  auto* embed = app.add_subcommand("embed", "Encode articles through an HTTP embedding service");
  embed->add_option("--items", items_path, "Articles to encode: {id, title, text, categories} lines")
      ->required();
  embed->add_option("--out", embed_out, "Output corpus path")->required();
  embed->add_option("--endpoint", provider.endpoint, "Service URL (http://)")->capture_default_str();
  embed->add_option("--model", provider.model_name, "Model name sent with each request");
  embed->add_option("--batch-size", provider.batch_size, "Inputs per request")->capture_default_str();
  embed->add_option("--timeout", provider.timeout_seconds, "Per-request timeout in seconds")
      ->capture_default_str();
  embed->add_option("--retries", provider.max_retries, "Retries after transport failures")
      ->capture_default_str();
  embed->add_option("--expect-dim", expect_dim, "Fail unless vectors have this dimension");

  CLI11_PARSE(app, argc, argv);

  try {
    if (audit->parsed()) {
      resolve(config, text);
      const auto o = cataudit::run_audit(config);
      std::printf("category %s: %zu members, d_c = %.6g\n", config.category_id.c_str(),
                  o.model.member_ids.size(), o.model.d_c);
      if (config.method == cataudit::Method::Rp || config.method == cataudit::Method::All) {
        std::printf("rp:   %zu flagged (k = %.6g)\n", o.rp_flags.size(), o.calibration->k);
      }
      if (o.hull) std::printf("hull: %zu flagged\n", o.hull->breaches.size());
      if (o.fishnet) std::printf("hnsw: %zu flagged\n", o.fishnet->intruders.size());
      std::printf("reports written to %s\n", config.output_dir.c_str());
    } else if (compare->parsed()) {
      resolve(config, text);
      config.method = cataudit::Method::All;
      for (const auto& m : cataudit::run_compare(config)) {
        std::printf("%-5s flagged %4zu  blindness pairs %zu\n", m.method.c_str(), m.flagged.size(),
                    m.blindness_pairs_count);
      }
    } else if (cohesion->parsed()) {
      const auto r = cataudit::run_cohesion(config);
      std::printf("silhouette %.6f -> %.6f (relative change %+.4f, k = %zu)\n", r.score_base,
                  r.score_augmented, r.relative_change, r.k);
    } else if (stability->parsed()) {
      const auto r = cataudit::run_stability(config);
      std::printf("centroid shift over %zu samples of %zu members: mean %.6g, std %.6g\n", r.n_samples,
                  r.sample_size, r.mean_shift, r.std_shift);
    } else if (gen_demo->parsed()) {
      const auto files = cataudit::run_gen_demo(demo_dir, demo_spec, cohesion_spec);
      std::printf("wrote %s, %s, %s, %s\n", files.corpus.string().c_str(), files.cohesion_corpus.string().c_str(),
                  files.subcategories.string().c_str(), files.manifest.string().c_str());
    } else if (embed->parsed()) {
      const auto corpus = cataudit::fetch_embeddings(provider, load_items(items_path));
      if (expect_dim && corpus.dimension() != expect_dim) {
        throw cataudit::DimensionError("service returned dimension " + std::to_string(corpus.dimension()) +
                                       ", expected " + std::to_string(expect_dim));
      }
      cataudit::save_corpus(corpus, embed_out);
      std::printf("wrote %zu articles of dimension %zu to %s\n", corpus.size(), corpus.dimension(),
                  embed_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cataudit: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
