#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cataudit/error.hpp"
#include "cataudit/vecmath.hpp"

namespace cataudit {

/// Build parameters. Upper layers keep at most M links per node, layer 0
/// keeps at most 2*M, and node levels follow floor(-ln(U) / ln(M)).
struct HnswParams {
  std::size_t M = 16;
  std::size_t ef_construction = 200;

  std::size_t max_links(std::size_t level) const { return level == 0 ? 2 * M : M; }
  double level_norm() const { return 1.0 / std::log(static_cast<double>(M)); }
};

struct Neighbor {
  std::string id;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Hierarchical navigable small-world graph over a fixed set of vectors.
///
/// Construction is serial and deterministic for a given seed and insertion
/// order. Links are kept symmetric on every layer: when a node's list
/// overflows and a link is pruned, the reverse link is removed as well.
/// Neighbor selection is the plain "closest M" rule. A built index is
/// read-only; searches allocate their own scratch state and may run
/// concurrently.
class HnswIndex {
 public:
  using NodeId = std::uint32_t;

  HnswIndex(HnswParams params, std::uint64_t seed) : params_(params), seed_(seed), rng_(seed) {
    if (params_.M < 2) throw Error("HNSW parameter M must be at least 2");
    if (params_.ef_construction < 1) throw Error("HNSW ef_construction must be positive");
  }

  static HnswIndex build(const std::vector<std::pair<std::string, std::vector<double>>>& items,
                         HnswParams params = {}, std::uint64_t seed = 42) {
    if (items.empty()) throw Error("cannot build an HNSW index over no vectors");
    HnswIndex index(params, seed);
    for (const auto& [id, v] : items) index.insert(id, v);
    return index;
  }

  static HnswIndex build(const Corpus& corpus, HnswParams params = {}, std::uint64_t seed = 42) {
    std::vector<std::pair<std::string, std::vector<double>>> items;
    items.reserve(corpus.size());
    for (const auto& a : corpus.articles()) items.emplace_back(a.id, a.embedding);
    return build(items, params, seed);
  }

  void insert(const std::string& id, std::span<const double> vec) {
    if (size() == 0) {
      if (vec.empty()) throw DimensionError("cannot index zero-length vectors");
      dim_ = vec.size();
    } else if (vec.size() != dim_) {
      throw DimensionError("vector '" + id + "' has dimension " + std::to_string(vec.size()) +
                           ", index dimension is " + std::to_string(dim_));
    }
    if (positions_.count(id)) throw Error("duplicate id '" + id + "' in HNSW index");

    const auto node = static_cast<NodeId>(ids_.size());
    const std::size_t level = draw_level();
    ids_.push_back(id);
    positions_.emplace(id, node);
    data_.insert(data_.end(), vec.begin(), vec.end());
    links_.emplace_back(level + 1);

    if (node == 0) {
      entry_ = 0;
      max_level_ = level;
      return;
    }

    const auto q = vector_of(node);
    NodeId ep = entry_;
    for (std::size_t lc = max_level_; lc > level; --lc) ep = greedy_closest(q, ep, lc);

    std::vector<NodeId> entries{ep};
    for (std::size_t lc = std::min(level, max_level_) + 1; lc-- > 0;) {
      auto found = search_layer(q, entries, params_.ef_construction, lc);
      const std::size_t take = std::min(params_.M, found.size());
      for (std::size_t i = 0; i < take; ++i) connect(node, found[i].second, lc);
      entries.clear();
      for (const auto& f : found) entries.push_back(f.second);
    }

    if (level > max_level_) {
      max_level_ = level;
      entry_ = node;
    }
  }

  /// k nearest indexed vectors to `query`, ascending by exact Euclidean
  /// distance (ties by id). Greedy descent through the upper layers, then a
  /// beam of width `ef` on layer 0.
  std::vector<Neighbor> knn_search(std::span<const double> query, std::size_t k,
                                   std::size_t ef) const {
    if (k == 0) throw Error("knn_search requires k >= 1");
    if (ef < k) throw Error("knn_search requires ef >= k");
    if (size() == 0) return {};
    if (query.size() != dim_) {
      throw DimensionError("query dimension " + std::to_string(query.size()) +
                           " does not match index dimension " + std::to_string(dim_));
    }
    NodeId ep = entry_;
    for (std::size_t lc = max_level_; lc > 0; --lc) ep = greedy_closest(query, ep, lc);
    auto found = search_layer(query, {ep}, ef, 0);

    std::vector<Neighbor> out;
    out.reserve(found.size());
    for (const auto& f : found) out.push_back({ids_[f.second], euclidean_distance(query, vector_of(f.second))});
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    if (out.size() > k) out.resize(k);
    return out;
  }

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  std::size_t top_level() const noexcept { return max_level_; }
  const HnswParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& entry_point() const { return ids_.at(entry_); }
  const std::string& id_of(NodeId n) const { return ids_.at(n); }
  std::size_t level_of(NodeId n) const { return links_.at(n).size() - 1; }
  bool contains(const std::string& id) const { return positions_.count(id) != 0; }

  std::optional<NodeId> node_of(const std::string& id) const {
    auto it = positions_.find(id);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const double> vector_of(NodeId n) const {
    return {data_.data() + static_cast<std::size_t>(n) * dim_, dim_};
  }

  std::span<const NodeId> links(NodeId n, std::size_t level) const { return links_.at(n).at(level); }

  /// Number of nodes present on `level` (every node is on layer 0).
  std::size_t layer_population(std::size_t level) const {
    return static_cast<std::size_t>(std::count_if(links_.begin(), links_.end(), [&](const auto& l) {
      return l.size() > level;
    }));
  }

  /// Empty when the structural invariants hold; otherwise one message per
  /// violation found.
  std::vector<std::string> check_invariants() const {
    std::vector<std::string> problems;
    for (NodeId n = 0; n < size(); ++n) {
      for (std::size_t lc = 0; lc < links_[n].size(); ++lc) {
        const auto& list = links_[n][lc];
        if (list.size() > params_.max_links(lc)) {
          problems.push_back(ids_[n] + ": degree " + std::to_string(list.size()) + " on layer " +
                             std::to_string(lc));
        }
        for (NodeId m : list) {
          if (m >= size()) {
            problems.push_back(ids_[n] + ": link to unknown node " + std::to_string(m));
            continue;
          }
          if (m == n) problems.push_back(ids_[n] + ": self link on layer " + std::to_string(lc));
          if (level_of(m) < lc) {
            problems.push_back(ids_[n] + ": link to " + ids_[m] + " above its level");
            continue;
          }
          const auto& back = links_[m][lc];
          if (std::find(back.begin(), back.end(), n) == back.end()) {
            problems.push_back(ids_[n] + " -> " + ids_[m] + " on layer " + std::to_string(lc) +
                               " has no reverse link");
          }
        }
      }
    }
    if (size() > 0 && (entry_ >= size() || level_of(entry_) != max_level_)) problems.push_back("entry point is not on the top layer");
    return problems;
  }

  friend bool operator==(const HnswIndex& a, const HnswIndex& b) {
    return a.params_.M == b.params_.M && a.params_.ef_construction == b.params_.ef_construction &&
           a.seed_ == b.seed_ && a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_ &&
           a.links_ == b.links_ && a.entry_ == b.entry_ && a.max_level_ == b.max_level_;
  }

  /// Versioned JSON record of params, seed, nodes and per-layer links.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["params"] = {{"M", params_.M}, {"ef_construction", params_.ef_construction}};
    j["seed"] = seed_;
    j["dimension"] = dim_;
    j["entry_point"] = entry_;
    j["max_level"] = max_level_;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (NodeId n = 0; n < size(); ++n) {
      auto v = vector_of(n);
      nodes.push_back({{"id", ids_[n]},
                       {"vector", std::vector<double>(v.begin(), v.end())},
                       {"links", links_[n]}});
    }
    return j;
  }

  static HnswIndex from_json(const nlohmann::json& j) {
    if (j.value("format", "") != kFormat) throw Error("not an HNSW index record");
    if (j.value("version", 0) != kVersion) {
      throw Error("unsupported HNSW index version " + std::to_string(j.value("version", 0)));
    }
    HnswParams params;
    params.M = j.at("params").at("M").get<std::size_t>();
    params.ef_construction = j.at("params").at("ef_construction").get<std::size_t>();
    HnswIndex index(params, j.at("seed").get<std::uint64_t>());
    index.dim_ = j.at("dimension").get<std::size_t>();
    for (const auto& node : j.at("nodes")) {
      const auto id = node.at("id").get<std::string>();
      const auto vec = node.at("vector").get<std::vector<double>>();
      if (vec.size() != index.dim_) throw DimensionError("index record node '" + id + "' has wrong dimension");
      index.positions_.emplace(id, static_cast<NodeId>(index.ids_.size()));
      index.ids_.push_back(id);
      index.data_.insert(index.data_.end(), vec.begin(), vec.end());
      index.links_.push_back(node.at("links").get<std::vector<std::vector<NodeId>>>());
      if (index.links_.back().empty()) throw Error("index record node '" + id + "' has no layers");
    }
    index.entry_ = j.at("entry_point").get<NodeId>();
    index.max_level_ = j.at("max_level").get<std::size_t>();
    index.rng_.discard(index.size());
    if (auto problems = index.check_invariants(); !problems.empty()) {
      throw Error("HNSW index record is inconsistent: " + problems.front());
    }
    return index;
  }

  void save(std::ostream& out) const { out << to_json().dump() << '\n'; }

  static HnswIndex load(std::istream& in) {
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("malformed HNSW index record: ") + e.what());
    }
  }

 private:
  static constexpr const char* kFormat = "cataudit-hnsw";
  static constexpr int kVersion = 1;

  using Candidate = std::pair<double, NodeId>;  // (squared distance, node)

  // One engine draw per insert keeps the level stream reproducible after a
  // reload (the engine is advanced by the node count).
  std::size_t draw_level() {
    const double u = 1.0 - static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // (0, 1]
    return static_cast<std::size_t>(std::floor(-std::log(u) * params_.level_norm()));
  }

  double sq(std::span<const double> q, NodeId n) const { return squared_distance(q, vector_of(n)); }

  NodeId greedy_closest(std::span<const double> q, NodeId ep, std::size_t level) const {
    Candidate best{sq(q, ep), ep};
    for (bool moved = true; moved;) {
      moved = false;
      for (NodeId m : links_[best.second][level]) {
        Candidate c{sq(q, m), m};
        if (c < best) {
          best = c;
          moved = true;
        }
      }
    }
    return best.second;
  }

  // Beam search on one layer; returns up to ef candidates, closest first.
  std::vector<Candidate> search_layer(std::span<const double> q, const std::vector<NodeId>& entries,
                                      std::size_t ef, std::size_t level) const {
    std::vector<char> visited(size(), 0);
    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
    std::priority_queue<Candidate> best;
    for (NodeId e : entries) {
      if (visited[e]) continue;
      visited[e] = 1;
      Candidate c{sq(q, e), e};
      frontier.push(c);
      best.push(c);
      if (best.size() > ef) best.pop();
    }
    while (!frontier.empty()) {
      const Candidate cur = frontier.top();
      if (best.size() >= ef && cur > best.top()) break;
      frontier.pop();
      for (NodeId m : links_[cur.second][level]) {
        if (visited[m]) continue;
        visited[m] = 1;
        Candidate c{sq(q, m), m};
        if (best.size() < ef || c < best.top()) {
          frontier.push(c);
          best.push(c);
          if (best.size() > ef) best.pop();
        }
      }
    }
    std::vector<Candidate> out(best.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = best.top();
      best.pop();
    }
    return out;
  }

  void connect(NodeId a, NodeId b, std::size_t level) {
    auto& la = links_[a][level];
    if (std::find(la.begin(), la.end(), b) != la.end()) return;
    la.push_back(b);
    links_[b][level].push_back(a);
    shrink(a, level);
    shrink(b, level);
  }

  // Keeps the closest max_links(level) links of n and drops the reverse side
  // of every link removed.
  void shrink(NodeId n, std::size_t level) {
    auto& list = links_[n][level];
    const std::size_t cap = params_.max_links(level);
    if (list.size() <= cap) return;
    const auto here = vector_of(n);
    std::vector<Candidate> ranked;
    ranked.reserve(list.size());
    for (NodeId m : list) ranked.push_back({sq(here, m), m});
    std::sort(ranked.begin(), ranked.end());
    list.clear();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (i < cap) {
        list.push_back(ranked[i].second);
      } else {
        auto& back = links_[ranked[i].second][level];
        back.erase(std::remove(back.begin(), back.end(), n), back.end());
      }
    }
  }

  HnswParams params_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeId> positions_;
  std::vector<double> data_;                            // row-major, size() x dim_
  std::vector<std::vector<std::vector<NodeId>>> links_;  // [node][level] -> neighbors
  NodeId entry_ = 0;
  std::size_t max_level_ = 0;
};

/// Outcome of centroid-anchored fishnet retrieval.
struct FishnetResult {
  std::vector<Neighbor> intruders;  // non-members within the farthest member distance
  std::size_t final_k = 0;
  std::size_t rounds = 0;
  std::size_t members_retrieved = 0;
  bool all_members_retrieved = false;
};

/// Casts a widening kNN net from the category centroid until every member has
/// been caught (k starts at max(16, |members|) and doubles, capped at the
/// index size), then keeps the non-members no farther from the centroid than
/// the farthest member. The centroid is a query location only.
inline FishnetResult fishnet_retrieval(const HnswIndex& index, const CategoryModel& model,
                                       std::size_t min_ef = 0) {
  for (const auto& id : model.member_ids) {
    if (!index.contains(id)) throw Error("category member '" + id + "' is missing from the index");
  }
  const std::unordered_set<std::string> members(model.member_ids.begin(), model.member_ids.end());
  const double radius = model.max_member_distance();
  const std::size_t n = index.size();

  FishnetResult result;
  std::size_t k = std::min(n, std::max<std::size_t>(16, members.size()));
  std::vector<Neighbor> caught;
  for (;;) {
    ++result.rounds;
    caught = index.knn_search(model.centroid, k, std::max(k, min_ef));
    result.members_retrieved = static_cast<std::size_t>(std::count_if(
        caught.begin(), caught.end(), [&](const Neighbor& nb) { return members.count(nb.id) != 0; }));
    if (result.members_retrieved == members.size() || k >= n) break;
    k = std::min(n, 2 * k);
  }
  result.final_k = k;
  result.all_members_retrieved = result.members_retrieved == members.size();
  for (auto& nb : caught) {
    if (!members.count(nb.id) && nb.distance <= radius) result.intruders.push_back(std::move(nb));
  }
  return result;
}

/// A non-member reached from the category through per-member kNN.
struct MemberKnnHit {
  std::string id;
  std::size_t hits = 0;                 // members listing it among their k nearest
  double nearest_member_distance = 0.0;
};

/// For every member, its k nearest indexed neighbors (itself excluded); the
/// non-members among them, most frequently hit first.
inline std::vector<MemberKnnHit> member_knn_candidates(const HnswIndex& index,
                                                       const CategoryModel& model, std::size_t k = 5,
                                                       std::size_t ef = 64) {
  const std::unordered_set<std::string> members(model.member_ids.begin(), model.member_ids.end());
  std::map<std::string, MemberKnnHit> hits;
  for (const auto& id : model.member_ids) {
    const auto node = index.node_of(id);
    if (!node) throw Error("category member '" + id + "' is missing from the index");
    for (const auto& nb : index.knn_search(index.vector_of(*node), k + 1, std::max(ef, k + 1))) {
      if (nb.id == id || members.count(nb.id)) continue;
      auto [it, fresh] = hits.try_emplace(nb.id, MemberKnnHit{nb.id, 0, nb.distance});
      ++it->second.hits;
      it->second.nearest_member_distance = std::min(it->second.nearest_member_distance, nb.distance);
    }
  }
  std::vector<MemberKnnHit> out;
  for (auto& [id, h] : hits) out.push_back(std::move(h));
  std::stable_sort(out.begin(), out.end(), [](const MemberKnnHit& a, const MemberKnnHit& b) {
    if (a.hits != b.hits) return a.hits > b.hits;
    return a.nearest_member_distance < b.nearest_member_distance;
  });
  return out;
}

}  // namespace cataudit
