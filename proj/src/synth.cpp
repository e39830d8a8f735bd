#include "layph/synth.hpp"

#include <algorithm>
#include <random>
#include <tuple>
#include <unordered_set>

namespace layph {

namespace {

uint64_t pair_key(uint64_t a, uint64_t b) { return (a << 32) | b; }

double draw_weight(std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(1, 10)(rng);
}

}  // namespace

Graph make_random_graph(size_t n, size_t m, bool weighted, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<uint64_t> pick(0, n ? n - 1 : 0);
  std::unordered_set<uint64_t> used;
  std::vector<std::tuple<ExternalId, ExternalId, double>> edges;
  edges.reserve(m);
  size_t cap = n * (n - 1);
  if (m > cap) m = cap;
  size_t attempts = 0, limit = 40 * m + 100;
  while (edges.size() < m && attempts++ < limit) {
    uint64_t u = pick(rng), v = pick(rng);
    if (u == v) continue;
    if (!used.insert(pair_key(u, v)).second) continue;
    edges.emplace_back(u, v, weighted ? draw_weight(rng) : 1.0);
  }
  Graph g = Graph::from_edges(edges, weighted);
  UpdateBatch fill;
  for (uint64_t v = 0; v < n; ++v)
    if (g.internal_id(v) == kNoVertex) fill.updates.push_back(UnitUpdate::insert_vertex(v));
  return fill.empty() ? g : g.apply(fill);
}

Graph make_planted_partition(size_t communities, size_t block_size, double lambda_in,
                             double lambda_out, bool weighted, uint64_t seed) {
  std::mt19937_64 rng(seed);
  size_t n = communities * block_size;
  std::poisson_distribution<int> deg_in(lambda_in), deg_out(lambda_out);
  std::unordered_set<uint64_t> used;
  std::vector<std::tuple<ExternalId, ExternalId, double>> edges;
  for (uint64_t u = 0; u < n; ++u) {
    uint64_t block = u / block_size, base = block * block_size;
    int k_in = std::min<int>(deg_in(rng), static_cast<int>(block_size) - 1);
    std::uniform_int_distribution<uint64_t> in_pick(0, block_size - 1);
    for (int t = 0; t < k_in; ++t) {
      uint64_t v = base + in_pick(rng);
      if (v == u || !used.insert(pair_key(u, v)).second) continue;
      edges.emplace_back(u, v, weighted ? draw_weight(rng) : 1.0);
    }
    int k_out = deg_out(rng);
    std::uniform_int_distribution<uint64_t> out_pick(0, n - block_size - 1);
    for (int t = 0; t < k_out && communities > 1; ++t) {
      uint64_t r = out_pick(rng);
      uint64_t v = r < base ? r : r + block_size;  // skip own block
      if (!used.insert(pair_key(u, v)).second) continue;
      edges.emplace_back(u, v, weighted ? draw_weight(rng) : 1.0);
    }
  }
  Graph g = Graph::from_edges(edges, weighted);
  UpdateBatch fill;
  for (uint64_t v = 0; v < n; ++v)
    if (g.internal_id(v) == kNoVertex) fill.updates.push_back(UnitUpdate::insert_vertex(v));
  return fill.empty() ? g : g.apply(fill);
}

UpdateBatch gen_update_batch(const Graph& g, size_t n_add, size_t n_del, size_t n_vadd,
                             size_t n_vdel, uint64_t seed, const std::vector<VertexId>& protect) {
  std::mt19937_64 rng(seed);
  UpdateBatch batch;

  std::vector<std::pair<VertexId, VertexId>> existing;
  for (VertexId u = 0; u < g.vertex_count(); ++u)
    for (const auto& e : g.out(u)) existing.emplace_back(u, e.to);
  if (n_del > existing.size()) throw Error("gen_update_batch: not enough edges to delete");
  std::shuffle(existing.begin(), existing.end(), rng);
  std::unordered_set<uint64_t> deleted;
  for (size_t i = 0; i < n_del; ++i) {
    auto [u, v] = existing[i];
    deleted.insert(pair_key(u, v));
    batch.updates.push_back(
        UnitUpdate::delete_edge(g.external_id(u), g.external_id(v)));
  }

  std::vector<VertexId> live;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (g.is_live(v)) live.push_back(v);
  if (live.size() < 2 && n_add > 0) throw Error("gen_update_batch: too few vertices");

  std::unordered_set<uint64_t> added;
  size_t made = 0, attempts = 0, limit = 60 * (n_add + 1);
  std::uniform_int_distribution<size_t> pick(0, live.empty() ? 0 : live.size() - 1);
  while (made < n_add && attempts++ < limit) {
    VertexId u = live[pick(rng)], v = live[pick(rng)];
    if (u == v) continue;
    uint64_t key = pair_key(u, v);
    if (added.count(key)) continue;
    // an edge removed earlier in this batch may be re-added; a live edge not
    if (!deleted.count(key) && g.has_edge(u, v)) continue;
    added.insert(key);
    double w = g.weighted() ? draw_weight(rng) : 1.0;
    batch.updates.push_back(UnitUpdate::insert_edge(g.external_id(u), g.external_id(v), w));
    ++made;
  }
  if (made < n_add) throw Error("gen_update_batch: could not place requested insertions");

  ExternalId next_ext = 0;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    next_ext = std::max(next_ext, g.external_id(v) + 1);
  for (size_t i = 0; i < n_vadd; ++i) {
    ExternalId nv = next_ext++;
    batch.updates.push_back(UnitUpdate::insert_vertex(nv));
    if (!live.empty()) {
      size_t fan = 1 + i % 3;
      for (size_t t = 0; t < fan; ++t) {
        VertexId other = live[pick(rng)];
        double w = g.weighted() ? draw_weight(rng) : 1.0;
        if (t % 2 == 0)
          batch.updates.push_back(UnitUpdate::insert_edge(nv, g.external_id(other), w));
        else
          batch.updates.push_back(UnitUpdate::insert_edge(g.external_id(other), nv, w));
      }
    }
  }

  std::unordered_set<VertexId> guarded(protect.begin(), protect.end());
  std::vector<VertexId> removable;
  for (VertexId v : live)
    if (!guarded.count(v)) removable.push_back(v);
  if (n_vdel > removable.size()) throw Error("gen_update_batch: not enough vertices to delete");
  std::shuffle(removable.begin(), removable.end(), rng);
  for (size_t i = 0; i < n_vdel; ++i)
    batch.updates.push_back(UnitUpdate::delete_vertex(g.external_id(removable[i])));

  return batch;
}

}  // namespace layph
