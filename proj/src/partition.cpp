#include "layph/partition.hpp"

#include <algorithm>
#include <random>

namespace layph {

namespace {

// Entry/exit/internal-edge accounting for one member set, with host edges
// rerouted through the given proxies. Shared by the density filter, the
// refresh recheck and (indirectly, via tests) the layered build.
struct RoleCounts {
  size_t entries = 0, exits = 0, internal_edges = 0;
  bool dense() const { return entries * exits < internal_edges; }
};

RoleCounts count_roles(const Graph& g, const std::vector<VertexId>& members,
                       const std::vector<const ProxyRecord*>& proxies) {
  std::unordered_set<VertexId> in_sg(members.begin(), members.end());
  // reroute lookup: host -> targets, per direction
  std::unordered_map<VertexId, const ProxyRecord*> into, outof;
  for (const ProxyRecord* p : proxies)
    (p->direction == ProxyRecord::IntoSubgraph ? into : outof)[p->host] = p;
  auto rerouted = [&](const std::unordered_map<VertexId, const ProxyRecord*>& m, VertexId host,
                      VertexId member) {
    auto it = m.find(host);
    if (it == m.end()) return false;
    const auto& t = it->second->targets;
    return std::binary_search(t.begin(), t.end(), member);
  };
  RoleCounts rc;
  for (VertexId v : members) {
    bool entry = false, exit = false;
    for (const auto& e : g.in(v)) {
      if (in_sg.count(e.to)) continue;
      if (rerouted(into, e.to, v))
        ++rc.internal_edges;  // host edge arrives via the proxy
      else
        entry = true;
    }
    for (const auto& e : g.out(v)) {
      if (in_sg.count(e.to)) {
        ++rc.internal_edges;
        continue;
      }
      if (!rerouted(outof, e.to, v)) exit = true;
      // rerouted: edge now targets the proxy, counted below
    }
    rc.entries += entry;
    rc.exits += exit;
  }
  for (const ProxyRecord* p : proxies) {
    // a proxy is an entry (into) or exit (out of) through its replication
    // link; its rerouted edges are internal
    if (p->direction == ProxyRecord::IntoSubgraph) ++rc.entries;
    else ++rc.exits;
    size_t live_targets = 0;
    for (VertexId t : p->targets)
      if (p->direction == ProxyRecord::IntoSubgraph ? g.has_edge(p->host, t)
                                                    : g.has_edge(t, p->host))
        ++live_targets;
    if (p->direction == ProxyRecord::OutOfSubgraph) rc.internal_edges += live_targets;
    else rc.internal_edges += 0;  // into-proxy target edges counted at the member side
  }
  return rc;
}

std::vector<const ProxyRecord*> proxies_of(const std::vector<ProxyRecord>& proxies, int32_t sg) {
  std::vector<const ProxyRecord*> r;
  for (const auto& p : proxies)
    if (p.subgraph == sg) r.push_back(&p);
  return r;
}

// Single-level Louvain local moving on the undirected projection, community
// size capped at K. Returns communities of size >= 2.
std::vector<std::vector<VertexId>> louvain_candidates(const Graph& g, uint32_t K, uint64_t seed) {
  const size_t n = g.vertex_count();
  std::vector<std::vector<std::pair<VertexId, double>>> und(n);
  {
    std::vector<std::unordered_map<VertexId, double>> acc(n);
    for (VertexId u = 0; u < n; ++u)
      for (const auto& e : g.out(u)) {
        if (e.to == u) continue;  // self-loops carry no community signal
        acc[u][e.to] += 1.0;
        acc[e.to][u] += 1.0;
      }
    for (VertexId v = 0; v < n; ++v) und[v].assign(acc[v].begin(), acc[v].end());
    for (VertexId v = 0; v < n; ++v)
      std::sort(und[v].begin(), und[v].end());
  }
  std::vector<double> k(n, 0);
  double two_m = 0;
  for (VertexId v = 0; v < n; ++v) {
    for (const auto& [u, w] : und[v]) k[v] += w;
    two_m += k[v];
  }
  if (two_m == 0) return {};

  std::vector<int64_t> comm(n);
  std::vector<double> tot(n, 0);
  std::vector<uint32_t> csize(n, 0);
  std::vector<VertexId> order;
  for (VertexId v = 0; v < n; ++v) {
    comm[v] = v;
    tot[v] = k[v];
    csize[v] = 1;
    if (g.is_live(v) && !und[v].empty()) order.push_back(v);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> w_to(n, 0);
  std::vector<int64_t> touched;
  for (int pass = 0; pass < 20; ++pass) {
    bool moved = false;
    for (VertexId v : order) {
      touched.clear();
      for (const auto& [u, w] : und[v]) {
        int64_t c = comm[u];
        if (w_to[c] == 0) touched.push_back(c);
        w_to[c] += w;
      }
      int64_t c0 = comm[v];
      tot[c0] -= k[v];
      --csize[c0];
      int64_t best = c0;
      double best_gain = w_to[c0] - tot[c0] * k[v] / two_m;
      for (int64_t c : touched) {
        if (c == c0) continue;
        if (csize[c] >= K) continue;  // cap enforced at merge time
        double gain = w_to[c] - tot[c] * k[v] / two_m;
        if (gain > best_gain + 1e-12 || (std::abs(gain - best_gain) <= 1e-12 && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      comm[v] = best;
      tot[best] += k[v];
      ++csize[best];
      moved |= best != c0;
      for (int64_t c : touched) w_to[c] = 0;
    }
    if (!moved) break;
  }

  std::unordered_map<int64_t, std::vector<VertexId>> groups;
  for (VertexId v : order) groups[comm[v]].push_back(v);
  std::vector<std::vector<VertexId>> result;
  for (auto& [c, vs] : groups) {
    if (vs.size() < 2) continue;
    std::sort(vs.begin(), vs.end());
    result.push_back(std::move(vs));
  }
  std::sort(result.begin(), result.end());
  return result;
}

Partition assemble(const Graph& g, std::vector<std::vector<VertexId>> groups, uint32_t cap) {
  Partition p;
  p.cap = cap;
  p.subgraph_of.assign(g.vertex_count(), kOutlier);
  for (auto& members : groups) {
    int32_t id = static_cast<int32_t>(p.subgraphs.size());
    for (VertexId v : members) p.subgraph_of[v] = id;
    p.subgraphs.push_back({std::move(members)});
  }
  return p;
}

}  // namespace

Partition Partition::from_membership(const Graph& g,
                                     const std::vector<std::vector<VertexId>>& groups) {
  std::vector<std::vector<VertexId>> sorted = groups;
  size_t cap = 0;
  for (auto& m : sorted) {
    std::sort(m.begin(), m.end());
    cap = std::max(cap, m.size());
  }
  return assemble(g, std::move(sorted), static_cast<uint32_t>(cap));
}

SubgraphRoles subgraph_roles(const Graph& g, const Partition& p, int32_t sg) {
  SubgraphRoles r;
  for (VertexId v : p.subgraphs[sg].members) {
    bool entry = false, exit = false;
    for (const auto& e : g.in(v)) entry |= p.subgraph(e.to) != sg;
    for (const auto& e : g.out(v)) exit |= p.subgraph(e.to) != sg;
    if (entry) r.entries.push_back(v);
    if (exit) r.exits.push_back(v);
  }
  return r;
}

size_t internal_edge_count(const Graph& g, const Partition& p, int32_t sg) {
  size_t n = 0;
  for (VertexId v : p.subgraphs[sg].members)
    for (const auto& e : g.out(v)) n += p.subgraph(e.to) == sg;
  return n;
}

bool density_ok(const Graph& g, const Partition& p, int32_t sg) {
  auto roles = subgraph_roles(g, p, sg);
  return roles.entries.size() * roles.exits.size() < internal_edge_count(g, p, sg);
}

uint32_t default_subgraph_cap(size_t vertex_count) {
  double k = static_cast<double>(vertex_count) * 0.0002;
  return static_cast<uint32_t>(std::clamp(k, 16.0, 100000.0));
}

Partition discover_subgraphs(const Graph& g, uint32_t K, uint64_t seed) {
  Partition cand = assemble(g, louvain_candidates(g, K, seed), K);
  std::vector<std::vector<VertexId>> kept;
  for (size_t i = 0; i < cand.subgraphs.size(); ++i)
    if (density_ok(g, cand, static_cast<int32_t>(i)))
      kept.push_back(cand.subgraphs[i].members);
  return assemble(g, std::move(kept), K);
}

std::vector<ProxyRecord> replicate_vertices(const Graph& g, const Partition& p,
                                            uint32_t threshold) {
  std::vector<ProxyRecord> records;
  for (size_t sg = 0; sg < p.subgraphs.size(); ++sg) {
    const auto& members = p.subgraphs[sg].members;
    if (members.size() >= p.cap) continue;
    uint32_t budget = p.cap - static_cast<uint32_t>(members.size());
    // host -> member targets, per direction
    std::unordered_map<VertexId, std::vector<VertexId>> into, outof;
    for (VertexId v : members) {
      for (const auto& e : g.in(v))
        if (p.subgraph(e.to) != static_cast<int32_t>(sg)) into[e.to].push_back(v);
      for (const auto& e : g.out(v))
        if (p.subgraph(e.to) != static_cast<int32_t>(sg)) outof[e.to].push_back(v);
    }
    struct Candidate {
      VertexId host;
      ProxyRecord::Direction dir;
      std::vector<VertexId>* targets;
    };
    std::vector<Candidate> cands;
    for (auto& [host, targets] : into)
      if (targets.size() > threshold) cands.push_back({host, ProxyRecord::IntoSubgraph, &targets});
    for (auto& [host, targets] : outof)
      if (targets.size() > threshold)
        cands.push_back({host, ProxyRecord::OutOfSubgraph, &targets});
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.targets->size() != b.targets->size()) return a.targets->size() > b.targets->size();
      if (a.host != b.host) return a.host < b.host;
      return a.dir < b.dir;
    });
    for (const auto& c : cands) {
      if (budget == 0) break;
      --budget;
      ProxyRecord rec;
      rec.host = c.host;
      rec.proxy = kNoVertex;  // assigned below
      rec.subgraph = static_cast<int32_t>(sg);
      rec.direction = c.dir;
      rec.targets = *c.targets;
      std::sort(rec.targets.begin(), rec.targets.end());
      records.push_back(std::move(rec));
    }
  }
  for (size_t i = 0; i < records.size(); ++i)
    records[i].proxy = static_cast<VertexId>(g.vertex_count() + i);
  return records;
}

PreprocessResult preprocess_partition(const Graph& g, uint32_t K, uint32_t replication_threshold,
                                      uint64_t seed) {
  Partition cand = assemble(g, louvain_candidates(g, K, seed), K);
  std::vector<ProxyRecord> proxies = replicate_vertices(g, cand, replication_threshold);

  std::vector<std::vector<VertexId>> kept;
  std::vector<ProxyRecord> kept_proxies;
  for (size_t sg = 0; sg < cand.subgraphs.size(); ++sg) {
    auto px = proxies_of(proxies, static_cast<int32_t>(sg));
    RoleCounts rc = count_roles(g, cand.subgraphs[sg].members, px);
    if (!rc.dense()) continue;
    int32_t new_id = static_cast<int32_t>(kept.size());
    kept.push_back(cand.subgraphs[sg].members);
    for (const ProxyRecord* p : px) {
      ProxyRecord copy = *p;
      copy.subgraph = new_id;
      kept_proxies.push_back(std::move(copy));
    }
  }
  PreprocessResult r{assemble(g, std::move(kept), K), std::move(kept_proxies)};
  // Proxy ids sit above the real id space with headroom so that vertices
  // inserted by later batches cannot collide with them; ids stay stable
  // until the next full rediscovery.
  size_t base = g.vertex_count() + std::max<size_t>(1024, g.vertex_count() / 8);
  for (size_t i = 0; i < r.proxies.size(); ++i)
    r.proxies[i].proxy = static_cast<VertexId>(base + i);
  return r;
}

RefreshOutcome refresh_partition(const Graph& g_new, const Partition& p,
                                 const std::vector<ProxyRecord>& proxies, const NetDiff& diff,
                                 const RefreshPolicy& policy, uint64_t& accumulated_updates) {
  accumulated_updates += diff.inserted.size() + diff.deleted.size() + diff.reweighted.size() +
                         diff.vertices_added.size() + diff.vertices_removed.size();
  if (accumulated_updates >= policy.rebuild_threshold) {
    accumulated_updates = 0;
    uint32_t K = p.cap ? p.cap : default_subgraph_cap(g_new.live_count());
    PreprocessResult pre =
        preprocess_partition(g_new, K, policy.replication_threshold, policy.seed);
    RefreshOutcome out{std::move(pre.partition), std::move(pre.proxies), {}, true};
    for (size_t i = 0; i < p.subgraphs.size(); ++i) out.dissolved.push_back(static_cast<int32_t>(i));
    return out;
  }

  RefreshOutcome out;
  out.partition = p;
  out.proxies.reserve(proxies.size());
  for (const auto& px : proxies)
    if (g_new.is_live(px.host)) out.proxies.push_back(px);
  out.partition.subgraph_of.resize(g_new.vertex_count(), kOutlier);

  std::unordered_set<int32_t> dirty;
  auto mark = [&](VertexId v) {
    int32_t sg = out.partition.subgraph(v);
    if (sg != kOutlier) dirty.insert(sg);
  };
  for (const auto& e : diff.inserted) mark(e.u), mark(e.v);
  for (const auto& e : diff.deleted) mark(e.u), mark(e.v);
  for (const auto& [e, ow] : diff.reweighted) mark(e.u), mark(e.v);
  for (VertexId v : diff.vertices_removed) {
    mark(v);
    int32_t sg = out.partition.subgraph(v);
    if (sg != kOutlier) {
      auto& m = out.partition.subgraphs[sg].members;
      m.erase(std::remove(m.begin(), m.end(), v), m.end());
      out.partition.subgraph_of[v] = kOutlier;
    }
  }

  std::vector<int32_t> dissolve;
  for (int32_t sg : dirty) {
    const auto& members = out.partition.subgraphs[sg].members;
    bool keep = members.size() >= 2;
    if (keep) {
      std::vector<const ProxyRecord*> px;
      for (const auto& rec : out.proxies)
        if (rec.subgraph == sg) px.push_back(&rec);
      keep = count_roles(g_new, members, px).dense();
    }
    if (!keep) dissolve.push_back(sg);
  }
  if (!dissolve.empty()) {
    std::sort(dissolve.begin(), dissolve.end());
    // Dissolved subgraphs become empty tombstone slots rather than being
    // renumbered: surviving subgraph ids (and with them any per-subgraph
    // caches held by callers) stay valid until the next full rediscovery.
    for (int32_t sg : dissolve) {
      for (VertexId v : out.partition.subgraphs[sg].members)
        out.partition.subgraph_of[v] = kOutlier;
      out.partition.subgraphs[sg].members.clear();
    }
    std::vector<ProxyRecord> kept;
    kept.reserve(out.proxies.size());
    for (auto& rec : out.proxies)
      if (!std::binary_search(dissolve.begin(), dissolve.end(), rec.subgraph))
        kept.push_back(std::move(rec));
    out.proxies = std::move(kept);
    out.dissolved = std::move(dissolve);
  }
  return out;
}

}  // namespace layph
