#include "layph/layered.hpp"

#include <algorithm>

namespace layph {

namespace {

// (host, subgraph, direction) identifies at most one proxy record.
uint64_t proxy_key(VertexId host, int32_t sg, ProxyRecord::Direction dir) {
  return (static_cast<uint64_t>(host) << 32) |
         (static_cast<uint64_t>(static_cast<uint32_t>(sg)) << 1) |
         (dir == ProxyRecord::OutOfSubgraph ? 1u : 0u);
}

}  // namespace

LayeredGraph LayeredGraph::build(const Graph& g, Partition p, std::vector<ProxyRecord> proxies) {
  LayeredGraph lg;
  lg.n_real_ = g.vertex_count();
  lg.part_ = std::move(p);
  lg.proxies_ = std::move(proxies);

  size_t n_total = lg.n_real_;
  for (const auto& rec : lg.proxies_)
    n_total = std::max(n_total, static_cast<size_t>(rec.proxy) + 1);

  lg.subgraph_of_.assign(n_total, kOutlier);
  for (VertexId v = 0; v < lg.n_real_; ++v) lg.subgraph_of_[v] = lg.part_.subgraph(v);
  lg.role_.assign(n_total, 0);
  lg.live_.assign(n_total, 0);
  for (VertexId v = 0; v < lg.n_real_; ++v) lg.live_[v] = g.is_live(v);
  lg.out_.assign(n_total, {});
  lg.ctx_.assign(n_total, SenderContext{});
  {
    auto real_ctx = sender_contexts(g);
    std::copy(real_ctx.begin(), real_ctx.end(), lg.ctx_.begin());
  }

  std::unordered_map<uint64_t, const ProxyRecord*> reroute;
  reroute.reserve(lg.proxies_.size());
  for (auto& rec : lg.proxies_) {
    if (!g.is_live(rec.host)) continue;  // refresh drops these; belt and braces
    std::sort(rec.targets.begin(), rec.targets.end());
    reroute[proxy_key(rec.host, rec.subgraph, rec.direction)] = &rec;
    lg.subgraph_of_[rec.proxy] = rec.subgraph;
    lg.live_[rec.proxy] = 1;
    lg.ctx_[rec.proxy] = lg.ctx_[rec.host];  // host's totals keep generate() transparent
  }

  auto rerouted_via = [&](VertexId host, int32_t sg, ProxyRecord::Direction dir,
                          VertexId target) -> const ProxyRecord* {
    auto it = reroute.find(proxy_key(host, sg, dir));
    if (it == reroute.end()) return nullptr;
    const auto& t = it->second->targets;
    return std::binary_search(t.begin(), t.end(), target) ? it->second : nullptr;
  };

  // Realize the weight-bearing adjacency with rerouting applied. When both
  // endpoints of a cross edge are replicated toward each other, the edge is
  // claimed by the source's into-subgraph proxy; each original edge is
  // realized exactly once.
  for (VertexId u = 0; u < lg.n_real_; ++u) {
    if (!g.is_live(u)) continue;
    int32_t sg_u = lg.subgraph_of_[u];
    for (const auto& e : g.out(u)) {
      VertexId v = e.to;
      int32_t sg_v = lg.subgraph_of_[v];
      if (sg_v != kOutlier && sg_v != sg_u) {
        if (const ProxyRecord* rec =
                rerouted_via(u, sg_v, ProxyRecord::IntoSubgraph, v)) {
          lg.out_[rec->proxy].push_back({v, e.weight, EdgeFamily::Lower});
          continue;
        }
      }
      if (sg_u != kOutlier && sg_u != sg_v) {
        if (const ProxyRecord* rec =
                rerouted_via(v, sg_u, ProxyRecord::OutOfSubgraph, u)) {
          lg.out_[u].push_back({rec->proxy, e.weight, EdgeFamily::Lower});
          continue;
        }
      }
      EdgeFamily fam =
          (sg_u != kOutlier && sg_u == sg_v) ? EdgeFamily::Lower : EdgeFamily::Upper;
      lg.out_[u].push_back({v, e.weight, fam});
    }
  }

  // Identity links: host -> into-proxy, out-of-proxy -> host.
  for (const auto& rec : lg.proxies_) {
    if (!lg.live_[rec.proxy]) continue;
    if (rec.direction == ProxyRecord::IntoSubgraph)
      lg.out_[rec.host].push_back({rec.proxy, 0.0, EdgeFamily::Replication});
    else
      lg.out_[rec.proxy].push_back({rec.host, 0.0, EdgeFamily::Replication});
  }

  // Roles come from the realized adjacency; only subgraph members hold them.
  for (VertexId a = 0; a < n_total; ++a) {
    int32_t sg_a = lg.subgraph_of_[a];
    for (const auto& e : lg.out_[a]) {
      int32_t sg_b = lg.subgraph_of_[e.to];
      if (sg_a == sg_b) continue;
      if (sg_a != kOutlier) lg.role_[a] |= kExit;
      if (sg_b != kOutlier) lg.role_[e.to] |= kEntry;
    }
  }

  // internal -> entry/exit edges feed boundary copies during subgraph-local
  // propagation but belong to no other phase.
  for (VertexId a = 0; a < n_total; ++a) {
    if (lg.subgraph_of_[a] == kOutlier || lg.role_[a] != 0) continue;
    for (auto& e : lg.out_[a])
      if (e.family == EdgeFamily::Lower && lg.role_[e.to] != 0)
        e.family = EdgeFamily::BoundaryOut;
  }

  lg.subs_.resize(lg.part_.subgraphs.size());
  for (const auto& rec : lg.proxies_)
    if (lg.live_[rec.proxy]) lg.subs_[rec.subgraph].verts.push_back(rec.proxy);
  for (size_t sg = 0; sg < lg.subs_.size(); ++sg) {
    auto& sub = lg.subs_[sg];
    const auto& members = lg.part_.subgraphs[sg].members;
    sub.verts.insert(sub.verts.end(), members.begin(), members.end());
    std::sort(sub.verts.begin(), sub.verts.end());
    sub.local_of.reserve(sub.verts.size());
    for (uint32_t i = 0; i < sub.verts.size(); ++i) sub.local_of[sub.verts[i]] = i;
    sub.out_local.resize(sub.verts.size());
    sub.in_local.resize(sub.verts.size());
    for (uint32_t i = 0; i < sub.verts.size(); ++i) {
      VertexId v = sub.verts[i];
      if (lg.role_[v] & kEntry) sub.entries.push_back(v);
      if (lg.role_[v] & kExit) sub.exits.push_back(v);
      for (const auto& e : lg.out_[v]) {
        if (e.family != EdgeFamily::Lower && e.family != EdgeFamily::BoundaryOut) continue;
        uint32_t j = sub.local_of.at(e.to);
        sub.out_local[i].push_back({j, e.w, e.family});
        sub.in_local[j].push_back({i, e.w, e.family});
        ++sub.edge_count;
      }
    }
  }
  return lg;
}

size_t LayeredGraph::upper_vertex_count() const {
  std::vector<uint8_t> touched(n_total(), 0);
  for (VertexId u = 0; u < n_total(); ++u) {
    if (!live_[u]) continue;
    for (const auto& e : out_[u])
      if (e.family == EdgeFamily::Upper || e.family == EdgeFamily::Replication) {
        touched[u] = 1;
        touched[e.to] = 1;
      }
  }
  size_t n = 0;
  for (VertexId v = 0; v < n_total(); ++v)
    if (live_[v] && is_upper(v) && (role_[v] != 0 || touched[v])) ++n;
  return n;
}

size_t LayeredGraph::upper_edge_count() const {
  size_t n = 0;
  for (VertexId v = 0; v < n_total(); ++v) {
    if (!live_[v]) continue;
    for (const auto& e : out_[v])
      n += e.family == EdgeFamily::Upper || e.family == EdgeFamily::Replication;
  }
  return n;
}

RunResult run_rerouted(const LayeredGraph& lg, const AlgorithmSpec& spec,
                       const RunOptions& opt) {
  const size_t n = lg.n_total();
  RunResult r;
  r.states.init(n, spec);
  std::vector<uint8_t> forced(n, 0);
  std::vector<VertexId> initial;
  for (VertexId v = 0; v < lg.n_real(); ++v) {
    if (!lg.is_live(v)) continue;
    double m0 = spec.initial_message(v);
    if (spec.is_bottom(m0)) continue;
    r.states.pending[v] = m0;
    forced[v] = 1;
    initial.push_back(v);
  }
  auto scatter = [&](VertexId v, double m, auto&& deliver, uint64_t& activations) {
    const SenderContext& c = lg.ctx(v);
    bool weighted_ok = !spec.suppressed(m, c);
    for (const auto& e : lg.out(v)) {
      if (spec.absorbs(e.to)) continue;
      if (e.family == EdgeFamily::Replication) {
        ++activations;
        deliver(e.to, m);  // proxies relay the message untouched
        continue;
      }
      if (!weighted_ok) continue;
      ++activations;
      deliver(e.to, spec.generate(m, e.w, c));
    }
  };
  detail::run_worklist(spec, r.states, forced, initial, scatter, r.counter, opt);
  return r;
}

}  // namespace layph
