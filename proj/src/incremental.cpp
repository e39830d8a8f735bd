#include "layph/incremental.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <unordered_set>

#include "layph/layered.hpp"

namespace layph {

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

uint64_t pair_key(VertexId a, VertexId b) {
  return (static_cast<uint64_t>(a) << 32) | b;
}

}  // namespace

Memo build_memo(const Graph& g, const AlgorithmSpec& spec, const std::vector<double>& x) {
  Memo m;
  size_t n = g.vertex_count();
  if (spec.agg_kind() == AggKind::Min) {
    auto ctx = sender_contexts(g);
    m.parent.assign(n, kNoVertex);
    for (VertexId v = 0; v < n; ++v) {
      if (!g.is_live(v) || x[v] == kInf) continue;
      double m0 = spec.initial_message(v);
      if (!spec.is_bottom(m0) && m0 == x[v]) continue;  // witnessed by the vertex's own seed
      VertexId best = kNoVertex;
      double best_val = kInf;
      for (const auto& e : g.in(v)) {
        VertexId u = e.to;
        if (x[u] == kInf) continue;
        double cand = spec.generate(x[u], e.weight, ctx[u]);
        if (cand < best_val) {
          best_val = cand;
          best = u;
        }
      }
      if (best != kNoVertex && best_val == x[v]) m.parent[v] = best;
    }
  } else {
    m.converged.assign(x.begin(), x.begin() + n);
  }
  return m;
}

RevisionSet deduce_revision(const Graph& g_old, const Graph& g_new, const AlgorithmSpec& spec,
                            const NetDiff& diff, const Memo& memo, const std::vector<double>& x) {
  RevisionSet rev;
  std::unordered_map<VertexId, double> seeds;
  auto seed = [&](VertexId v, double m) {
    if (spec.is_bottom(m)) return;  // zero delta / unreachable carries nothing
    if (v >= g_new.vertex_count() || !g_new.is_live(v)) return;
    if (spec.absorbs(v)) return;
    auto [it, fresh] = seeds.emplace(v, m);
    if (!fresh) it->second = spec.aggregate(it->second, m);
  };
  size_t n_old = g_old.vertex_count();
  auto x_of = [&](VertexId u) -> double {
    return (u < n_old && u < x.size()) ? x[u] : spec.initial_state(u);
  };

  if (spec.agg_kind() == AggKind::Min) {
    // A removed or slowed witness edge invalidates the value it supported
    // and, transitively, everything the dependency tree hangs off it.
    std::vector<VertexId> roots;
    auto broken = [&](VertexId u, VertexId v) {
      if (v < memo.parent.size() && memo.parent[v] == u) roots.push_back(v);
    };
    for (const auto& e : diff.deleted) broken(e.u, e.v);
    for (const auto& [e, old_w] : diff.reweighted)
      if (e.w > old_w) broken(e.u, e.v);
    for (VertexId v : diff.vertices_added)
      if (v < n_old) roots.push_back(v);  // revived id: stale state

    std::vector<std::vector<VertexId>> children(n_old);
    for (VertexId v = 0; v < memo.parent.size(); ++v)
      if (memo.parent[v] != kNoVertex) children[memo.parent[v]].push_back(v);
    std::vector<uint8_t> in_reset(std::max(n_old, static_cast<size_t>(g_new.vertex_count())), 0);
    std::vector<VertexId> stack = roots;
    while (!stack.empty()) {
      VertexId z = stack.back();
      stack.pop_back();
      if (z >= in_reset.size() || in_reset[z]) continue;
      in_reset[z] = 1;
      if (z < g_new.vertex_count() && g_new.is_live(z)) rev.resets.push_back(z);
      if (z < children.size())
        for (VertexId c : children[z]) stack.push_back(c);
    }

    auto new_ctx = sender_contexts(g_new);
    for (VertexId z : rev.resets) {
      double m0 = spec.initial_message(z);
      if (!spec.is_bottom(m0)) seed(z, m0);
      for (const auto& e : g_new.in(z)) {
        VertexId i = e.to;
        if (i < in_reset.size() && in_reset[i]) continue;
        double xi = x_of(i);
        if (xi == kInf) continue;
        seed(z, spec.generate(xi, e.weight, new_ctx[i]));
      }
    }
    auto compensate = [&](VertexId u, VertexId v, double w) {
      if (u < in_reset.size() && in_reset[u]) return;  // source itself is being recomputed
      double xu = x_of(u);
      if (xu == kInf) return;
      seed(v, spec.generate(xu, w, new_ctx[u]));
    };
    for (const auto& e : diff.inserted) compensate(e.u, e.v, e.w);
    for (const auto& [e, old_w] : diff.reweighted)
      if (e.w < old_w) compensate(e.u, e.v, e.w);
    for (VertexId v : diff.vertices_added) {
      double m0 = spec.initial_message(v);
      if (!spec.is_bottom(m0)) seed(v, m0);
    }
  } else {
    // Cancel what each changed edge carried under the old graph, compensate
    // what it carries under the new one; a context change rescales even the
    // edges the batch never mentioned.
    auto old_ctx = sender_contexts(g_old);
    auto new_ctx = sender_contexts(g_new);
    auto delta_of = [&](VertexId u) -> double {
      double xu = u < memo.converged.size() ? memo.converged[u] : spec.initial_state(u);
      return xu - spec.initial_state(u);
    };
    auto coeff = [&](VertexId u, double w, const std::vector<SenderContext>& ctx) {
      if (u >= ctx.size()) return 0.0;
      return spec.suppressed(1.0, ctx[u]) ? 0.0 : spec.generate(1.0, w, ctx[u]);
    };
    for (const auto& e : diff.deleted) seed(e.v, -delta_of(e.u) * coeff(e.u, e.w, old_ctx));
    for (const auto& e : diff.inserted) seed(e.v, delta_of(e.u) * coeff(e.u, e.w, new_ctx));
    for (const auto& [e, old_w] : diff.reweighted)
      seed(e.v, delta_of(e.u) * (coeff(e.u, e.w, new_ctx) - coeff(e.u, old_w, old_ctx)));

    std::unordered_set<VertexId> sources;
    std::unordered_set<uint64_t> touched_edges;
    for (const auto& e : diff.deleted) {
      sources.insert(e.u);
      touched_edges.insert(pair_key(e.u, e.v));
    }
    for (const auto& e : diff.inserted) {
      sources.insert(e.u);
      touched_edges.insert(pair_key(e.u, e.v));
    }
    for (const auto& [e, old_w] : diff.reweighted) {
      sources.insert(e.u);
      touched_edges.insert(pair_key(e.u, e.v));
    }
    std::vector<VertexId> by_id(sources.begin(), sources.end());
    std::sort(by_id.begin(), by_id.end());
    for (VertexId u : by_id) {
      if (u >= g_new.vertex_count() || !g_new.is_live(u)) continue;
      if (u >= g_old.vertex_count() || !g_old.is_live(u)) continue;
      const SenderContext &co = old_ctx[u], &cn = new_ctx[u];
      if (co.out_degree == cn.out_degree && co.out_weight_sum == cn.out_weight_sum) continue;
      double d = delta_of(u);
      if (d == 0.0) continue;
      for (const auto& e : g_new.out(u)) {
        if (touched_edges.count(pair_key(u, e.to))) continue;
        seed(e.to, d * (coeff(u, e.weight, new_ctx) - coeff(u, e.weight, old_ctx)));
      }
    }
    for (VertexId v : diff.vertices_added) {
      if (v < n_old) rev.resets.push_back(v);  // revived id: stale state
      double m0 = spec.initial_message(v);
      if (!spec.is_bottom(m0)) seed(v, m0);
    }
  }

  rev.seeds.assign(seeds.begin(), seeds.end());
  std::sort(rev.seeds.begin(), rev.seeds.end());
  std::sort(rev.resets.begin(), rev.resets.end());
  rev.resets.erase(std::unique(rev.resets.begin(), rev.resets.end()), rev.resets.end());
  return rev;
}

LayeredPipeline LayeredPipeline::create(Graph g, const AlgorithmSpec& spec, uint32_t subgraph_cap,
                                        const RefreshPolicy& policy, const RunOptions& opt) {
  uint32_t K = subgraph_cap ? subgraph_cap : default_subgraph_cap(g.live_count());
  PreprocessResult pre = preprocess_partition(g, K, policy.replication_threshold, policy.seed);
  return create_with(std::move(g), spec, std::move(pre.partition), std::move(pre.proxies), policy,
                     opt);
}

LayeredPipeline LayeredPipeline::create_with(Graph g, const AlgorithmSpec& spec, Partition part,
                                             std::vector<ProxyRecord> proxies,
                                             const RefreshPolicy& policy, const RunOptions& opt) {
  LayeredPipeline p{spec, opt, policy, std::move(g), {}, {}, {}, {}, {}, 0};
  p.lg = LayeredGraph::build(p.graph, std::move(part), std::move(proxies));
  compute_shortcuts(p.lg, spec, p.store);
  p.sv.init(p.lg.n_total(), spec);
  p.row_pending.assign(p.lg.n_total(), spec.bottom());
  p.run_from_scratch();
  return p;
}

WorkflowStats LayeredPipeline::run_from_scratch() {
  sv.init(lg.n_total(), spec);
  row_pending.assign(lg.n_total(), spec.bottom());
  RevisionSet rev;
  for (VertexId v = 0; v < lg.n_real(); ++v) {
    if (!graph.is_live(v)) continue;
    double m0 = spec.initial_message(v);
    if (!spec.is_bottom(m0)) rev.seeds.emplace_back(v, m0);
  }
  WorkflowStats ws = run_workflow(rev);
  memo = build_memo(graph, spec, sv.x);
  return ws;
}

std::vector<double> LayeredPipeline::real_states() const {
  std::vector<double> out(lg.n_real());
  for (VertexId v = 0; v < lg.n_real(); ++v)
    out[v] = graph.is_live(v) ? sv.x[v] : spec.initial_state(v);
  return out;
}

WorkflowStats LayeredPipeline::apply_batch(const UpdateBatch& batch) {
  auto t0 = clock_type::now();
  Graph g_new = graph.apply(batch);
  NetDiff diff = net_diff(graph, g_new, batch);

  // Proxy ids live above the real id range with headroom; if inserts ate the
  // headroom a full rediscovery reassigns them.
  bool force_rebuild = false;
  for (const auto& rec : lg.proxies())
    if (g_new.vertex_count() >= rec.proxy) force_rebuild = true;
  RefreshPolicy pol = policy;
  if (force_rebuild) pol.rebuild_threshold = 0;
  RefreshOutcome ro =
      refresh_partition(g_new, lg.partition(), lg.proxies(), diff, pol, accumulated_updates);

  // For accumulating aggregations a structural change inside a subgraph means
  // every entry table re-converges at full propagation cost. When that costs
  // more than routing the block through the upper layer directly, dissolve it
  // now and let the next rebuild re-discover the region.
  if (!ro.rebuilt && spec.agg_kind() == AggKind::Sum) {
    std::unordered_set<int32_t> dirty;
    auto mark_source = [&](VertexId u) {
      if (u < ro.partition.subgraph_of.size()) {
        int32_t sg = ro.partition.subgraph_of[u];
        if (sg != kOutlier) dirty.insert(sg);
      }
    };
    for (const auto& e : diff.inserted) mark_source(e.u);
    for (const auto& e : diff.deleted) mark_source(e.u);
    for (const auto& [e, ow] : diff.reweighted) mark_source(e.u);
    for (VertexId v : diff.vertices_removed) {
      // the patch already evicted the dead member; dirty its old block
      int32_t sg = v < lg.partition().subgraph_of.size() ? lg.partition().subgraph_of[v] : kOutlier;
      if (sg != kOutlier && !ro.partition.subgraphs[sg].members.empty()) dirty.insert(sg);
    }
    std::vector<int32_t> costly;
    for (int32_t sg : dirty) {
      if (std::binary_search(ro.dissolved.begin(), ro.dissolved.end(), sg)) continue;
      uint64_t tables = store.subgraph_tables(sg).size();
      uint64_t edges = internal_edge_count(g_new, ro.partition, sg);
      if ((tables + 1) * edges > policy.revision_budget) costly.push_back(sg);
    }
    if (!costly.empty()) {
      std::sort(costly.begin(), costly.end());
      for (int32_t sg : costly) {
        accumulated_updates += internal_edge_count(g_new, ro.partition, sg);
        for (VertexId v : ro.partition.subgraphs[sg].members)
          ro.partition.subgraph_of[v] = kOutlier;
        ro.partition.subgraphs[sg].members.clear();
      }
      std::vector<ProxyRecord> kept;
      kept.reserve(ro.proxies.size());
      for (auto& rec : ro.proxies)
        if (!std::binary_search(costly.begin(), costly.end(), rec.subgraph))
          kept.push_back(std::move(rec));
      ro.proxies = std::move(kept);
      ro.dissolved.insert(ro.dissolved.end(), costly.begin(), costly.end());
      std::sort(ro.dissolved.begin(), ro.dissolved.end());
    }
  }

  LayeredGraph new_lg = LayeredGraph::build(g_new, std::move(ro.partition), std::move(ro.proxies));

  // Dropped proxies first hand their held messages to their one-hop targets
  // so no in-flight mass is lost with them.
  std::unordered_set<VertexId> new_proxy_ids;
  for (const auto& rec : new_lg.proxies()) new_proxy_ids.insert(rec.proxy);
  std::vector<VertexId> flush_targets;
  for (const auto& rec : lg.proxies()) {
    VertexId pid = rec.proxy;
    if (!ro.rebuilt && new_proxy_ids.count(pid)) continue;
    double m = spec.aggregate(sv.pending[pid], row_pending[pid]);
    sv.pending[pid] = spec.bottom();
    row_pending[pid] = spec.bottom();
    if (spec.is_bottom(m)) continue;
    const SenderContext& c = lg.ctx(pid);
    for (const auto& e : lg.out(pid)) {
      if (spec.absorbs(e.to)) continue;
      double msg;
      if (e.family == EdgeFamily::Replication) {
        msg = m;
      } else {
        if (spec.suppressed(m, c)) continue;
        msg = spec.generate(m, e.w, c);
      }
      if (spec.is_bottom(msg)) continue;
      sv.pending[e.to] = spec.aggregate(sv.pending[e.to], msg);
      flush_targets.push_back(e.to);
    }
  }

  // Carry states onto the new id space: real ids are stable, surviving proxy
  // ids are stable between rediscoveries, everything else starts fresh.
  {
    StateVector nsv;
    nsv.init(new_lg.n_total(), spec);
    std::vector<double> nrow(new_lg.n_total(), spec.bottom());
    size_t real_copy = std::min<size_t>(graph.vertex_count(), new_lg.n_total());
    for (VertexId v = 0; v < real_copy; ++v) {
      nsv.x[v] = sv.x[v];
      nsv.pending[v] = sv.pending[v];
      nrow[v] = row_pending[v];
    }
    if (!ro.rebuilt) {
      for (const auto& rec : new_lg.proxies()) {
        VertexId pid = rec.proxy;
        if (pid < sv.x.size()) {
          nsv.x[pid] = sv.x[pid];
          nsv.pending[pid] = sv.pending[pid];
          nrow[pid] = row_pending[pid];
        }
      }
    }
    sv = std::move(nsv);
    row_pending = std::move(nrow);
  }

  WorkflowStats ws;
  ws.rebuilt = ro.rebuilt;
  ws.shortcut_update = update_shortcuts(lg, new_lg, spec, ro.dissolved, ro.rebuilt, store);
  ws.layer_update.edge_activations = ws.shortcut_update.activations;

  RevisionSet rev = deduce_revision(graph, g_new, spec, diff, memo, sv.x);

  graph = std::move(g_new);
  lg = std::move(new_lg);
  ws.layer_update.ms = ms_since(t0);

  WorkflowStats run = run_workflow(rev, flush_targets);
  run.layer_update = ws.layer_update;
  run.shortcut_update = ws.shortcut_update;
  run.rebuilt = ws.rebuilt;
  memo = build_memo(graph, spec, sv.x);
  return run;
}

WorkflowStats LayeredPipeline::run_workflow(const RevisionSet& rev,
                                            const std::vector<VertexId>& extra_forced) {
  WorkflowStats ws;
  const bool minimizing = spec.agg_kind() == AggKind::Min;
  const double bottom = spec.bottom();
  const double threshold = run_opt.resolved_threshold(spec);
  const size_t n = lg.n_total();
  sv.grow(n, spec);
  row_pending.resize(n, bottom);
  std::vector<uint8_t> forced(n, 0);

  // ---- route marks and seeds ----
  std::vector<VertexId> upload_marks, upper_marks;
  std::vector<uint8_t> reset_mark(n, 0);
  for (VertexId z : rev.resets) {
    sv.pending[z] = bottom;  // a reset vertex restarts; stale arrivals die with it
    row_pending[z] = bottom;
    reset_mark[z] = 1;
    if (lg.subgraph_of(z) == kOutlier || lg.is_entry(z))
      upper_marks.push_back(z);
    else
      upload_marks.push_back(z);
  }
  std::vector<int32_t> touched;
  for (const auto& [v, m] : rev.seeds) {
    if (v >= n) continue;
    sv.pending[v] = spec.aggregate(sv.pending[v], m);
    forced[v] = 1;
    int32_t sg = lg.subgraph_of(v);
    if (sg != kOutlier && !lg.is_entry(v)) touched.push_back(sg);
  }
  for (VertexId v : extra_forced) {
    if (v >= n || spec.is_bottom(sv.pending[v])) continue;
    forced[v] = 1;
    int32_t sg = lg.subgraph_of(v);
    if (sg != kOutlier && !lg.is_entry(v)) touched.push_back(sg);
  }
  for (VertexId z : upload_marks) touched.push_back(lg.subgraph_of(z));
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  ws.touched_subgraphs = touched;

  std::vector<std::pair<VertexId, double>> emit_seeds;  // deferred exit emissions

  // ---- upload: subgraph-local propagation, entries hold ----
  {
    auto t0 = clock_type::now();
    for (VertexId z : upload_marks) sv.x[z] = spec.initial_state(z);
    for (int32_t sg : touched) {
      const auto& sub = lg.sub(sg);
      size_t ln = sub.verts.size();
      StateVector lsv;
      lsv.x.resize(ln);
      lsv.pending.resize(ln);
      std::vector<uint8_t> lforced(ln, 0), is_entry_l(ln, 0), is_exit_only_l(ln, 0);
      std::vector<double> entry_caught(ln, bottom), emit_caught(ln, bottom);
      std::vector<VertexId> linit;
      for (uint32_t i = 0; i < ln; ++i) {
        VertexId v = sub.verts[i];
        lsv.x[i] = sv.x[v];
        if (lg.is_entry(v)) {
          is_entry_l[i] = 1;
          lsv.pending[i] = bottom;  // entry arrivals are held, never consumed here
          continue;
        }
        is_exit_only_l[i] = lg.is_exit(v);
        lsv.pending[i] = sv.pending[v];
        sv.pending[v] = bottom;
        lforced[i] = forced[v];
        forced[v] = 0;
        if (!spec.is_bottom(lsv.pending[i])) linit.push_back(i);
      }
      auto scatter = [&](VertexId i, double m, auto&& deliver, uint64_t& act) {
        if (is_exit_only_l[i])  // outward crossing deferred to the upper layer
          emit_caught[i] = spec.aggregate(emit_caught[i], m);
        const SenderContext& c = lg.ctx(sub.verts[i]);
        if (spec.suppressed(m, c)) return;
        for (const auto& e : sub.out_local[i]) {
          VertexId tg = sub.verts[e.to];
          if (spec.absorbs(tg)) continue;
          double msg = spec.generate(m, e.w, c);
          ++act;
          if (is_entry_l[e.to])
            entry_caught[e.to] = spec.aggregate(entry_caught[e.to], msg);
          else
            deliver(e.to, msg);
        }
      };
      ActivationCounter pc;
      detail::run_worklist(spec, lsv, lforced, linit, scatter, pc, run_opt);
      for (uint32_t i = 0; i < ln; ++i) {
        VertexId v = sub.verts[i];
        if (is_entry_l[i]) {
          if (!spec.is_bottom(entry_caught[i])) {
            sv.pending[v] = spec.aggregate(sv.pending[v], entry_caught[i]);
            forced[v] = 1;  // held messages re-emit during iteration regardless of state
          }
          continue;
        }
        sv.x[v] = lsv.x[i];
        sv.pending[v] = lsv.pending[i];  // sub-threshold residuals stay parked
        if (!spec.is_bottom(emit_caught[i])) emit_seeds.emplace_back(v, emit_caught[i]);
      }
      ws.upload_by_subgraph.emplace_back(sg, pc.edge_activations);
      ws.upload.edge_activations += pc.edge_activations;
      ws.upload.vertex_updates += pc.vertex_updates;
    }
    ws.upload.ms = ms_since(t0);
  }

  // ---- upper iteration: upper/replication edges plus shortcut rows ----
  {
    auto t0 = clock_type::now();
    for (VertexId z : upper_marks) sv.x[z] = spec.initial_state(z);

    std::deque<VertexId> q;
    std::vector<uint8_t> queued(n, 0);
    auto enqueue = [&](VertexId v) {
      if (!queued[v]) {
        queued[v] = 1;
        q.push_back(v);
      }
    };
    auto deliver_ext = [&](VertexId to, double msg) {
      if (spec.is_bottom(msg)) return;
      double np = spec.aggregate(sv.pending[to], msg);
      if (minimizing && np == sv.pending[to]) return;  // dominated
      sv.pending[to] = np;
      enqueue(to);
    };
    auto deliver_row = [&](VertexId to, double msg) {
      if (spec.is_bottom(msg)) return;
      double np = spec.aggregate(row_pending[to], msg);
      if (minimizing && np == row_pending[to]) return;
      row_pending[to] = np;
      enqueue(to);
    };
    auto emit_from = [&](VertexId v, double m) {
      const SenderContext& c = lg.ctx(v);
      bool weighted_ok = !spec.suppressed(m, c);
      for (const auto& e : lg.out(v)) {
        if (e.family == EdgeFamily::Replication) {
          if (spec.absorbs(e.to)) continue;
          ++ws.upper_family_activations[static_cast<int>(e.family)];
          deliver_ext(e.to, m);
        } else if (e.family == EdgeFamily::Upper) {
          if (!weighted_ok || spec.absorbs(e.to)) continue;
          ++ws.upper_family_activations[static_cast<int>(e.family)];
          deliver_ext(e.to, spec.generate(m, e.w, c));
        }
        // Lower and BoundaryOut edges belong to upload; the counters for
        // those slots staying zero is asserted by the containment tests.
      }
    };
    for (const auto& [z, m] : emit_seeds) emit_from(z, m);
    for (VertexId v = 0; v < n; ++v) {
      if (!lg.is_live(v) || !lg.is_upper(v)) continue;
      if (!spec.is_bottom(sv.pending[v]) || !spec.is_bottom(row_pending[v])) enqueue(v);
    }

    std::unordered_map<VertexId, double> cache;  // raw external arrivals per entry
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop_front();
      queued[v] = 0;
      double m_ext = sv.pending[v];
      double m_row = row_pending[v];
      bool force = forced[v];
      forced[v] = 0;
      if (spec.is_bottom(m_ext) && spec.is_bottom(m_row)) continue;
      sv.pending[v] = bottom;
      row_pending[v] = bottom;

      int32_t sg = lg.subgraph_of(v);
      bool entry = lg.is_entry(v);
      const EntryTable* tab = nullptr;
      double self_acc = spec.ge_identity();
      if (entry) {
        tab = store.find(sg, v);
        if (tab)
          self_acc = tab->acc[lg.sub(sg).local(v)];
        else
          log(LogLevel::Warn, "entry %u of subgraph %d has no shortcut table", v, sg);
      }
      double eff;
      if (spec.is_bottom(m_ext))
        eff = m_row;
      else if (spec.is_bottom(m_row))
        eff = spec.compose(m_ext, self_acc);
      else
        eff = spec.aggregate(spec.compose(m_ext, self_acc), m_row);

      bool improved = false;
      if (minimizing) {
        double cand = std::min(sv.x[v], eff);
        if (cand != sv.x[v]) {
          sv.x[v] = cand;
          improved = true;
          ++ws.upper_iter.vertex_updates;
        } else if (!force) {
          continue;  // dominated
        }
      } else {
        if (!force && std::abs(eff) < threshold) {
          sv.pending[v] = m_ext;  // retained for a later run
          row_pending[v] = m_row;
          continue;
        }
        sv.x[v] += eff;
        ++ws.upper_iter.vertex_updates;
      }

      // a min-mode arrival that neither improved the entry nor rebuilt a reset
      // one is dominated along every row, so charging it would only spend
      // compositions on values that cannot win
      bool charge = entry && !spec.is_bottom(m_ext) &&
                    (!minimizing || improved || reset_mark[v]);
      if (charge) {
        auto [it, fresh] = cache.emplace(v, m_ext);
        if (!fresh) it->second = spec.aggregate(it->second, m_ext);
        if (tab) {
          const auto& sub = lg.sub(sg);
          for (VertexId z : sub.exits) {
            if (z == v || spec.absorbs(z)) continue;
            double a = tab->acc[sub.local(z)];
            if (spec.is_bottom(a)) continue;
            ++ws.row_activations;
            deliver_row(z, spec.compose(m_ext, a));
          }
        }
      }
      emit_from(v, eff);
      uint64_t spent = ws.row_activations + ws.upper_family_activations[0] +
                       ws.upper_family_activations[1] + ws.upper_family_activations[2] +
                       ws.upper_family_activations[3];
      if (spent > run_opt.activation_cap)
        throw Error("activation cap exceeded during upper iteration");
    }
    ws.upper_iter.edge_activations =
        ws.row_activations + ws.upper_family_activations[0] + ws.upper_family_activations[1] +
        ws.upper_family_activations[2] + ws.upper_family_activations[3];
    ws.upper_iter.ms = ms_since(t0);

    // ---- assignment: one hop from every charged entry to its subgraph ----
    auto t1 = clock_type::now();
    std::vector<std::pair<VertexId, double>> charged(cache.begin(), cache.end());
    std::sort(charged.begin(), charged.end());
    for (const auto& [u, cm] : charged) {
      int32_t sg = lg.subgraph_of(u);
      const EntryTable* tab = store.find(sg, u);
      if (!tab) continue;
      const auto& sub = lg.sub(sg);
      for (uint32_t j = 0; j < sub.verts.size(); ++j) {
        VertexId t = sub.verts[j];
        if (t == u || lg.is_exit(t) || spec.absorbs(t)) continue;
        double a = tab->acc[j];
        if (spec.is_bottom(a)) continue;
        double val = spec.compose(cm, a);
        ++ws.assign_applications;
        if (minimizing) {
          if (val < sv.x[t]) {
            sv.x[t] = val;
            ++ws.assign.vertex_updates;
          }
        } else {
          sv.x[t] += val;
          ++ws.assign.vertex_updates;
        }
      }
    }
    ws.assign.edge_activations = ws.assign_applications;
    ws.assign.ms = ms_since(t1);
  }
  return ws;
}

PlainPipeline PlainPipeline::create(Graph g, const AlgorithmSpec& spec, const RunOptions& opt) {
  PlainPipeline p{spec, opt, std::move(g), {}, {}};
  p.sv.init(p.graph.vertex_count(), spec);
  std::vector<VertexId> seeds;
  for (VertexId v = 0; v < p.graph.vertex_count(); ++v) {
    if (!p.graph.is_live(v)) continue;
    double m0 = p.spec.initial_message(v);
    if (p.spec.is_bottom(m0)) continue;
    p.sv.pending[v] = p.spec.aggregate(p.sv.pending[v], m0);
    seeds.push_back(v);
  }
  run_fixpoint(p.graph, p.spec, p.sv, seeds, p.run_opt);
  p.memo = build_memo(p.graph, p.spec, p.sv.x);
  return p;
}

ActivationCounter PlainPipeline::apply_batch(const UpdateBatch& batch) {
  Graph g_new = graph.apply(batch);
  NetDiff diff = net_diff(graph, g_new, batch);
  RevisionSet rev = deduce_revision(graph, g_new, spec, diff, memo, sv.x);
  graph = std::move(g_new);
  sv.grow(graph.vertex_count(), spec);
  for (VertexId z : rev.resets) {
    sv.x[z] = spec.initial_state(z);
    sv.pending[z] = spec.bottom();
  }
  std::vector<VertexId> seeds;
  seeds.reserve(rev.seeds.size());
  for (const auto& [v, m] : rev.seeds) {
    sv.pending[v] = spec.aggregate(sv.pending[v], m);
    seeds.push_back(v);
  }
  ActivationCounter counter = run_fixpoint(graph, spec, sv, seeds, run_opt);
  memo = build_memo(graph, spec, sv.x);
  return counter;
}

std::vector<double> PlainPipeline::real_states() const {
  std::vector<double> out(graph.vertex_count());
  for (VertexId v = 0; v < graph.vertex_count(); ++v)
    out[v] = graph.is_live(v) ? sv.x[v] : spec.initial_state(v);
  return out;
}

}  // namespace layph
