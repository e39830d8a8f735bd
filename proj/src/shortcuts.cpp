#include "layph/shortcuts.hpp"

#include <algorithm>
#include <tuple>

namespace layph {

namespace {

using LocalSubgraph = LayeredGraph::LocalSubgraph;

// Subgraph-local scatter: generate() over out_local, absorbing targets
// skipped, sender context taken from the owning vertex.
struct local_scatter {
  const LayeredGraph& lg;
  const AlgorithmSpec& spec;
  const LocalSubgraph& sub;

  template <class Deliver>
  void operator()(VertexId i, double m, Deliver&& deliver, uint64_t& activations) const {
    const SenderContext& c = lg.ctx(sub.verts[i]);
    if (spec.suppressed(m, c)) return;
    for (const auto& e : sub.out_local[i]) {
      if (spec.absorbs(sub.verts[e.to])) continue;
      ++activations;
      deliver(e.to, spec.generate(m, e.w, c));
    }
  }
};

uint64_t local_fixpoint(const LayeredGraph& lg, const AlgorithmSpec& spec,
                        const LocalSubgraph& sub, StateVector& sv, std::vector<uint8_t>& forced,
                        const std::vector<VertexId>& initial) {
  RunOptions opt;
  opt.emit_threshold = kUnitThreshold;
  ActivationCounter counter;
  detail::run_worklist(spec, sv, forced, initial, local_scatter{lg, spec, sub}, counter, opt);
  return counter.edge_activations;
}

// acc[j] for min specs is witnessed by exactly one in-edge; record it so
// later maintenance can reset exactly the dependent subtree.
void recompute_parents(const LayeredGraph& lg, const AlgorithmSpec& spec, const LocalSubgraph& sub,
                       uint32_t entry_local, EntryTable& t) {
  size_t n = sub.verts.size();
  t.parent.assign(n, kLocalNone);
  for (uint32_t j = 0; j < n; ++j) {
    if (j == entry_local || t.acc[j] == kInf) continue;
    uint32_t best = kLocalNone;
    double best_val = kInf;
    for (const auto& e : sub.in_local[j]) {
      uint32_t i = e.to;
      if (t.acc[i] == kInf) continue;
      double cand = spec.generate(t.acc[i], e.w, lg.ctx(sub.verts[i]));
      if (cand < best_val) {
        best_val = cand;
        best = i;
      }
    }
    t.parent[j] = best;
  }
}

double coeff(const AlgorithmSpec& spec, double w, const SenderContext& c) {
  return spec.suppressed(1.0, c) ? 0.0 : spec.generate(1.0, w, c);
}

uint64_t edge_key(VertexId a, VertexId b) {
  return (static_cast<uint64_t>(a) << 32) | b;
}

struct LocalEdgeDiff {
  std::vector<std::tuple<VertexId, VertexId, double>> removed, added;
  std::vector<std::tuple<VertexId, VertexId, double, double>> reweighted;  // old_w, new_w

  bool empty() const { return removed.empty() && added.empty() && reweighted.empty(); }
};

std::unordered_map<uint64_t, double> local_edges(const LocalSubgraph& sub) {
  std::unordered_map<uint64_t, double> m;
  m.reserve(sub.edge_count);
  for (uint32_t i = 0; i < sub.verts.size(); ++i)
    for (const auto& e : sub.out_local[i]) m[edge_key(sub.verts[i], sub.verts[e.to])] = e.w;
  return m;
}

LocalEdgeDiff diff_local_edges(const std::unordered_map<uint64_t, double>& old_e,
                               const std::unordered_map<uint64_t, double>& new_e) {
  LocalEdgeDiff d;
  for (const auto& [k, w] : old_e) {
    auto it = new_e.find(k);
    VertexId a = static_cast<VertexId>(k >> 32), b = static_cast<VertexId>(k);
    if (it == new_e.end())
      d.removed.emplace_back(a, b, w);
    else if (it->second != w)
      d.reweighted.emplace_back(a, b, w, it->second);
  }
  for (const auto& [k, w] : new_e)
    if (!old_e.count(k))
      d.added.emplace_back(static_cast<VertexId>(k >> 32), static_cast<VertexId>(k), w);
  auto by_pair = [](const auto& x, const auto& y) {
    return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y));
  };
  std::sort(d.removed.begin(), d.removed.end(), by_pair);
  std::sort(d.added.begin(), d.added.end(), by_pair);
  std::sort(d.reweighted.begin(), d.reweighted.end(), by_pair);
  return d;
}

// Old table's acc carried onto the new local index space; vanished vertices
// drop their cells.
std::vector<double> remap_acc(const EntryTable& old_t, const LocalSubgraph& osub,
                              const LocalSubgraph& nsub, double fill) {
  std::vector<double> acc(nsub.verts.size(), fill);
  for (uint32_t i = 0; i < osub.verts.size(); ++i) {
    VertexId v = osub.verts[i];
    auto it = nsub.local_of.find(v);
    if (it != nsub.local_of.end()) acc[it->second] = old_t.acc[i];
  }
  return acc;
}

// Dependency-tree maintenance for min specs: reset every vertex whose
// witness chain lost an edge (removed, increased, or parent vertex gone),
// reseed the reset zone from intact in-neighbors plus improvement edges,
// and rerun to fixpoint.
EntryTable revise_min(const LayeredGraph& old_lg, const LayeredGraph& new_lg,
                      const AlgorithmSpec& spec, const LocalSubgraph& osub,
                      const LocalSubgraph& nsub, const LocalEdgeDiff& diff,
                      const EntryTable& old_t, VertexId entry, uint64_t* activations) {
  (void)old_lg;
  size_t n = nsub.verts.size();
  EntryTable t;
  t.acc = remap_acc(old_t, osub, nsub, kInf);
  uint32_t entry_local = nsub.local(entry);

  std::vector<uint32_t> parent(n, kLocalNone);
  std::vector<uint8_t> in_reset(n, 0);
  std::vector<uint32_t> roots;
  for (uint32_t i = 0; i < osub.verts.size(); ++i) {
    uint32_t p = old_t.parent.empty() ? kLocalNone : old_t.parent[i];
    auto it = nsub.local_of.find(osub.verts[i]);
    if (it == nsub.local_of.end()) continue;
    if (p == kLocalNone) continue;
    auto pit = nsub.local_of.find(osub.verts[p]);
    if (pit == nsub.local_of.end()) {
      roots.push_back(it->second);  // witness vertex died
    } else {
      parent[it->second] = pit->second;
    }
  }
  auto tree_edge_broken = [&](VertexId a, VertexId b) {
    auto ait = nsub.local_of.find(a);
    auto bit = nsub.local_of.find(b);
    if (bit == nsub.local_of.end()) return;  // target gone, cell dropped
    if (ait != nsub.local_of.end() && parent[bit->second] == ait->second)
      roots.push_back(bit->second);
  };
  for (const auto& [a, b, w] : diff.removed) tree_edge_broken(a, b);
  for (const auto& [a, b, ow, nw] : diff.reweighted)
    if (nw > ow) tree_edge_broken(a, b);

  std::vector<uint32_t> children_head(n, kLocalNone), children_next(n, kLocalNone);
  for (uint32_t j = 0; j < n; ++j) {
    uint32_t p = parent[j];
    if (p == kLocalNone) continue;
    children_next[j] = children_head[p];
    children_head[p] = j;
  }
  std::vector<uint32_t> stack = roots;
  while (!stack.empty()) {
    uint32_t z = stack.back();
    stack.pop_back();
    if (in_reset[z]) continue;
    in_reset[z] = 1;
    t.acc[z] = kInf;
    for (uint32_t c = children_head[z]; c != kLocalNone; c = children_next[c])
      stack.push_back(c);
  }

  StateVector sv;
  sv.x = std::move(t.acc);
  sv.pending.assign(n, kInf);
  std::vector<uint8_t> forced(n, 0);
  std::vector<VertexId> initial;
  auto seed = [&](uint32_t j, double m) {
    if (m >= sv.pending[j]) return;
    if (sv.pending[j] == kInf) initial.push_back(j);
    sv.pending[j] = m;
  };
  for (uint32_t z = 0; z < n; ++z) {
    if (!in_reset[z]) continue;
    for (const auto& e : nsub.in_local[z]) {
      if (in_reset[e.to] || sv.x[e.to] == kInf) continue;
      seed(z, spec.generate(sv.x[e.to], e.w, new_lg.ctx(nsub.verts[e.to])));
    }
  }
  auto improvement = [&](VertexId a, VertexId b, double w) {
    auto ait = nsub.local_of.find(a);
    auto bit = nsub.local_of.find(b);
    if (ait == nsub.local_of.end() || bit == nsub.local_of.end()) return;
    if (in_reset[ait->second] || sv.x[ait->second] == kInf) return;
    if (spec.absorbs(b)) return;
    seed(bit->second, spec.generate(sv.x[ait->second], w, new_lg.ctx(a)));
  };
  for (const auto& [a, b, w] : diff.added) improvement(a, b, w);
  for (const auto& [a, b, ow, nw] : diff.reweighted)
    if (nw < ow) improvement(a, b, nw);

  uint64_t act = local_fixpoint(new_lg, spec, nsub, sv, forced, initial);
  if (activations) *activations += act;
  t.acc = std::move(sv.x);
  recompute_parents(new_lg, spec, nsub, entry_local, t);
  return t;
}

// Cancel/compensate maintenance for sum specs: every edge whose generate
// coefficient changed injects old_mass * (f_new - f_old) at its target, and
// the deltas run to fixpoint over the new adjacency.
EntryTable revise_sum(const LayeredGraph& old_lg, const LayeredGraph& new_lg,
                      const AlgorithmSpec& spec, const LocalSubgraph& osub,
                      const LocalSubgraph& nsub, const LocalEdgeDiff& diff,
                      const std::unordered_map<uint64_t, double>& old_edges,
                      const std::vector<VertexId>& ctx_changed, const EntryTable& old_t,
                      uint64_t* activations) {
  size_t n = nsub.verts.size();
  auto old_acc_of = [&](VertexId v) -> double {
    auto it = osub.local_of.find(v);
    return it == osub.local_of.end() ? 0.0 : old_t.acc[it->second];
  };

  StateVector sv;
  sv.x = remap_acc(old_t, osub, nsub, 0.0);
  sv.pending.assign(n, 0.0);
  std::vector<uint8_t> forced(n, 0);
  std::vector<VertexId> initial;
  auto seed = [&](VertexId b, double delta) {
    if (delta == 0.0) return;
    if (spec.absorbs(b)) return;
    auto it = nsub.local_of.find(b);
    if (it == nsub.local_of.end()) return;
    uint32_t j = it->second;
    if (!forced[j]) {
      forced[j] = 1;
      initial.push_back(j);
    }
    sv.pending[j] += delta;
  };
  for (const auto& [a, b, w] : diff.removed)
    seed(b, -old_acc_of(a) * coeff(spec, w, old_lg.ctx(a)));
  for (const auto& [a, b, w] : diff.added)
    seed(b, old_acc_of(a) * coeff(spec, w, new_lg.ctx(a)));
  for (const auto& [a, b, ow, nw] : diff.reweighted)
    seed(b, old_acc_of(a) * (coeff(spec, nw, new_lg.ctx(a)) - coeff(spec, ow, old_lg.ctx(a))));
  for (VertexId a : ctx_changed) {
    auto it = nsub.local_of.find(a);
    if (it == nsub.local_of.end()) continue;
    double mass = old_acc_of(a);
    if (mass == 0.0) continue;
    for (const auto& e : nsub.out_local[it->second]) {
      VertexId b = nsub.verts[e.to];
      auto oit = old_edges.find(edge_key(a, b));
      if (oit == old_edges.end() || oit->second != e.w) continue;  // in diff already
      seed(b, mass * (coeff(spec, e.w, new_lg.ctx(a)) - coeff(spec, e.w, old_lg.ctx(a))));
    }
  }

  uint64_t act = local_fixpoint(new_lg, spec, nsub, sv, forced, initial);
  if (activations) *activations += act;
  EntryTable t;
  t.acc = std::move(sv.x);
  return t;
}

}  // namespace

size_t ShortcutStore::row_count(double bottom) const {
  size_t n = 0;
  for (const auto& per_sg : tables_)
    for (const auto& [entry, t] : per_sg) n += t.row_count(bottom);
  return n;
}

size_t ShortcutStore::entry_count() const {
  size_t n = 0;
  for (const auto& per_sg : tables_) n += per_sg.size();
  return n;
}

EntryTable compute_entry_table(const LayeredGraph& lg, const AlgorithmSpec& spec, int32_t sg,
                               VertexId entry, uint64_t* activations) {
  const auto& sub = lg.sub(sg);
  size_t n = sub.verts.size();
  bool minimizing = spec.agg_kind() == AggKind::Min;
  StateVector sv;
  sv.x.assign(n, minimizing ? kInf : 0.0);
  sv.pending.assign(n, spec.bottom());
  uint32_t e_local = sub.local(entry);
  sv.pending[e_local] = spec.ge_identity();
  std::vector<uint8_t> forced(n, 0);
  forced[e_local] = 1;
  uint64_t act = local_fixpoint(lg, spec, sub, sv, forced, {e_local});
  if (activations) *activations += act;
  EntryTable t;
  t.acc = std::move(sv.x);
  if (minimizing) recompute_parents(lg, spec, sub, e_local, t);
  return t;
}

void compute_subgraph_shortcuts(const LayeredGraph& lg, const AlgorithmSpec& spec, int32_t sg,
                                ShortcutStore& store, uint64_t* activations) {
  store.drop_subgraph(sg);
  for (VertexId e : lg.sub(sg).entries)
    store.table(sg, e) = compute_entry_table(lg, spec, sg, e, activations);
}

void compute_shortcuts(const LayeredGraph& lg, const AlgorithmSpec& spec, ShortcutStore& store,
                       uint64_t* activations) {
  store.reset(lg.subgraph_count());
  for (int32_t sg = 0; sg < static_cast<int32_t>(lg.subgraph_count()); ++sg)
    compute_subgraph_shortcuts(lg, spec, sg, store, activations);
}

double verify_shortcut_equivalence(const LayeredGraph& lg, const AlgorithmSpec& spec,
                                   const ShortcutStore& store, int32_t sg, uint64_t seed,
                                   int trials) {
  const auto& sub = lg.sub(sg);
  if (sub.entries.empty()) return 0.0;
  size_t n = sub.verts.size();
  bool minimizing = spec.agg_kind() == AggKind::Min;
  // integer-valued messages keep min-mode composition exactly associative,
  // so table-vs-fixpoint agreement can be demanded bit for bit
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> real_dist(0.01, 1.0);
  std::uniform_int_distribution<int> int_dist(0, 10);
  auto draw = [&]() { return minimizing ? double(int_dist(rng)) : real_dist(rng); };

  std::vector<const EntryTable*> tables;
  for (VertexId e : sub.entries) {
    const EntryTable* t = store.find(sg, e);
    if (!t || t->acc.size() != n) return kInf;  // table missing or stale
    tables.push_back(t);
  }

  double worst = 0.0;
  std::vector<double> msg(sub.entries.size());
  for (int trial = 0; trial < trials; ++trial) {
    for (double& m : msg) m = draw();

    StateVector sv;
    sv.x.assign(n, minimizing ? kInf : 0.0);
    sv.pending.assign(n, spec.bottom());
    std::vector<uint8_t> forced(n, 0);
    std::vector<VertexId> initial;
    for (size_t k = 0; k < sub.entries.size(); ++k) {
      uint32_t l = sub.local(sub.entries[k]);
      sv.pending[l] = spec.aggregate(sv.pending[l], msg[k]);
      if (!forced[l]) {
        forced[l] = 1;
        initial.push_back(l);
      }
    }
    local_fixpoint(lg, spec, sub, sv, forced, initial);

    for (uint32_t j = 0; j < n; ++j) {
      double pred = spec.bottom();
      for (size_t k = 0; k < sub.entries.size(); ++k) {
        double a = tables[k]->acc[j];
        if (spec.is_bottom(a)) continue;
        pred = spec.aggregate(pred, spec.compose(msg[k], a));
      }
      double got = minimizing ? sv.x[j] : sv.x[j] + (spec.is_bottom(sv.pending[j]) ? 0.0 : sv.pending[j]);
      if (pred == got) continue;
      if (pred == kInf || got == kInf) return kInf;
      worst = std::max(worst, std::abs(pred - got));
    }
  }
  return worst;
}

ShortcutUpdateStats update_shortcuts(const LayeredGraph& old_lg, const LayeredGraph& new_lg,
                                     const AlgorithmSpec& spec,
                                     const std::vector<int32_t>& dissolved, bool rebuilt,
                                     ShortcutStore& store) {
  ShortcutUpdateStats st;
  bool minimizing = spec.agg_kind() == AggKind::Min;

  if (rebuilt || store.subgraph_count() != new_lg.subgraph_count()) {
    st.dropped_entries = store.entry_count();
    compute_shortcuts(new_lg, spec, store, &st.activations);
    st.fresh_entries = store.entry_count();
    return st;
  }

  std::vector<uint8_t> gone(new_lg.subgraph_count(), 0);
  for (int32_t sg : dissolved) {
    st.dropped_entries += store.subgraph_tables(sg).size();
    store.drop_subgraph(sg);
    if (static_cast<size_t>(sg) < gone.size()) gone[sg] = 1;
  }

  for (int32_t sg = 0; sg < static_cast<int32_t>(new_lg.subgraph_count()); ++sg) {
    const auto& nsub = new_lg.sub(sg);
    if (nsub.verts.empty() || gone[sg]) continue;
    const auto& osub = old_lg.sub(sg);

    auto old_edges = local_edges(osub);
    auto new_edges = local_edges(nsub);
    LocalEdgeDiff diff = diff_local_edges(old_edges, new_edges);

    std::vector<VertexId> ctx_changed;
    if (!minimizing) {
      for (VertexId v : nsub.verts) {
        if (!osub.contains(v)) continue;
        const SenderContext &oc = old_lg.ctx(v), &nc = new_lg.ctx(v);
        if (oc.out_degree != nc.out_degree || oc.out_weight_sum != nc.out_weight_sum)
          ctx_changed.push_back(v);
      }
    }

    // rows depend only on members, internal edges, and sender contexts; pure
    // entry/exit role churn leaves every stored table valid, so reconcile the
    // table set against the new entry list instead of revising
    bool structure_same = diff.empty() && ctx_changed.empty() && osub.verts == nsub.verts;
    if (structure_same) {
      std::vector<VertexId> stale;
      for (const auto& [e, t] : store.subgraph_tables(sg))
        if (!std::binary_search(nsub.entries.begin(), nsub.entries.end(), e)) stale.push_back(e);
      for (VertexId e : stale) {
        store.drop_entry(sg, e);
        ++st.dropped_entries;
      }
      st.kept_entries += store.subgraph_tables(sg).size();
      for (VertexId e : nsub.entries)
        if (!store.find(sg, e)) {
          store.table(sg, e) = compute_entry_table(new_lg, spec, sg, e, &st.activations);
          ++st.fresh_entries;
        }
      continue;
    }

    auto old_tables = store.subgraph_tables(sg);  // copy: sources for revision
    store.drop_subgraph(sg);
    for (VertexId e : nsub.entries) {
      auto it = old_tables.find(e);
      if (it == old_tables.end() || it->second.acc.size() != osub.verts.size()) {
        if (it != old_tables.end())
          log(LogLevel::Info, "stale shortcut table for entry %u of subgraph %d, recomputing",
              e, sg);
        store.table(sg, e) = compute_entry_table(new_lg, spec, sg, e, &st.activations);
        ++st.fresh_entries;
        continue;
      }
      if (minimizing)
        store.table(sg, e) = revise_min(old_lg, new_lg, spec, osub, nsub, diff, it->second, e,
                                        &st.activations);
      else
        store.table(sg, e) = revise_sum(old_lg, new_lg, spec, osub, nsub, diff, old_edges,
                                        ctx_changed, it->second, &st.activations);
      ++st.revised_entries;
    }
    for (const auto& [e, t] : old_tables)
      st.dropped_entries += !nsub.contains(e) || !new_lg.is_entry(e);
  }
  return st;
}

size_t upper_shortcut_links(const LayeredGraph& lg, const AlgorithmSpec& spec,
                            const ShortcutStore& store) {
  size_t links = 0;
  for (int32_t sg = 0; sg < static_cast<int32_t>(store.subgraph_count()); ++sg) {
    if (static_cast<size_t>(sg) >= lg.subgraph_count()) break;
    const auto& sub = lg.sub(sg);
    for (const auto& [entry, tab] : store.subgraph_tables(sg)) {
      if (tab.acc.size() != sub.verts.size()) continue;
      for (VertexId z : sub.exits)
        if (z != entry && !spec.is_bottom(tab.acc[sub.local(z)])) ++links;
    }
  }
  return links;
}

}  // namespace layph
