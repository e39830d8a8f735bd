#include "layph/engine.hpp"

namespace layph {

std::vector<SenderContext> sender_contexts(const Graph& g) {
  std::vector<SenderContext> ctx(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    ctx[v] = {g.out_degree(v), g.out_weight_sum(v)};
  return ctx;
}

namespace {

// Shared plain-graph scatter: one generate() per out-edge, deliveries to
// absorbing vertices dropped before the call.
struct GraphScatter {
  const Graph& g;
  const AlgorithmSpec& spec;
  const std::vector<SenderContext>& ctx;

  template <class Deliver>
  void operator()(VertexId v, double m, Deliver&& deliver, uint64_t& activations) const {
    if (spec.suppressed(m, ctx[v])) return;
    for (const auto& e : g.out(v)) {
      if (spec.absorbs(e.to)) continue;
      double msg = spec.generate(m, e.weight, ctx[v]);
      ++activations;
      deliver(e.to, msg);
    }
  }
};

}  // namespace

RunResult run_from_scratch(const Graph& g, const AlgorithmSpec& spec, const RunOptions& opt) {
  RunResult r;
  size_t n = g.vertex_count();
  r.states.init(n, spec);
  std::vector<uint8_t> forced(n, 0);
  std::vector<VertexId> initial;
  for (VertexId v = 0; v < n; ++v) {
    if (!g.is_live(v)) continue;
    double m0 = spec.initial_message(v);
    if (spec.is_bottom(m0)) continue;
    r.states.pending[v] = spec.aggregate(r.states.pending[v], m0);
    forced[v] = 1;
    initial.push_back(v);
  }
  auto ctx = sender_contexts(g);
  GraphScatter scatter{g, spec, ctx};
  if (opt.resolved_threads() > 1)
    detail::run_worklist_parallel(spec, r.states, forced, initial, scatter, r.counter, opt);
  else
    detail::run_worklist(spec, r.states, forced, initial, scatter, r.counter, opt);
  return r;
}

ActivationCounter run_fixpoint(const Graph& g, const AlgorithmSpec& spec, StateVector& sv,
                               const std::vector<VertexId>& seeds, const RunOptions& opt) {
  ActivationCounter counter;
  size_t n = g.vertex_count();
  sv.grow(n, spec);
  std::vector<uint8_t> forced(n, 0);
  std::vector<VertexId> initial;
  initial.reserve(seeds.size());
  for (VertexId v : seeds) {
    forced[v] = 1;
    initial.push_back(v);
  }
  for (VertexId v = 0; v < n; ++v)
    if (!spec.is_bottom(sv.pending[v]) && !forced[v]) initial.push_back(v);
  auto ctx = sender_contexts(g);
  GraphScatter scatter{g, spec, ctx};
  if (opt.resolved_threads() > 1)
    detail::run_worklist_parallel(spec, sv, forced, initial, scatter, counter, opt);
  else
    detail::run_worklist(spec, sv, forced, initial, scatter, counter, opt);
  return counter;
}

}  // namespace layph
