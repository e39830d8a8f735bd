#pragma once

#include <unordered_map>
#include <vector>

#include "layph/engine.hpp"
#include "layph/graph.hpp"
#include "layph/partition.hpp"
#include "layph/shortcuts.hpp"

namespace layph {

// What the engine keeps from the last converged run so the next batch can
// be turned into revision messages without replaying history.
//
// Min specs remember the dependency parent of every improved vertex: the
// in-neighbor whose edge witnesses the converged value (kNoVertex when the
// value comes from the vertex's own initial message or the vertex never
// improved). Sum specs remember the converged states; the total mass a
// vertex ever pushed down an edge is derived as generate(x - x0, w, ctx).
struct Memo {
  std::vector<VertexId> parent;   // min specs, indexed by vertex
  std::vector<double> converged;  // sum specs, indexed by vertex

  bool empty() const { return parent.empty() && converged.empty(); }
};

Memo build_memo(const Graph& g, const AlgorithmSpec& spec, const std::vector<double>& x);

// Revision messages and state resets deduced from one batch.
struct RevisionSet {
  std::vector<std::pair<VertexId, double>> seeds;  // aggregated per target, sorted
  std::vector<VertexId> resets;                    // x := x0 before consuming, sorted

  bool empty() const { return seeds.empty() && resets.empty(); }
};

// Turns the net difference between two graph versions into revision seeds.
// `x` is the converged state vector of g_old (only the g_old vertex range is
// read). Min specs reset the dependency subtrees of broken witness edges and
// reseed them from intact in-neighbors; sum specs cancel stale per-edge
// contributions and compensate new ones, including context rescaling.
RevisionSet deduce_revision(const Graph& g_old, const Graph& g_new, const AlgorithmSpec& spec,
                            const NetDiff& diff, const Memo& memo, const std::vector<double>& x);

struct PhaseStat {
  double ms = 0;
  uint64_t edge_activations = 0;
  uint64_t vertex_updates = 0;
};

// One workflow execution: layer maintenance, subgraph-local upload, upper
// iteration over shortcut rows, one-hop assignment. Family counters come
// from the actual traversal sites so the containment tests observe rather
// than assume.
struct WorkflowStats {
  PhaseStat layer_update, upload, upper_iter, assign;
  std::vector<std::pair<int32_t, uint64_t>> upload_by_subgraph;  // (sg, activations)
  std::vector<int32_t> touched_subgraphs;  // subgraphs given upload work
  uint64_t upper_family_activations[4] = {0, 0, 0, 0};  // indexed by EdgeFamily
  uint64_t row_activations = 0;     // shortcut row applications during iteration
  uint64_t assign_applications = 0; // row applications during assignment
  ShortcutUpdateStats shortcut_update;
  bool rebuilt = false;

  uint64_t total_activations() const {
    return layer_update.edge_activations + upload.edge_activations +
           upper_iter.edge_activations + assign.edge_activations;
  }
};

// Layered engine state that persists across batches: the graph, the layer
// structure, shortcut tables, converged states (real vertices and proxies),
// held sub-threshold row messages, and the revision memo.
struct LayeredPipeline {
  AlgorithmSpec spec;
  RunOptions run_opt;
  RefreshPolicy policy;
  Graph graph;
  LayeredGraph lg;
  ShortcutStore store;
  StateVector sv;                  // sized lg.n_total()
  std::vector<double> row_pending; // exit-side arrivals below threshold, kept across runs
  Memo memo;
  uint64_t accumulated_updates = 0;

  static LayeredPipeline create(Graph g, const AlgorithmSpec& spec, uint32_t subgraph_cap = 0,
                                const RefreshPolicy& policy = {}, const RunOptions& opt = {});

  // Same, but with a caller-supplied layer structure (preloaded container or
  // a prescribed partition in tests) instead of running discovery.
  static LayeredPipeline create_with(Graph g, const AlgorithmSpec& spec, Partition part,
                                     std::vector<ProxyRecord> proxies,
                                     const RefreshPolicy& policy = {}, const RunOptions& opt = {});

  // Full run from the spec's initial states and messages via the layered
  // workflow. Called once by create(); exposed for tests.
  WorkflowStats run_from_scratch();

  // One batch: apply the updates, maintain layer and shortcuts, deduce
  // revision messages, then upload / iterate / assign.
  WorkflowStats apply_batch(const UpdateBatch& batch);

  // Converged states of real vertices (dead vertices hold their initial
  // state); proxies are excluded.
  std::vector<double> real_states() const;

 private:
  // extra_forced: vertices whose held messages must be consumed this run even
  // when no revision seed targets them (proxy teardown hands mass to them).
  WorkflowStats run_workflow(const RevisionSet& rev,
                             const std::vector<VertexId>& extra_forced = {});
};

// Whole-graph incremental baseline: the same deduction, consumed by a plain
// fixpoint over the full graph.
struct PlainPipeline {
  AlgorithmSpec spec;
  RunOptions run_opt;
  Graph graph;
  StateVector sv;
  Memo memo;

  static PlainPipeline create(Graph g, const AlgorithmSpec& spec, const RunOptions& opt = {});
  ActivationCounter apply_batch(const UpdateBatch& batch);
  std::vector<double> real_states() const;
};

}  // namespace layph
