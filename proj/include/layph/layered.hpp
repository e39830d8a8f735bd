#pragma once

#include <unordered_map>
#include <vector>

#include "layph/algorithm.hpp"
#include "layph/engine.hpp"
#include "layph/graph.hpp"
#include "layph/partition.hpp"

namespace layph {

// Which phase may traverse an edge of the layered structure.
enum class EdgeFamily : uint8_t {
  Upper,        // endpoints in different subgraphs / outliers; upper-layer iteration
  Replication,  // identity link between a host and its proxy; upper-layer iteration
  Lower,        // inside one subgraph; subgraph-local propagation only
  BoundaryOut,  // internal -> entry/exit inside one subgraph; subgraph-local only
};

struct LayeredEdge {
  VertexId to;
  double w;
  EdgeFamily family;
};

// Runtime view of the two-layer structure: the base graph with proxy
// rerouting applied, role and family tags, and per-subgraph local indices.
// Vertices >= n_real are proxies. Rebuilt from (graph, partition, proxies)
// after every batch; shortcut rows live in ShortcutStore, keyed by subgraph.
class LayeredGraph {
 public:
  static constexpr uint8_t kEntry = 1, kExit = 2;

  struct LocalSubgraph {
    std::vector<VertexId> verts;  // sorted members incl. proxies
    std::vector<VertexId> entries, exits;
    std::vector<std::vector<LayeredEdge>> out_local;  // by local index, targets local
    std::vector<std::vector<LayeredEdge>> in_local;
    std::unordered_map<VertexId, uint32_t> local_of;
    size_t edge_count = 0;

    uint32_t local(VertexId v) const { return local_of.at(v); }
    bool contains(VertexId v) const { return local_of.count(v) != 0; }
  };

  static LayeredGraph build(const Graph& g, Partition p, std::vector<ProxyRecord> proxies);

  size_t n_real() const { return n_real_; }
  size_t n_total() const { return out_.size(); }
  int32_t subgraph_of(VertexId v) const { return subgraph_of_[v]; }
  uint8_t role(VertexId v) const { return role_[v]; }
  bool is_entry(VertexId v) const { return role_[v] & kEntry; }
  bool is_exit(VertexId v) const { return role_[v] & kExit; }
  // Upper layer: outliers plus every entry/exit.
  bool is_upper(VertexId v) const { return subgraph_of_[v] == kOutlier || role_[v] != 0; }
  bool is_live(VertexId v) const { return live_[v]; }

  const std::vector<LayeredEdge>& out(VertexId v) const { return out_[v]; }
  const SenderContext& ctx(VertexId v) const { return ctx_[v]; }

  const Partition& partition() const { return part_; }
  const std::vector<ProxyRecord>& proxies() const { return proxies_; }
  const LocalSubgraph& sub(int32_t sg) const { return subs_[sg]; }
  size_t subgraph_count() const { return subs_.size(); }

  // Real vertices with at least one upper out-edge or any shortcut row are
  // reachable during upper iteration; used for stats and tests.
  size_t upper_vertex_count() const;
  size_t upper_edge_count() const;  // Upper + Replication edges (rows not included)

 private:
  size_t n_real_ = 0;
  Partition part_;
  std::vector<ProxyRecord> proxies_;
  std::vector<int32_t> subgraph_of_;  // size n_total
  std::vector<uint8_t> role_;
  std::vector<uint8_t> live_;
  std::vector<std::vector<LayeredEdge>> out_;
  std::vector<SenderContext> ctx_;
  std::vector<LocalSubgraph> subs_;
};

// Fixpoint over the rerouted structure without any shortcuts (proxies
// forward identically); states of real vertices must match the plain graph
// run. Exercised by the replication-transparency tests.
RunResult run_rerouted(const LayeredGraph& lg, const AlgorithmSpec& spec,
                       const RunOptions& opt = {});

}  // namespace layph
