#pragma once

#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "layph/graph.hpp"
#include "layph/types.hpp"

namespace layph {

inline constexpr int32_t kOutlier = -1;

// A discovered dense community. Entry/exit roles are derived against the
// rest of the graph at layered-graph build time; members are real vertices
// (proxies are added on top by replication records).
struct DenseSubgraph {
  std::vector<VertexId> members;  // sorted
};

struct Partition {
  std::vector<int32_t> subgraph_of;  // per real vertex; kOutlier when unassigned
  std::vector<DenseSubgraph> subgraphs;
  uint32_t cap = 0;  // K in force at discovery

  static Partition from_membership(const Graph& g,
                                   const std::vector<std::vector<VertexId>>& groups);
  int32_t subgraph(VertexId v) const {
    return v < subgraph_of.size() ? subgraph_of[v] : kOutlier;
  }
};

// A replicated high-traffic neighbour: `proxy` is a synthetic vertex inside
// `subgraph` standing in for `host`, with the listed host edges rerouted
// through it. Replication links (host->proxy or proxy->host) forward
// messages unchanged.
struct ProxyRecord {
  enum Direction : uint8_t { IntoSubgraph, OutOfSubgraph };
  VertexId host;
  VertexId proxy;  // >= real vertex count
  int32_t subgraph;
  Direction direction;
  std::vector<VertexId> targets;  // subgraph members whose host edges moved
};

// Entry (external in-edge) / exit (external out-edge) sets of one subgraph,
// evaluated on the plain graph.
struct SubgraphRoles {
  std::vector<VertexId> entries, exits;
};
SubgraphRoles subgraph_roles(const Graph& g, const Partition& p, int32_t sg);

size_t internal_edge_count(const Graph& g, const Partition& p, int32_t sg);

// |entries| * |exits| < |internal edges| (the payoff condition for shortcuts).
bool density_ok(const Graph& g, const Partition& p, int32_t sg);

// Seeded single-level Louvain on the undirected projection, community size
// capped at K, then the density filter. Deterministic for a fixed seed.
Partition discover_subgraphs(const Graph& g, uint32_t K, uint64_t seed);

// Adds proxies for external vertices with more than `threshold` edges
// into/out of a subgraph, respecting the K cap.
std::vector<ProxyRecord> replicate_vertices(const Graph& g, const Partition& p,
                                            uint32_t threshold);

// Discovery + replication + final density filter (a candidate community that
// only passes the density test thanks to replication is retained).
struct PreprocessResult {
  Partition partition;
  std::vector<ProxyRecord> proxies;
};
PreprocessResult preprocess_partition(const Graph& g, uint32_t K, uint32_t replication_threshold,
                                      uint64_t seed);

struct RefreshPolicy {
  uint64_t rebuild_threshold = 100000;  // accumulated unit updates before re-discovery
  uint32_t replication_threshold = 2;
  // For accumulating aggregations, revising a structurally changed subgraph's
  // tables costs roughly (tables + 1) * internal_edges of propagation. Past
  // this budget the pipeline dissolves the subgraph into the upper layer and
  // leaves re-discovery to the next rebuild.
  uint64_t revision_budget = 4096;
  uint64_t seed = 1;
};

// Patches membership for a batch (dead members dropped, new vertices become
// outliers, subgraphs that no longer pass the density test dissolve). Once
// the accumulated update count crosses the rebuild threshold, communities
// are rediscovered from scratch.
struct RefreshOutcome {
  Partition partition;
  std::vector<ProxyRecord> proxies;
  std::vector<int32_t> dissolved;  // old subgraph ids whose rows must be dropped
  bool rebuilt = false;
};
RefreshOutcome refresh_partition(const Graph& g_new, const Partition& p,
                                 const std::vector<ProxyRecord>& proxies, const NetDiff& diff,
                                 const RefreshPolicy& policy, uint64_t& accumulated_updates);

// Default K: 0.02% of the vertex count, clamped to [16, 100000].
uint32_t default_subgraph_cap(size_t vertex_count);

}  // namespace layph
