#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "layph/types.hpp"

namespace layph {

// Maps external (file) vertex ids to dense internal ids. Internal ids are
// assigned in first-seen order and are never reused: a deleted vertex keeps
// its slot and is revived with the same internal id if re-inserted.
class VertexIdMap {
 public:
  VertexId intern(ExternalId ext);
  VertexId lookup(ExternalId ext) const;  // kNoVertex when unseen
  ExternalId external(VertexId v) const { return ext_of_[v]; }
  size_t size() const { return ext_of_.size(); }

 private:
  std::unordered_map<ExternalId, VertexId> id_of_;
  std::vector<ExternalId> ext_of_;
};

struct UnitUpdate {
  enum Kind : uint8_t { InsertEdge, DeleteEdge, InsertVertex, DeleteVertex };
  Kind kind;
  ExternalId u = 0;
  ExternalId v = 0;
  double w = 1.0;

  static UnitUpdate insert_edge(ExternalId u, ExternalId v, double w = 1.0) {
    return {InsertEdge, u, v, w};
  }
  static UnitUpdate delete_edge(ExternalId u, ExternalId v) {
    return {DeleteEdge, u, v, 1.0};
  }
  static UnitUpdate insert_vertex(ExternalId v) { return {InsertVertex, v, 0, 1.0}; }
  static UnitUpdate delete_vertex(ExternalId v) { return {DeleteVertex, v, 0, 1.0}; }
};

// Ordered list of unit updates, applied in sequence.
struct UpdateBatch {
  std::vector<UnitUpdate> updates;

  bool empty() const { return updates.empty(); }
  size_t size() const { return updates.size(); }

  static UpdateBatch load(const std::string& path);
  void save(const std::string& path) const;
};

// Immutable directed graph with an in-adjacency mirror. Insert of an existing
// edge replaces its weight (parallel edges are disallowed); self-loops are
// permitted.
class Graph {
 public:
  struct Edge {
    VertexId to;
    double weight;
  };

  static Graph load_edge_list(const std::string& path, bool weighted);

  // Builds from edges over external ids; used by generators and tests.
  static Graph from_edges(const std::vector<std::tuple<ExternalId, ExternalId, double>>& edges,
                          bool weighted);

  Graph apply(const UpdateBatch& batch) const;

  size_t vertex_count() const { return out_.size(); }
  size_t live_count() const { return live_count_; }
  size_t edge_count() const { return edge_count_; }
  bool weighted() const { return weighted_; }

  bool is_live(VertexId v) const { return live_[v]; }
  std::span<const Edge> out(VertexId v) const { return {out_[v].data(), out_[v].size()}; }
  std::span<const Edge> in(VertexId v) const { return {in_[v].data(), in_[v].size()}; }
  uint32_t out_degree(VertexId v) const { return static_cast<uint32_t>(out_[v].size()); }
  double out_weight_sum(VertexId v) const;

  // weight of edge (u,v); kInf when absent
  double edge_weight(VertexId u, VertexId v) const;
  bool has_edge(VertexId u, VertexId v) const { return edge_weight(u, v) != kInf; }

  ExternalId external_id(VertexId v) const { return ids_.external(v); }
  VertexId internal_id(ExternalId ext) const { return ids_.lookup(ext); }
  const VertexIdMap& id_map() const { return ids_; }

 private:
  friend struct GraphBuilder;
  std::vector<std::vector<Edge>> out_, in_;
  std::vector<uint8_t> live_;
  VertexIdMap ids_;
  size_t edge_count_ = 0;
  size_t live_count_ = 0;
  bool weighted_ = false;
};

inline Graph apply_update_batch(const Graph& g, const UpdateBatch& batch) {
  return g.apply(batch);
}

// Vertices whose state or adjacency a batch can affect, in the post-apply id
// space. DeleteVertex(v) expands to {v} union all neighbors of v in `before`.
std::vector<VertexId> diff_summary(const Graph& before, const Graph& after,
                                   const UpdateBatch& batch);

// Net difference between two graph versions, in internal ids. Sequence
// effects inside the batch (insert-then-delete and the like) cancel out.
struct NetDiff {
  struct EdgeDelta {
    VertexId u, v;
    double w;
  };
  std::vector<EdgeDelta> inserted;              // in `after` only
  std::vector<EdgeDelta> deleted;               // in `before` only, old weight
  std::vector<std::pair<EdgeDelta, double>> reweighted;  // {edge with new w, old w}
  std::vector<VertexId> vertices_added;         // live in `after` only
  std::vector<VertexId> vertices_removed;       // live in `before` only
  bool empty() const {
    return inserted.empty() && deleted.empty() && reweighted.empty() &&
           vertices_added.empty() && vertices_removed.empty();
  }
};

NetDiff net_diff(const Graph& before, const Graph& after, const UpdateBatch& batch);

}  // namespace layph
