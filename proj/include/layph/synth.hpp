#pragma once

#include <vector>

#include "layph/graph.hpp"

namespace layph {

// Uniform random digraph: n vertices (external ids 0..n-1, isolated ones
// included), ~m distinct edges, weights uniform in [1,10] when weighted.
// Deterministic for a fixed seed.
Graph make_random_graph(size_t n, size_t m, bool weighted, uint64_t seed);

// Planted-partition digraph: `communities` blocks of `block_size` vertices;
// every vertex draws ~lambda_in out-edges inside its block and ~lambda_out
// out-edges to other blocks. With lambda_in >> lambda_out the blocks are the
// dense communities a discovery pass is expected to recover.
Graph make_planted_partition(size_t communities, size_t block_size, double lambda_in,
                             double lambda_out, bool weighted, uint64_t seed);

// Random update batch against g: n_del distinct existing edges deleted,
// n_add new edges between currently unconnected live pairs (weights uniform
// [1,10] when g is weighted), n_vadd fresh vertices (each attached by up to
// three random edges), n_vdel live vertices deleted. Vertices in `protect`
// are never deleted (algorithm sources must stay live). Deterministic for a
// fixed seed; throws on infeasible counts.
UpdateBatch gen_update_batch(const Graph& g, size_t n_add, size_t n_del, size_t n_vadd,
                             size_t n_vdel, uint64_t seed,
                             const std::vector<VertexId>& protect = {});

}  // namespace layph
