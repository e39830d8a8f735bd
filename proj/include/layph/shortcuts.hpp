#pragma once

#include <unordered_map>
#include <vector>

#include "layph/layered.hpp"

namespace layph {

constexpr uint32_t kLocalNone = UINT32_MAX;

// Unit-basis propagation inside one subgraph, from one entry. acc is indexed
// by the subgraph's local ids; acc[local(entry)] carries the identity seed
// (plus cycle closure for sum specs), so compose(m, acc[j]) is the exact
// effect on j of an external message m consumed at the entry. parent is the
// in-subgraph dependency tree for min specs and stays empty for sum specs.
struct EntryTable {
  std::vector<double> acc;
  std::vector<uint32_t> parent;

  size_t row_count(double bottom) const {
    size_t n = 0;
    for (double a : acc) n += a != bottom;
    return n;
  }
};

// Shortcut rows for every (subgraph, entry) pair. Subgraph ids are stable
// between full rediscoveries (dissolution tombstones them), so tables keyed
// here survive incremental maintenance. The access trace records which
// subgraphs' tables were read, for the locality tests.
class ShortcutStore {
 public:
  void reset(size_t subgraph_count) {
    tables_.assign(subgraph_count, {});
    trace_.clear();
  }
  size_t subgraph_count() const { return tables_.size(); }

  EntryTable& table(int32_t sg, VertexId entry) {
    touch(sg);
    return tables_[sg][entry];
  }
  const EntryTable* find(int32_t sg, VertexId entry) const {
    touch(sg);
    auto it = tables_[sg].find(entry);
    return it == tables_[sg].end() ? nullptr : &it->second;
  }
  void drop_subgraph(int32_t sg) { tables_[sg].clear(); }
  void drop_entry(int32_t sg, VertexId entry) { tables_[sg].erase(entry); }

  const std::unordered_map<VertexId, EntryTable>& subgraph_tables(int32_t sg) const {
    touch(sg);
    return tables_[sg];
  }

  size_t row_count(double bottom) const;
  size_t entry_count() const;

  void start_trace() {
    tracing_ = true;
    trace_.clear();
  }
  std::vector<int32_t> take_trace() {
    tracing_ = false;
    return std::move(trace_);
  }

 private:
  void touch(int32_t sg) const {
    if (tracing_) trace_.push_back(sg);
  }

  std::vector<std::unordered_map<VertexId, EntryTable>> tables_;
  mutable std::vector<int32_t> trace_;
  mutable bool tracing_ = false;
};

// Emission threshold for unit runs and table revisions; far below the
// reporting tolerances so truncation never shows up in verified states.
constexpr double kUnitThreshold = 1e-9;

// Full unit run for one entry of one subgraph.
EntryTable compute_entry_table(const LayeredGraph& lg, const AlgorithmSpec& spec, int32_t sg,
                               VertexId entry, uint64_t* activations = nullptr);

// Fresh tables for one subgraph / for every subgraph.
void compute_subgraph_shortcuts(const LayeredGraph& lg, const AlgorithmSpec& spec, int32_t sg,
                                ShortcutStore& store, uint64_t* activations = nullptr);
void compute_shortcuts(const LayeredGraph& lg, const AlgorithmSpec& spec, ShortcutStore& store,
                       uint64_t* activations = nullptr);

// Draws `trials` random entry-message vectors, compares one-hop composition
// against a subgraph-local fixpoint, and returns the largest absolute state
// difference observed (0 when the subgraph has no entries).
double verify_shortcut_equivalence(const LayeredGraph& lg, const AlgorithmSpec& spec,
                                   const ShortcutStore& store, int32_t sg, uint64_t seed,
                                   int trials);

struct ShortcutUpdateStats {
  size_t kept_entries = 0;     // untouched tables carried over
  size_t revised_entries = 0;  // maintained from the old table
  size_t fresh_entries = 0;    // recomputed by a unit run
  size_t dropped_entries = 0;  // entry role lost or subgraph dissolved
  uint64_t activations = 0;    // generate() calls spent on maintenance
};

// Maintains `store` across one batch: tables of dissolved subgraphs are
// dropped, unchanged subgraphs keep their tables, new entries get unit runs,
// removed entries are dropped, and surviving entries of changed subgraphs
// are revised from their old tables (dependency-tree resets for min specs,
// cancel/compensate deltas for sum specs). `rebuilt` recomputes everything.
ShortcutUpdateStats update_shortcuts(const LayeredGraph& old_lg, const LayeredGraph& new_lg,
                                     const AlgorithmSpec& spec,
                                     const std::vector<int32_t>& dissolved, bool rebuilt,
                                     ShortcutStore& store);

// Non-bottom entry->exit rows: the shortcut links that act as upper-layer
// edges (an entry's row to itself is not a link).
size_t upper_shortcut_links(const LayeredGraph& lg, const AlgorithmSpec& spec,
                            const ShortcutStore& store);

}  // namespace layph
