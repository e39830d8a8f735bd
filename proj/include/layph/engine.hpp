#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <random>
#include <thread>
#include <vector>

#include "layph/algorithm.hpp"
#include "layph/graph.hpp"
#include "layph/types.hpp"

namespace layph {

struct ActivationCounter {
  uint64_t edge_activations = 0;  // generate() invocations
  uint64_t vertex_updates = 0;    // state changes
  uint64_t rounds = 0;

  ActivationCounter& operator+=(const ActivationCounter& o) {
    edge_activations += o.edge_activations;
    vertex_updates += o.vertex_updates;
    rounds += o.rounds;
    return *this;
  }
};

// Converged run snapshot: states plus unconsumed aggregated messages.
// Sub-threshold residuals stay in pending so later incremental runs see them.
struct StateVector {
  std::vector<double> x;
  std::vector<double> pending;

  void init(size_t n, const AlgorithmSpec& spec) {
    x.assign(n, 0);
    pending.assign(n, spec.bottom());
    for (size_t v = 0; v < n; ++v) x[v] = spec.initial_state(static_cast<VertexId>(v));
  }
  void grow(size_t n, const AlgorithmSpec& spec) {
    while (x.size() < n) {
      x.push_back(spec.initial_state(static_cast<VertexId>(x.size())));
      pending.push_back(spec.bottom());
    }
  }
};

struct RunOptions {
  uint64_t activation_cap = 10'000'000'000ULL;
  // Messages below this magnitude are withheld at the sender (sum specs);
  // the default mirrors the spec's convergence threshold.
  double emit_threshold = -1;  // <0: use spec.emit_threshold()
  unsigned threads = 1;        // 0 = hardware concurrency
  uint64_t shuffle_seed = 0;   // nonzero: randomized scheduling (tests)

  double resolved_threshold(const AlgorithmSpec& spec) const {
    return emit_threshold < 0 ? spec.emit_threshold() : emit_threshold;
  }
  unsigned resolved_threads() const {
    if (threads != 0) return threads;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
  }
};

namespace detail {

class Worklist {
 public:
  Worklist(size_t n, uint64_t shuffle_seed)
      : queued_(n, 0), rng_(shuffle_seed), random_(shuffle_seed != 0) {}

  void push(VertexId v) {
    if (queued_[v]) return;
    queued_[v] = 1;
    q_.push_back(v);
  }
  bool empty() const { return q_.empty(); }
  size_t size() const { return q_.size(); }

  VertexId pop() {
    VertexId v;
    if (random_) {
      size_t i = std::uniform_int_distribution<size_t>(0, q_.size() - 1)(rng_);
      v = q_[i];
      q_[i] = q_.back();
      q_.pop_back();
    } else {
      v = q_.front();
      q_.pop_front();
    }
    queued_[v] = 0;
    return v;
  }

 private:
  std::deque<VertexId> q_;
  std::vector<uint8_t> queued_;
  std::mt19937_64 rng_;
  bool random_;
};

// Asynchronous worklist fixpoint. The scatter callable owns edge iteration
// and generate() calls; it receives (v, m, deliver, activations) and must
// call deliver(to, msg) for every message it produces, bumping `activations`
// per generate() invocation. Vertices in `forced` scatter their first
// consumed message even when it does not change their state; that is how
// initial and revision seeds bypass the no-improvement gate.
template <class Spec, class Scatter>
void run_worklist(const Spec& spec, StateVector& sv, std::vector<uint8_t>& forced,
                  const std::vector<VertexId>& initial, Scatter&& scatter,
                  ActivationCounter& counter, const RunOptions& opt) {
  const bool minimizing = spec.agg_kind() == AggKind::Min;
  const double bottom = spec.bottom();
  const double threshold = opt.resolved_threshold(spec);
  Worklist wl(sv.x.size(), opt.shuffle_seed);
  for (VertexId v : initial) wl.push(v);

  auto deliver = [&](VertexId to, double msg) {
    if (spec.is_bottom(msg)) return;
    double np = spec.aggregate(sv.pending[to], msg);
    if (minimizing && np == sv.pending[to]) return;  // dominated
    sv.pending[to] = np;
    wl.push(to);
  };

  size_t until_round = wl.size();
  while (!wl.empty()) {
    if (until_round == 0) {
      ++counter.rounds;
      until_round = wl.size();
    }
    --until_round;
    VertexId v = wl.pop();
    double m = sv.pending[v];
    bool force = forced[v];
    forced[v] = 0;
    if (spec.is_bottom(m)) continue;
    if (minimizing) {
      sv.pending[v] = bottom;
      double cand = std::min(sv.x[v], m);
      if (cand != sv.x[v]) {
        sv.x[v] = cand;
        ++counter.vertex_updates;
      } else if (!force) {
        continue;  // dominated message; re-emission would be redundant
      }
    } else {
      if (!force && std::abs(m) < threshold) continue;  // residual retained
      sv.pending[v] = bottom;
      sv.x[v] += m;
      ++counter.vertex_updates;
    }
    scatter(v, m, deliver, counter.edge_activations);
    if (counter.edge_activations > opt.activation_cap)
      throw Error("activation cap exceeded (" + std::to_string(counter.edge_activations) +
                  " edge activations)");
  }
  ++counter.rounds;
}

inline bool atomic_min(std::atomic<double>& a, double v) {
  double cur = a.load(std::memory_order_relaxed);
  while (v < cur) {
    if (a.compare_exchange_weak(cur, v, std::memory_order_relaxed)) return true;
  }
  return false;
}

inline void atomic_add(std::atomic<double>& a, double v) {
  double cur = a.load(std::memory_order_relaxed);
  while (!a.compare_exchange_weak(cur, cur + v, std::memory_order_relaxed)) {
  }
}

// Round-synchronous parallel variant: each round drains a frontier with a
// worker pool; pending cells take atomic read-modify-writes. Aggregation
// order within a round is nondeterministic, which min specs absorb exactly
// and sum specs within tolerance.
template <class Spec, class Scatter>
void run_worklist_parallel(const Spec& spec, StateVector& sv, std::vector<uint8_t>& forced,
                           const std::vector<VertexId>& initial, Scatter&& scatter,
                           ActivationCounter& counter, const RunOptions& opt) {
  const size_t n = sv.x.size();
  const bool minimizing = spec.agg_kind() == AggKind::Min;
  const double bottom = spec.bottom();
  const double threshold = opt.resolved_threshold(spec);
  const unsigned nthreads = opt.resolved_threads();

  std::vector<std::atomic<double>> pending(n);
  for (size_t i = 0; i < n; ++i) pending[i].store(sv.pending[i], std::memory_order_relaxed);
  std::vector<std::atomic<uint8_t>> enqueued(n);
  for (auto& f : enqueued) f.store(0, std::memory_order_relaxed);

  std::vector<VertexId> frontier;
  for (VertexId v : initial)
    if (!enqueued[v].exchange(1)) frontier.push_back(v);

  std::atomic<uint64_t> activations{0};
  std::atomic<uint64_t> updates{0};

  while (!frontier.empty()) {
    ++counter.rounds;
    std::vector<std::vector<VertexId>> next(nthreads);
    std::atomic<size_t> cursor{0};
    auto worker = [&](unsigned tid) {
      uint64_t local_act = 0, local_upd = 0;
      auto deliver = [&](VertexId to, double msg) {
        if (spec.is_bottom(msg)) return;
        bool changed;
        if (minimizing) {
          changed = atomic_min(pending[to], msg);
        } else {
          atomic_add(pending[to], msg);
          changed = true;
        }
        if (changed && !enqueued[to].exchange(1, std::memory_order_acq_rel))
          next[tid].push_back(to);
      };
      for (;;) {
        size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
        if (i >= frontier.size()) break;
        VertexId v = frontier[i];
        enqueued[v].store(0, std::memory_order_release);
        double m = pending[v].exchange(bottom, std::memory_order_acq_rel);
        bool force = forced[v];
        forced[v] = 0;
        if (spec.is_bottom(m)) continue;
        if (minimizing) {
          double cand = std::min(sv.x[v], m);
          if (cand != sv.x[v]) {
            sv.x[v] = cand;
            ++local_upd;
          } else if (!force) {
            continue;
          }
        } else {
          if (!force && std::abs(m) < threshold) {
            atomic_add(pending[v], m);  // put the residual back, unqueued
            continue;
          }
          sv.x[v] += m;
          ++local_upd;
        }
        scatter(v, m, deliver, local_act);
      }
      activations.fetch_add(local_act, std::memory_order_relaxed);
      updates.fetch_add(local_upd, std::memory_order_relaxed);
    };
    if (nthreads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
      for (auto& t : pool) t.join();
    }
    frontier.clear();
    for (auto& nx : next) frontier.insert(frontier.end(), nx.begin(), nx.end());
    if (activations.load() > opt.activation_cap)
      throw Error("activation cap exceeded (" + std::to_string(activations.load()) +
                  " edge activations)");
  }
  counter.edge_activations += activations.load();
  counter.vertex_updates += updates.load();
  for (size_t i = 0; i < n; ++i) sv.pending[i] = pending[i].load(std::memory_order_relaxed);
}

}  // namespace detail

// Sender contexts for every vertex of a plain graph.
std::vector<SenderContext> sender_contexts(const Graph& g);

struct RunResult {
  StateVector states;
  ActivationCounter counter;
};

// Full fixpoint from the spec's initial states and messages.
RunResult run_from_scratch(const Graph& g, const AlgorithmSpec& spec, const RunOptions& opt = {});

// Continues a run: consumes whatever sits in sv.pending (plus any residuals)
// with `seeds` scattering unconditionally once.
ActivationCounter run_fixpoint(const Graph& g, const AlgorithmSpec& spec, StateVector& sv,
                               const std::vector<VertexId>& seeds, const RunOptions& opt = {});

}  // namespace layph
