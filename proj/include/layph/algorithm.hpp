#pragma once

#include <cmath>
#include <string>

#include "layph/types.hpp"

namespace layph {

// Per-sender data a generate function may consult. Degrees are effective:
// when proxies are in play they count rerouted edges for the host, not the
// replication links.
struct SenderContext {
  uint32_t out_degree = 0;
  double out_weight_sum = 0;
};

enum class AggKind : uint8_t { Min, Sum };
enum class ConvergenceKind : uint8_t { ExactFixpoint, Threshold };
enum class RevisionPolicy : uint8_t { MonotonicPath, AdditiveInverse };
enum class Workload : uint8_t { Sssp, Bfs, PageRank, Php };

// A vertex-centric workload: how messages are generated along edges, how a
// vertex folds arrivals into its state, and when a difference is settled.
// Instances are immutable and safe to share across threads.
class AlgorithmSpec {
 public:
  static AlgorithmSpec sssp(VertexId source);
  static AlgorithmSpec bfs(VertexId source);
  static AlgorithmSpec pagerank(double damping = 0.85, double epsilon = 1e-6);
  static AlgorithmSpec php(VertexId source, double decay = 0.85, double epsilon = 1e-6);
  static AlgorithmSpec by_name(const std::string& name, VertexId source);

  Workload workload() const { return workload_; }
  AggKind agg_kind() const { return agg_; }
  ConvergenceKind convergence() const { return conv_; }
  RevisionPolicy revision_policy() const { return policy_; }
  double epsilon() const { return epsilon_; }
  VertexId source() const { return source_; }
  const char* name() const;

  // Value that aggregate ignores: +inf under min, 0 under sum.
  double bottom() const { return agg_ == AggKind::Min ? kInf : 0.0; }
  bool is_bottom(double m) const { return agg_ == AggKind::Min ? m == kInf : m == 0.0; }

  // Identity of the arithmetic generate applies to the incoming message
  // (0 when generate adds, 1 when it scales); the unit message injected when
  // measuring a subgraph's transfer behaviour.
  double ge_identity() const { return agg_ == AggKind::Min ? 0.0 : 1.0; }

  double aggregate(double a, double b) const { return agg_ == AggKind::Min ? std::min(a, b) : a + b; }

  // True when the sender emits nothing along its edges for message m.
  bool suppressed(double m, const SenderContext& ctx) const {
    if (is_bottom(m)) return true;
    if (workload_ == Workload::PageRank && ctx.out_degree == 0) return true;
    if (workload_ == Workload::Php && ctx.out_weight_sum == 0) return true;
    return false;
  }

  double generate(double m, double w, const SenderContext& ctx) const {
    switch (workload_) {
      case Workload::Sssp: return m + w;
      case Workload::Bfs: return m + 1.0;
      case Workload::PageRank: return m * damping_ / ctx.out_degree;
      case Workload::Php: return damping_ * m * w / ctx.out_weight_sum;
    }
    return bottom();
  }

  // Applies a stored unit response r to a live message: the group operation
  // whose identity is ge_identity().
  double compose(double m, double r) const { return agg_ == AggKind::Min ? m + r : m * r; }

  // Additive inverse of a previously delivered contribution (sum specs only).
  double inverse(double m) const { return -m; }

  bool converged(double oldv, double newv) const {
    if (conv_ == ConvergenceKind::ExactFixpoint) return oldv == newv;
    if (oldv == newv) return true;
    if (std::isinf(oldv) != std::isinf(newv)) return false;
    return std::abs(newv - oldv) < epsilon_;
  }

  // Messages below the emission threshold are withheld (sum specs).
  double emit_threshold() const { return conv_ == ConvergenceKind::Threshold ? epsilon_ : 0.0; }

  double initial_state(VertexId) const {
    switch (workload_) {
      case Workload::Sssp:
      case Workload::Bfs: return kInf;
      case Workload::PageRank:
      case Workload::Php: return 0.0;
    }
    return 0.0;
  }

  double initial_message(VertexId v) const {
    switch (workload_) {
      case Workload::Sssp:
      case Workload::Bfs: return v == source_ ? 0.0 : kInf;
      case Workload::PageRank: return 1.0 - damping_;
      case Workload::Php: return v == source_ ? 1.0 : 0.0;
    }
    return bottom();
  }

  // Absorbing vertices consume arrivals without state change or re-emission
  // (the rooted-walk source). Deliveries to them are dropped at the sender.
  bool absorbs(VertexId v) const { return workload_ == Workload::Php && v == source_; }

 private:
  Workload workload_;
  AggKind agg_;
  ConvergenceKind conv_;
  RevisionPolicy policy_;
  double damping_ = 0.85;
  double epsilon_ = 0.0;
  VertexId source_ = kNoVertex;
};

}  // namespace layph
