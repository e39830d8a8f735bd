#include "layph/algorithm.hpp"

namespace layph {

AlgorithmSpec AlgorithmSpec::sssp(VertexId source) {
  AlgorithmSpec s;
  s.workload_ = Workload::Sssp;
  s.agg_ = AggKind::Min;
  s.conv_ = ConvergenceKind::ExactFixpoint;
  s.policy_ = RevisionPolicy::MonotonicPath;
  s.source_ = source;
  return s;
}

AlgorithmSpec AlgorithmSpec::bfs(VertexId source) {
  AlgorithmSpec s = sssp(source);
  s.workload_ = Workload::Bfs;
  return s;
}

AlgorithmSpec AlgorithmSpec::pagerank(double damping, double epsilon) {
  AlgorithmSpec s;
  s.workload_ = Workload::PageRank;
  s.agg_ = AggKind::Sum;
  s.conv_ = ConvergenceKind::Threshold;
  s.policy_ = RevisionPolicy::AdditiveInverse;
  s.damping_ = damping;
  s.epsilon_ = epsilon;
  return s;
}

AlgorithmSpec AlgorithmSpec::php(VertexId source, double decay, double epsilon) {
  AlgorithmSpec s = pagerank(decay, epsilon);
  s.workload_ = Workload::Php;
  s.source_ = source;
  return s;
}

AlgorithmSpec AlgorithmSpec::by_name(const std::string& name, VertexId source) {
  if (name == "sssp") return sssp(source);
  if (name == "bfs") return bfs(source);
  if (name == "pagerank") return pagerank();
  if (name == "php") return php(source);
  throw Error("unknown algorithm '" + name + "' (expected sssp|bfs|pagerank|php)");
}

const char* AlgorithmSpec::name() const {
  switch (workload_) {
    case Workload::Sssp: return "sssp";
    case Workload::Bfs: return "bfs";
    case Workload::PageRank: return "pagerank";
    case Workload::Php: return "php";
  }
  return "?";
}

}  // namespace layph
