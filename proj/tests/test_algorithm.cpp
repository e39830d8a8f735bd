#include <cmath>
#include <random>

#include "doctest.h"
#include "layph/algorithm.hpp"
#include "layph/graph.hpp"

using namespace layph;

TEST_CASE("by_name resolves every workload and rejects unknowns") {
  CHECK(AlgorithmSpec::by_name("sssp", 0).workload() == Workload::Sssp);
  CHECK(AlgorithmSpec::by_name("bfs", 0).workload() == Workload::Bfs);
  CHECK(AlgorithmSpec::by_name("pagerank", 0).workload() == Workload::PageRank);
  CHECK(AlgorithmSpec::by_name("php", 0).workload() == Workload::Php);
  CHECK_THROWS_AS(AlgorithmSpec::by_name("dijkstra", 0), Error);
}

TEST_CASE("minimizing algebra: bottom, identity, compose") {
  AlgorithmSpec s = AlgorithmSpec::sssp(0);
  CHECK(s.agg_kind() == AggKind::Min);
  CHECK(s.bottom() == kInf);
  CHECK(s.is_bottom(kInf));
  CHECK_FALSE(s.is_bottom(0.0));
  CHECK(s.aggregate(3.0, 5.0) == 3.0);
  CHECK(s.aggregate(kInf, 5.0) == 5.0);
  CHECK(s.compose(2.0, 3.0) == 5.0);
  CHECK(s.compose(4.0, s.ge_identity()) == 4.0);
  CHECK(s.compose(2.0, kInf) == kInf);  // bottom annihilates
}

TEST_CASE("accumulating algebra: bottom, identity, compose") {
  AlgorithmSpec s = AlgorithmSpec::pagerank();
  CHECK(s.agg_kind() == AggKind::Sum);
  CHECK(s.bottom() == 0.0);
  CHECK(s.is_bottom(0.0));
  CHECK(s.aggregate(0.25, 0.5) == 0.75);
  CHECK(s.compose(2.0, 3.0) == 6.0);
  CHECK(s.compose(4.0, s.ge_identity()) == 4.0);
  CHECK(s.compose(2.0, 0.0) == 0.0);
}

TEST_CASE("compose distributes over aggregate") {
  // The law that makes one-hop shortcut application sound:
  // compose(agg(a, b), r) == agg(compose(a, r), compose(b, r)).
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(0.01, 10.0);
  for (const char* name : {"sssp", "pagerank"}) {
    AlgorithmSpec s = AlgorithmSpec::by_name(name, 0);
    for (int i = 0; i < 200; ++i) {
      double a = val(rng), b = val(rng), r = val(rng);
      double lhs = s.compose(s.aggregate(a, b), r);
      double rhs = s.aggregate(s.compose(a, r), s.compose(b, r));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("generate matches the per-workload propagation rule") {
  Graph g = Graph::from_edges({{0, 1, 2.0}, {0, 2, 3.0}}, true);
  SenderContext ctx{g.out_degree(0), g.out_weight_sum(0)};

  CHECK(AlgorithmSpec::sssp(0).generate(4.0, 2.0, ctx) == 6.0);
  CHECK(AlgorithmSpec::bfs(0).generate(4.0, 2.0, ctx) == 5.0);  // weight ignored
  CHECK(AlgorithmSpec::pagerank().generate(1.0, 2.0, ctx) == doctest::Approx(0.85 / 2));
  CHECK(AlgorithmSpec::php(0).generate(1.0, 2.0, ctx) == doctest::Approx(0.85 * 2.0 / 5.0));
}

TEST_CASE("suppression blocks senders with no forwarding rule") {
  SenderContext dangling{0, 0.0};
  SenderContext normal{2, 5.0};
  AlgorithmSpec pr = AlgorithmSpec::pagerank();
  CHECK(pr.suppressed(1.0, dangling));
  CHECK_FALSE(pr.suppressed(1.0, normal));
  CHECK(pr.suppressed(0.0, normal));  // bottom never travels

  AlgorithmSpec php = AlgorithmSpec::php(0);
  CHECK(php.suppressed(1.0, dangling));
  CHECK_FALSE(php.suppressed(1.0, normal));

  AlgorithmSpec sssp = AlgorithmSpec::sssp(0);
  CHECK(sssp.suppressed(kInf, normal));
  CHECK_FALSE(sssp.suppressed(3.0, dangling));  // min specs ignore the context
}

TEST_CASE("initial states and messages per workload") {
  AlgorithmSpec sssp = AlgorithmSpec::sssp(3);
  CHECK(sssp.initial_state(0) == kInf);
  CHECK(sssp.initial_state(3) == kInf);
  CHECK(sssp.initial_message(3) == 0.0);
  CHECK(sssp.initial_message(1) == kInf);

  AlgorithmSpec pr = AlgorithmSpec::pagerank();
  CHECK(pr.initial_state(5) == 0.0);
  CHECK(pr.initial_message(5) == doctest::Approx(0.15));

  AlgorithmSpec php = AlgorithmSpec::php(2);
  CHECK(php.initial_state(2) == 0.0);
  CHECK(php.initial_message(2) == 1.0);
  CHECK(php.initial_message(4) == 0.0);  // bottom elsewhere
}

TEST_CASE("only the harmonic source absorbs") {
  AlgorithmSpec php = AlgorithmSpec::php(2);
  CHECK(php.absorbs(2));
  CHECK_FALSE(php.absorbs(3));
  CHECK_FALSE(AlgorithmSpec::sssp(2).absorbs(2));
  CHECK_FALSE(AlgorithmSpec::pagerank().absorbs(2));
}

TEST_CASE("convergence kinds and thresholds") {
  CHECK(AlgorithmSpec::sssp(0).convergence() == ConvergenceKind::ExactFixpoint);
  CHECK(AlgorithmSpec::sssp(0).emit_threshold() == 0.0);
  CHECK(AlgorithmSpec::pagerank().convergence() == ConvergenceKind::Threshold);
  CHECK(AlgorithmSpec::pagerank().emit_threshold() == doctest::Approx(1e-6));
  CHECK(AlgorithmSpec::php(0).emit_threshold() == doctest::Approx(1e-6));
}

TEST_CASE("settledness test respects the convergence kind") {
  AlgorithmSpec sssp = AlgorithmSpec::sssp(0);
  CHECK(sssp.converged(2.0, 2.0));
  CHECK_FALSE(sssp.converged(2.0, 2.0 + 1e-9));
  CHECK(sssp.converged(kInf, kInf));
  AlgorithmSpec pr = AlgorithmSpec::pagerank();
  CHECK(pr.converged(2.0, 2.0 + 1e-7));
  CHECK_FALSE(pr.converged(2.0, 2.1));
  CHECK_FALSE(pr.converged(kInf, 2.0));
}
