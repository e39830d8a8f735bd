#pragma once

#include <string>
#include <vector>

#include "layph/graph.hpp"
#include "layph/partition.hpp"

namespace layph {

// Hand-checkable 9-vertex weighted digraph with two dense blocks, one update
// batch, and every converged value worked out on paper. The same case backs
// the unit tests, the acceptance run, and the `verify-fixture` command.
//
//   0->1(1) 0->2(4) 0->3(1) 3->4(1) 2->4(1) 4->5(3) 5->0(2) 5->6(1) 6->7(1) 6->8(1)
//   batch: delete (3,4), add (3,2) weight 2
//   blocks: {0..4} (entry 0, exit 4) and {5..8} (entry 5, exit 5)
struct FixtureCase {
  Graph graph;
  UpdateBatch batch;
  Partition partition;  // subgraph 0 = {0..4}, subgraph 1 = {5..8}
  VertexId source = 0;  // shortest-path source

  std::vector<double> sssp_before;  // converged on graph
  std::vector<double> sssp_after;   // converged on graph + batch

  // entry-0 shortcut values for members 1..4 of subgraph 0
  std::vector<double> rows_before;  // {1, 4, 1, 2}
  std::vector<double> rows_after;   // {1, 3, 1, 4}
};

FixtureCase sample_fixture();

// Writes sample.edges and sample.updates into dir (for the file-format and
// CLI round-trip tests).
void write_fixture_files(const std::string& dir);

}  // namespace layph
