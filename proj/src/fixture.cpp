#include "layph/fixture.hpp"

#include <fstream>

namespace layph {

FixtureCase sample_fixture() {
  FixtureCase fc;
  fc.graph = Graph::from_edges(
      {
          {0, 1, 1}, {0, 2, 4}, {0, 3, 1}, {3, 4, 1}, {2, 4, 1},
          {4, 5, 3}, {5, 0, 2}, {5, 6, 1}, {6, 7, 1}, {6, 8, 1},
      },
      true);
  fc.batch.updates = {UnitUpdate::delete_edge(3, 4), UnitUpdate::insert_edge(3, 2, 2.0)};
  fc.partition = Partition::from_membership(fc.graph, {{0, 1, 2, 3, 4}, {5, 6, 7, 8}});
  fc.source = 0;
  fc.sssp_before = {0, 1, 4, 1, 2, 5, 6, 7, 7};
  fc.sssp_after = {0, 1, 3, 1, 4, 7, 8, 9, 9};
  fc.rows_before = {1, 4, 1, 2};
  fc.rows_after = {1, 3, 1, 4};
  return fc;
}

void write_fixture_files(const std::string& dir) {
  FixtureCase fc = sample_fixture();
  {
    std::ofstream f(dir + "/sample.edges");
    if (!f) throw Error("cannot write fixture edges under " + dir);
    for (VertexId u = 0; u < fc.graph.vertex_count(); ++u)
      for (const auto& e : fc.graph.out(u))
        f << fc.graph.external_id(u) << ' ' << fc.graph.external_id(e.to) << ' ' << e.weight
          << '\n';
  }
  fc.batch.save(dir + "/sample.updates");
}

}  // namespace layph
