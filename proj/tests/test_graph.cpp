#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include "doctest.h"
#include "layph/graph.hpp"

using namespace layph;

namespace {

Graph tiny() {
  return Graph::from_edges({{0, 1, 1.0}, {0, 2, 4.0}, {1, 2, 2.0}, {2, 3, 1.0}}, true);
}

std::set<std::tuple<ExternalId, ExternalId, double>> edge_set(const Graph& g) {
  std::set<std::tuple<ExternalId, ExternalId, double>> s;
  for (VertexId u = 0; u < g.vertex_count(); ++u)
    for (const auto& e : g.out(u)) s.emplace(g.external_id(u), g.external_id(e.to), e.weight);
  return s;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/layph_test_") + name + "_" + std::to_string(getpid());
}

}  // namespace

TEST_CASE("edge list loading") {
  std::string path = temp_path("edges");
  {
    std::ofstream f(path);
    f << "# comment\n0 1 1.5\n\n1 2 2\n2 0 0.5\n";
  }
  Graph g = Graph::load_edge_list(path, true);
  CHECK(g.vertex_count() == 3);
  CHECK(g.edge_count() == 3);
  CHECK(g.edge_weight(g.internal_id(0), g.internal_id(1)) == 1.5);

  // a weight column under an unweighted load is a format error
  CHECK_THROWS_AS(Graph::load_edge_list(path, false), Error);
  std::remove(path.c_str());
}

TEST_CASE("edge list loader rejects malformed lines") {
  std::string path = temp_path("bad_edges");
  {
    std::ofstream f(path);
    f << "0 1 x\n";
  }
  CHECK_THROWS_AS(Graph::load_edge_list(path, true), Error);
  {
    std::ofstream f(path);
    f << "0\n";
  }
  CHECK_THROWS_AS(Graph::load_edge_list(path, true), Error);
  std::remove(path.c_str());
}

TEST_CASE("from_edges maps external ids in first-seen order") {
  Graph g = Graph::from_edges({{10, 20, 1.0}, {20, 30, 1.0}}, true);
  CHECK(g.vertex_count() == 3);
  CHECK(g.external_id(g.internal_id(10)) == 10);
  CHECK(g.internal_id(99) == kNoVertex);
  CHECK(g.has_edge(g.internal_id(10), g.internal_id(20)));
  CHECK_FALSE(g.has_edge(g.internal_id(20), g.internal_id(10)));
}

TEST_CASE("apply edge updates") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {UnitUpdate::delete_edge(0, 2), UnitUpdate::insert_edge(3, 0, 5.0)};
  Graph h = g.apply(b);
  CHECK(h.edge_count() == 4);
  CHECK_FALSE(h.has_edge(h.internal_id(0), h.internal_id(2)));
  CHECK(h.edge_weight(h.internal_id(3), h.internal_id(0)) == 5.0);
  // the source graph is untouched
  CHECK(g.edge_count() == 4);
  CHECK(g.has_edge(g.internal_id(0), g.internal_id(2)));
}

TEST_CASE("inserting an existing edge replaces its weight") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {UnitUpdate::insert_edge(0, 1, 9.0)};
  Graph h = g.apply(b);
  CHECK(h.edge_count() == g.edge_count());
  CHECK(h.edge_weight(h.internal_id(0), h.internal_id(1)) == 9.0);
}

TEST_CASE("apply rejects deleting absent edges and vertices") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {UnitUpdate::delete_edge(1, 0)};
  CHECK_THROWS_AS(g.apply(b), Error);
  b.updates = {UnitUpdate::delete_vertex(7)};
  CHECK_THROWS_AS(g.apply(b), Error);
}

TEST_CASE("vertex deletion clears incident edges, ids stay stable") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {UnitUpdate::delete_vertex(2)};
  Graph h = g.apply(b);
  CHECK(h.vertex_count() == g.vertex_count());  // slot kept
  CHECK(h.live_count() == 3);
  CHECK(h.edge_count() == 1);  // only 0->1 survives
  VertexId dead = h.internal_id(2);
  CHECK_FALSE(h.is_live(dead));
  CHECK(h.out(dead).empty());
  CHECK(h.in(dead).empty());
}

TEST_CASE("revived vertex keeps its internal id") {
  Graph g = tiny();
  UpdateBatch kill;
  kill.updates = {UnitUpdate::delete_vertex(3)};
  Graph h = g.apply(kill);
  UpdateBatch revive;
  revive.updates = {UnitUpdate::insert_edge(3, 1, 2.0)};
  Graph k = h.apply(revive);
  CHECK(k.internal_id(3) == g.internal_id(3));
  CHECK(k.is_live(k.internal_id(3)));
  CHECK(k.edge_weight(k.internal_id(3), k.internal_id(1)) == 2.0);
}

TEST_CASE("update batch save/load round trip") {
  UpdateBatch b;
  b.updates = {UnitUpdate::insert_edge(1, 2, 3.5), UnitUpdate::delete_edge(0, 1),
               UnitUpdate::insert_vertex(9), UnitUpdate::delete_vertex(4)};
  std::string path = temp_path("batch");
  b.save(path);
  UpdateBatch c = UpdateBatch::load(path);
  REQUIRE(c.size() == b.size());
  for (size_t i = 0; i < b.size(); ++i) {
    CHECK(c.updates[i].kind == b.updates[i].kind);
    CHECK(c.updates[i].u == b.updates[i].u);
    CHECK(c.updates[i].v == b.updates[i].v);
    CHECK(c.updates[i].w == b.updates[i].w);
  }
  std::remove(path.c_str());
}

TEST_CASE("net_diff classifies edge changes") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {
      UnitUpdate::delete_edge(0, 2),        // plain delete
      UnitUpdate::insert_edge(0, 1, 7.0),   // reweight of existing edge
      UnitUpdate::insert_edge(3, 0, 2.0),   // plain insert
      UnitUpdate::insert_edge(2, 0, 1.0),   // insert then delete: cancels
      UnitUpdate::delete_edge(2, 0),
  };
  Graph h = g.apply(b);
  NetDiff d = net_diff(g, h, b);
  REQUIRE(d.deleted.size() == 1);
  CHECK(g.external_id(d.deleted[0].u) == 0);
  CHECK(g.external_id(d.deleted[0].v) == 2);
  CHECK(d.deleted[0].w == 4.0);  // old weight preserved
  REQUIRE(d.inserted.size() == 1);
  CHECK(h.external_id(d.inserted[0].u) == 3);
  CHECK(d.inserted[0].w == 2.0);
  REQUIRE(d.reweighted.size() == 1);
  CHECK(d.reweighted[0].first.w == 7.0);
  CHECK(d.reweighted[0].second == 1.0);
  CHECK(d.vertices_added.empty());
  CHECK(d.vertices_removed.empty());
}

TEST_CASE("net_diff tracks vertex liveness, revives included") {
  Graph g = tiny();
  UpdateBatch b1;
  b1.updates = {UnitUpdate::delete_vertex(3), UnitUpdate::insert_vertex(8)};
  Graph h = g.apply(b1);
  NetDiff d1 = net_diff(g, h, b1);
  REQUIRE(d1.vertices_removed.size() == 1);
  CHECK(g.external_id(d1.vertices_removed[0]) == 3);
  REQUIRE(d1.vertices_added.size() == 1);
  CHECK(h.external_id(d1.vertices_added[0]) == 8);

  UpdateBatch b2;
  b2.updates = {UnitUpdate::insert_edge(3, 1, 1.0)};  // revives 3
  Graph k = h.apply(b2);
  NetDiff d2 = net_diff(h, k, b2);
  REQUIRE(d2.vertices_added.size() == 1);
  CHECK(k.external_id(d2.vertices_added[0]) == 3);
  REQUIRE(d2.inserted.size() == 1);
}

TEST_CASE("net_diff of delete+reinsert at the same weight is empty") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {UnitUpdate::delete_edge(0, 1), UnitUpdate::insert_edge(0, 1, 1.0)};
  Graph h = g.apply(b);
  NetDiff d = net_diff(g, h, b);
  CHECK(d.empty());
}

TEST_CASE("edge multiset survives an apply round trip") {
  Graph g = tiny();
  UpdateBatch b;
  b.updates = {UnitUpdate::delete_edge(1, 2), UnitUpdate::insert_edge(1, 2, 2.0)};
  Graph h = g.apply(b);
  CHECK(edge_set(h) == edge_set(g));
}

TEST_CASE("out_weight_sum and degree reflect live adjacency") {
  Graph g = tiny();
  CHECK(g.out_weight_sum(g.internal_id(0)) == 5.0);
  CHECK(g.out_degree(g.internal_id(0)) == 2);
  UpdateBatch b;
  b.updates = {UnitUpdate::delete_vertex(2)};
  Graph h = g.apply(b);
  CHECK(h.out_weight_sum(h.internal_id(0)) == 1.0);
  CHECK(h.out_degree(h.internal_id(0)) == 1);
}
