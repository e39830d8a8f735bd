#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "layph/container.hpp"
#include "layph/fixture.hpp"
#include "layph/incremental.hpp"
#include "layph/report.hpp"
#include "layph/synth.hpp"

using namespace layph;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/layph_io_") + name + "_" + std::to_string(getpid());
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Cmd {
  int exit_code;
  std::string out;
};

Cmd run_cli(const std::string& args) {
  std::string cmd = std::string(LAYPH_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("container round trip preserves the layer structure") {
  Graph g = make_planted_partition(4, 20, 7.0, 0.5, true, 3);
  PreprocessResult pre = preprocess_partition(g, 32, 2, 1);
  LayeredGraph lg = LayeredGraph::build(g, pre.partition, pre.proxies);
  AlgorithmSpec spec = AlgorithmSpec::sssp(0);
  ShortcutStore store;
  compute_shortcuts(lg, spec, store);

  std::string path = temp_path("container");
  save_container(path, g, lg.partition(), lg.proxies(), store);
  ContainerData c = load_container(path);

  CHECK(c.vertex_count == g.vertex_count());
  CHECK(c.edge_count == g.edge_count());
  CHECK(c.partition.subgraph_of == lg.partition().subgraph_of);
  CHECK(c.partition.cap == lg.partition().cap);
  REQUIRE(c.partition.subgraphs.size() == lg.partition().subgraphs.size());
  for (size_t sg = 0; sg < c.partition.subgraphs.size(); ++sg)
    CHECK(c.partition.subgraphs[sg].members == lg.partition().subgraphs[sg].members);

  REQUIRE(c.proxies.size() == lg.proxies().size());
  for (size_t i = 0; i < c.proxies.size(); ++i) {
    CHECK(c.proxies[i].host == lg.proxies()[i].host);
    CHECK(c.proxies[i].proxy == lg.proxies()[i].proxy);
    CHECK(c.proxies[i].subgraph == lg.proxies()[i].subgraph);
    CHECK(c.proxies[i].direction == lg.proxies()[i].direction);
    CHECK(c.proxies[i].targets == lg.proxies()[i].targets);
  }

  REQUIRE(c.store.subgraph_count() == store.subgraph_count());
  CHECK(c.store.row_count(spec.bottom()) == store.row_count(spec.bottom()));
  for (int32_t sg = 0; sg < static_cast<int32_t>(store.subgraph_count()); ++sg)
    for (const auto& [entry, tab] : store.subgraph_tables(sg)) {
      const EntryTable* got = c.store.find(sg, entry);
      REQUIRE(got != nullptr);
      CHECK(got->acc == tab.acc);
      CHECK(got->parent == tab.parent);
    }
  std::remove(path.c_str());
}

TEST_CASE("container loading rejects corruption") {
  Graph g = make_random_graph(20, 60, true, 5);
  Partition p = Partition::from_membership(g, {});
  ShortcutStore store;
  store.reset(0);
  std::string path = temp_path("corrupt");
  save_container(path, g, p, {}, store);

  std::string full = slurp(path);

  {  // bad magic
    std::ofstream f(path, std::ios::binary);
    std::string bad = full;
    bad[0] = 'X';
    f.write(bad.data(), bad.size());
  }
  CHECK_THROWS_AS(load_container(path), Error);

  {  // truncation
    std::ofstream f(path, std::ios::binary);
    f.write(full.data(), full.size() / 2);
  }
  CHECK_THROWS_AS(load_container(path), Error);

  CHECK_THROWS_AS(load_container("/nonexistent/nope"), Error);
  std::remove(path.c_str());
}

TEST_CASE("state digests are stable and order sensitive") {
  std::vector<double> a = {0.0, 1.5, kInf, -2.25};
  std::vector<double> b = {1.5, 0.0, kInf, -2.25};
  std::string da = states_digest(a);
  CHECK(da.size() == 16);
  CHECK(da == states_digest(a));
  CHECK(da != states_digest(b));

  // sub-epsilon noise does not change the digest
  std::vector<double> c = a;
  c[1] += 1e-13;
  CHECK(states_digest(c) == da);
}

TEST_CASE("report serialization carries the full schema") {
  RunReport r;
  r.algorithm = "sssp";
  r.mode = "layph";
  r.vertex_count = 9;
  r.edge_count = 10;
  r.batch_size = 2;
  r.stats.upload.ms = 1.5;
  r.stats.upload.edge_activations = 7;
  r.total_activations = 7;
  r.total_ms = 3.25;
  r.states_digest = "0123456789abcdef";

  nlohmann::json j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["schema_version"] == 1);
  CHECK(j["algorithm"] == "sssp");
  CHECK(j["mode"] == "layph");
  CHECK(j["vertex_count"] == 9);
  CHECK(j["edge_count"] == 10);
  CHECK(j["batch_size"] == 2);
  CHECK(j["phase_times_ms"]["upload"] == 1.5);
  CHECK(j["phase_times_ms"].contains("layer_update"));
  CHECK(j["phase_times_ms"].contains("upper_iter"));
  CHECK(j["phase_times_ms"].contains("assign"));
  CHECK(j["activations"]["upload"] == 7);
  CHECK(j["activations"]["total"] == 7);
  CHECK(j["states_digest"] == "0123456789abcdef");

  std::string path = temp_path("report");
  write_report(r, path);
  nlohmann::json k = nlohmann::json::parse(slurp(path));
  CHECK(k == j);
  std::remove(path.c_str());
}

TEST_CASE("state dumps list live vertices by external id") {
  Graph g = Graph::from_edges({{5, 3, 1.0}, {3, 9, 2.0}}, true);
  std::vector<double> x = {1.0, 2.0, kInf};
  std::string path = temp_path("states");
  dump_states(g, x, path);
  std::ifstream f(path);
  ExternalId id;
  std::string val;
  REQUIRE(static_cast<bool>(f >> id >> val));
  CHECK(id == 3);
  f >> id >> val;
  CHECK(id == 5);
  CHECK(val == "1");
  f >> id >> val;
  CHECK(id == 9);
  CHECK(val == "inf");
  std::remove(path.c_str());
}

TEST_CASE("checked-in sample data matches the built-in case") {
  FixtureCase fc = sample_fixture();
  Graph g = Graph::load_edge_list(std::string(LAYPH_DATA_DIR) + "/sample.edges", true);
  REQUIRE(g.vertex_count() == fc.graph.vertex_count());
  REQUIRE(g.edge_count() == fc.graph.edge_count());
  for (VertexId u = 0; u < g.vertex_count(); ++u)
    for (const auto& e : g.out(u))
      CHECK(fc.graph.edge_weight(fc.graph.internal_id(g.external_id(u)),
                                 fc.graph.internal_id(g.external_id(e.to))) == e.weight);

  UpdateBatch batch = UpdateBatch::load(std::string(LAYPH_DATA_DIR) + "/sample.updates");
  REQUIRE(batch.size() == fc.batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    CHECK(batch.updates[i].kind == fc.batch.updates[i].kind);
    CHECK(batch.updates[i].u == fc.batch.updates[i].u);
    CHECK(batch.updates[i].v == fc.batch.updates[i].v);
  }
}

TEST_CASE("cli: fixture verification passes") {
  Cmd c = run_cli("verify-fixture");
  CHECK(c.exit_code == 0);
  CHECK(c.out.find("FIXTURE OK") != std::string::npos);
}

TEST_CASE("cli: preprocess then run from the container") {
  std::string edges = std::string(LAYPH_DATA_DIR) + "/sample.edges";
  std::string container = temp_path("cnt");
  Cmd pre = run_cli("preprocess " + edges + " -o " + container + " --algo sssp --source 0");
  CHECK(pre.exit_code == 0);
  nlohmann::json stats = nlohmann::json::parse(slurp(container + ".json"));
  CHECK(stats["vertices"] == 9);
  CHECK(stats["edges"] == 10);
  CHECK(stats.contains("subgraphs"));
  CHECK(stats.contains("shortcut_rows"));
  CHECK(stats.contains("upper_vertices"));
  CHECK(stats.contains("upper_links"));
  CHECK(stats.contains("proxies"));
  CHECK(stats.contains("elapsed_ms"));

  std::string updates = std::string(LAYPH_DATA_DIR) + "/sample.updates";
  std::string report = temp_path("rep");
  Cmd run = run_cli("run " + edges + " --mode layph -u " + updates +
                    " --algo sssp --source 0 --container " + container + " --verify --report " +
                    report);
  CHECK(run.exit_code == 0);
  nlohmann::json rep = nlohmann::json::parse(slurp(report));
  CHECK(rep["mode"] == "layph");
  CHECK(rep["batch_size"] == 2);

  std::remove(container.c_str());
  std::remove((container + ".json").c_str());
  std::remove(report.c_str());
}

TEST_CASE("cli: all modes agree on the sample digest") {
  std::string edges = std::string(LAYPH_DATA_DIR) + "/sample.edges";
  std::string updates = std::string(LAYPH_DATA_DIR) + "/sample.updates";
  std::string digest;
  for (const char* mode : {"restart", "plain-inc", "layph"}) {
    std::string report = temp_path("modes");
    Cmd c = run_cli("run " + edges + " --mode " + mode + " -u " + updates +
                    " --algo sssp --source 0 --verify --report " + report);
    CHECK(c.exit_code == 0);
    nlohmann::json rep = nlohmann::json::parse(slurp(report));
    std::string d = rep["states_digest"];
    if (digest.empty())
      digest = d;
    else
      CHECK(d == digest);
    std::remove(report.c_str());
  }
}

TEST_CASE("cli: corrupted shortcuts make verification fail") {
  // a planted graph guarantees dense blocks, so shortcut rows really carry
  // the answer; light edges from the source into far blocks (every original
  // weight is >= 1) force improving waves through blocks the batch never
  // touches, so their corrupted tables are consulted rather than recomputed
  Graph g = make_planted_partition(8, 20, 8.0, 0.2, true, 17);
  std::string edges = temp_path("planted");
  {
    std::ofstream f(edges);
    for (VertexId u = 0; u < g.vertex_count(); ++u)
      for (const auto& e : g.out(u))
        f << g.external_id(u) << ' ' << g.external_id(e.to) << ' ' << e.weight << '\n';
  }
  UpdateBatch batch;
  for (ExternalId t : {25, 45, 70, 90, 115, 130, 150})
    batch.updates.push_back(UnitUpdate::insert_edge(0, t, 0.5));
  std::string updates = temp_path("planted_upd");
  batch.save(updates);

  Cmd ok = run_cli("run " + edges + " --mode layph -u " + updates +
                   " --algo sssp --source 0 -K 24 --verify");
  CHECK(ok.exit_code == 0);

  Cmd c = run_cli("run " + edges + " --mode layph -u " + updates +
                  " --algo sssp --source 0 -K 24 --corrupt-shortcuts --verify");
  CHECK(c.exit_code != 0);
  CHECK(c.out.find("verify FAILED") != std::string::npos);
  std::remove(edges.c_str());
  std::remove(updates.c_str());
}

TEST_CASE("cli: generated update batches are deterministic and loadable") {
  std::string edges = std::string(LAYPH_DATA_DIR) + "/sample.edges";
  std::string u1 = temp_path("gen1"), u2 = temp_path("gen2");
  Cmd a = run_cli("gen-updates " + edges + " -o " + u1 + " --add 3 --del 3 --seed 12");
  Cmd b = run_cli("gen-updates " + edges + " -o " + u2 + " --add 3 --del 3 --seed 12");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(slurp(u1) == slurp(u2));
  UpdateBatch batch = UpdateBatch::load(u1);
  CHECK(batch.size() == 6);
  std::remove(u1.c_str());
  std::remove(u2.c_str());
}

TEST_CASE("cli: bench emits one csv row per mode and batch size") {
  std::string edges = std::string(LAYPH_DATA_DIR) + "/sample.edges";
  Cmd c = run_cli("bench " + edges + " --algo sssp --source 0 --batch-sizes 2 --modes layph restart");
  CHECK(c.exit_code == 0);
  CHECK(c.out.find("mode,algo,batch_size") != std::string::npos);
  CHECK(c.out.find("layph,sssp,2,") != std::string::npos);
  CHECK(c.out.find("restart,sssp,2,") != std::string::npos);
}
