#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "layph/container.hpp"
#include "layph/fixture.hpp"
#include "layph/incremental.hpp"
#include "layph/layered.hpp"
#include "layph/report.hpp"
#include "layph/synth.hpp"

using namespace layph;

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

AlgorithmSpec make_spec(const std::string& algo, const Graph& g, uint64_t source_ext) {
  VertexId src = g.internal_id(source_ext);
  if (src == kNoVertex && (algo == "sssp" || algo == "bfs" || algo == "php"))
    throw Error("source vertex " + std::to_string(source_ext) + " not in graph");
  return AlgorithmSpec::by_name(algo, src);
}

std::vector<double> live_states(const Graph& g, const std::vector<double>& x,
                                const AlgorithmSpec& spec) {
  std::vector<double> out(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    out[v] = g.is_live(v) ? x[v] : spec.initial_state(v);
  return out;
}

// max |a-b| over live vertices; inf-vs-finite counts as inf
double state_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
    double x = a[i], y = b[i];
    if (std::isinf(x) && std::isinf(y)) continue;
    if (std::isinf(x) || std::isinf(y)) return kInf;
    worst = std::max(worst, std::abs(x - y));
  }
  return worst;
}

int cmd_preprocess(const std::string& graph_file, const std::string& algo, uint64_t source,
                   uint32_t K, uint32_t repl_threshold, uint64_t seed, const std::string& out,
                   bool unweighted) {
  auto t0 = clock_type::now();
  Graph g = Graph::load_edge_list(graph_file, !unweighted);
  AlgorithmSpec spec = make_spec(algo, g, source);
  uint32_t cap = K ? K : default_subgraph_cap(g.live_count());
  PreprocessResult pre = preprocess_partition(g, cap, repl_threshold, seed);
  LayeredGraph lg = LayeredGraph::build(g, pre.partition, pre.proxies);
  ShortcutStore store;
  uint64_t shortcut_activations = 0;
  compute_shortcuts(lg, spec, store, &shortcut_activations);
  save_container(out, g, lg.partition(), lg.proxies(), store);

  size_t subgraphs = 0;
  for (const auto& sg : lg.partition().subgraphs) subgraphs += !sg.members.empty();
  size_t rows = store.row_count(spec.bottom());
  size_t links = upper_shortcut_links(lg, spec, store);
  nlohmann::json j;
  j["schema_version"] = 1;
  j["vertices"] = g.vertex_count();
  j["edges"] = g.edge_count();
  j["upper_vertices"] = lg.upper_vertex_count();
  j["upper_links"] = lg.upper_edge_count() + links;
  j["subgraphs"] = subgraphs;
  j["shortcut_rows"] = rows;
  j["shortcut_links"] = links;
  j["proxies"] = lg.proxies().size();
  j["degenerate_layering"] = subgraphs == 0;
  j["shortcut_activations"] = shortcut_activations;
  j["elapsed_ms"] = ms_since(t0);
  std::ofstream f(out + ".json");
  if (!f) throw Error("cannot write stats: " + out + ".json");
  f << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_gen_updates(const std::string& graph_file, size_t n_add, size_t n_del, size_t n_vadd,
                    size_t n_vdel, uint64_t seed, uint64_t source, const std::string& out,
                    bool unweighted) {
  Graph g = Graph::load_edge_list(graph_file, !unweighted);
  std::vector<VertexId> protect;
  VertexId src = g.internal_id(source);
  if (src != kNoVertex) protect.push_back(src);
  UpdateBatch batch = gen_update_batch(g, n_add, n_del, n_vadd, n_vdel, seed, protect);
  batch.save(out);
  std::cout << "wrote " << batch.size() << " updates to " << out << '\n';
  return 0;
}

struct RunFlags {
  bool verify = false;
  bool corrupt_shortcuts = false;
  uint32_t K = 0;
  uint32_t repl_threshold = 2;
  uint64_t seed = 1;
  unsigned threads = 1;
  std::string container;
  std::string report_path;
  std::string states_path;
};

// Fault injection for --verify: skew every stored row. Minimizing rows are
// shortened so they bind wherever they are consulted; accumulating rows are
// scaled up.
void corrupt_store(ShortcutStore& store, const AlgorithmSpec& spec) {
  bool minimizing = spec.agg_kind() == AggKind::Min;
  for (int32_t sg = 0; sg < static_cast<int32_t>(store.subgraph_count()); ++sg) {
    std::vector<VertexId> entries;
    for (const auto& [e, t] : store.subgraph_tables(sg)) entries.push_back(e);
    for (VertexId e : entries)
      for (double& a : store.table(sg, e).acc)
        if (!spec.is_bottom(a) && a != 0.0) a = minimizing ? a * 0.5 : a * 1.5;
  }
}

int cmd_run(const std::string& mode, const std::string& graph_file,
            const std::string& update_file, const std::string& algo, uint64_t source,
            const RunFlags& fl, bool unweighted) {
  Graph g = Graph::load_edge_list(graph_file, !unweighted);
  AlgorithmSpec spec = make_spec(algo, g, source);
  UpdateBatch batch;
  if (!update_file.empty()) batch = UpdateBatch::load(update_file);
  RunOptions opt;
  opt.threads = fl.threads;

  RunReport rep;
  rep.algorithm = spec.name();
  rep.mode = mode;
  rep.batch_size = batch.size();

  std::vector<double> states;
  Graph g_final = g.apply(batch);
  auto t0 = clock_type::now();

  if (mode == "restart") {
    RunResult r = run_from_scratch(g_final, spec, opt);
    rep.stats.upper_iter.edge_activations = r.counter.edge_activations;
    rep.stats.upper_iter.vertex_updates = r.counter.vertex_updates;
    rep.total_activations = r.counter.edge_activations;
    states = live_states(g_final, r.states.x, spec);
  } else if (mode == "plain-inc") {
    PlainPipeline p = PlainPipeline::create(std::move(g), spec, opt);
    t0 = clock_type::now();  // the prior converged run is setup, not the batch
    ActivationCounter c = p.apply_batch(batch);
    rep.stats.upper_iter.edge_activations = c.edge_activations;
    rep.stats.upper_iter.vertex_updates = c.vertex_updates;
    rep.total_activations = c.edge_activations;
    states = p.real_states();
  } else if (mode == "layph") {
    RefreshPolicy pol;
    pol.replication_threshold = fl.repl_threshold;
    pol.seed = fl.seed;
    LayeredPipeline p = [&] {
      if (!fl.container.empty()) {
        ContainerData c = load_container(fl.container);
        if (c.vertex_count != g.vertex_count() || c.edge_count != g.edge_count())
          throw Error("container does not match graph (" + fl.container + ")");
        return LayeredPipeline::create_with(std::move(g), spec, std::move(c.partition),
                                            std::move(c.proxies), pol, opt);
      }
      return LayeredPipeline::create(std::move(g), spec, fl.K, pol, opt);
    }();
    if (fl.corrupt_shortcuts) corrupt_store(p.store, spec);
    t0 = clock_type::now();
    WorkflowStats ws = p.apply_batch(batch);
    rep.stats = ws;
    rep.total_activations = ws.total_activations();
    states = p.real_states();
  } else {
    throw Error("unknown mode: " + mode);
  }
  rep.total_ms = ms_since(t0);
  rep.vertex_count = g_final.vertex_count();
  rep.edge_count = g_final.edge_count();
  rep.states_digest = states_digest(states);

  if (!fl.states_path.empty()) {
    dump_states(g_final, states, fl.states_path);
    rep.states_path = fl.states_path;
  }

  int rc = 0;
  if (fl.verify && mode != "restart") {
    RunResult oracle = run_from_scratch(g_final, spec, opt);
    std::vector<double> want = live_states(g_final, oracle.states.x, spec);
    double gap = state_gap(states, want);
    double tol = spec.agg_kind() == AggKind::Min ? 0.0 : 1e-5;
    if (gap > tol) {
      std::cerr << "verify FAILED: max state difference " << gap << " exceeds " << tol << '\n';
      rc = 1;
    } else {
      std::cerr << "verify ok: max state difference " << gap << '\n';
    }
  }

  if (!fl.report_path.empty())
    write_report(rep, fl.report_path);
  else
    std::cout << report_to_json(rep) << '\n';
  return rc;
}

int cmd_bench(const std::string& graph_file, const std::string& algo, uint64_t source,
              std::vector<size_t> batch_sizes, std::vector<std::string> modes, uint32_t K,
              uint64_t seed, const std::string& out, bool unweighted) {
  Graph g0 = Graph::load_edge_list(graph_file, !unweighted);
  AlgorithmSpec spec = make_spec(algo, g0, source);
  std::vector<VertexId> protect;
  if (spec.source() != kNoVertex) protect.push_back(spec.source());

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw Error("cannot write csv: " + out);
    os = &file;
  }
  *os << "mode,algo,batch_size,activations,layer_ms,upload_ms,upper_ms,assign_ms,total_ms\n";

  RunOptions opt;
  for (size_t bi = 0; bi < batch_sizes.size(); ++bi) {
    size_t bs = batch_sizes[bi];
    UpdateBatch batch =
        gen_update_batch(g0, bs - bs / 2, bs / 2, 0, 0, seed + bi, protect);
    for (const std::string& mode : modes) {
      double layer = 0, upload = 0, upper = 0, assign = 0, total = 0;
      uint64_t acts = 0;
      if (mode == "restart") {
        Graph g_new = g0.apply(batch);
        auto t0 = clock_type::now();
        RunResult r = run_from_scratch(g_new, spec, opt);
        total = ms_since(t0);
        upper = total;
        acts = r.counter.edge_activations;
      } else if (mode == "plain-inc") {
        PlainPipeline p = PlainPipeline::create(g0, spec, opt);
        auto t0 = clock_type::now();
        ActivationCounter c = p.apply_batch(batch);
        total = ms_since(t0);
        upper = total;
        acts = c.edge_activations;
      } else if (mode == "layph") {
        RefreshPolicy pol;
        pol.seed = seed;
        LayeredPipeline p = LayeredPipeline::create(g0, spec, K, pol, opt);
        auto t0 = clock_type::now();
        WorkflowStats ws = p.apply_batch(batch);
        total = ms_since(t0);
        layer = ws.layer_update.ms;
        upload = ws.upload.ms;
        upper = ws.upper_iter.ms;
        assign = ws.assign.ms;
        acts = ws.total_activations();
      } else {
        throw Error("unknown mode: " + mode);
      }
      char row[256];
      std::snprintf(row, sizeof row, "%s,%s,%zu,%llu,%.3f,%.3f,%.3f,%.3f,%.3f\n", mode.c_str(),
                    spec.name(), bs, static_cast<unsigned long long>(acts), layer, upload, upper,
                    assign, total);
      *os << row;
    }
  }
  return 0;
}

int cmd_verify_fixture() {
  FixtureCase fc = sample_fixture();
  AlgorithmSpec spec = AlgorithmSpec::sssp(fc.source);
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
    failures += !ok;
  };

  LayeredPipeline p = LayeredPipeline::create_with(fc.graph, spec, fc.partition, {});
  check(p.real_states() == fc.sssp_before, "converged states before batch");

  // resolve through p.lg on every call: apply_batch rebuilds the layering
  auto rows_of = [&](VertexId entry) {
    std::vector<double> rows;
    const auto& sub = p.lg.sub(0);
    const EntryTable* tab = p.store.find(0, entry);
    for (VertexId m = 1; m <= 4 && tab; ++m) rows.push_back(tab->acc[sub.local(m)]);
    return rows;
  };
  check(rows_of(0) == fc.rows_before, "entry-0 shortcut rows before batch");
  check(p.lg.upper_vertex_count() == 3, "upper layer has 3 vertices");
  check(p.lg.upper_edge_count() + upper_shortcut_links(p.lg, spec, p.store) == 3,
        "upper layer has 3 links");

  WorkflowStats ws = p.apply_batch(fc.batch);
  check(rows_of(0) == fc.rows_after, "entry-0 shortcut rows after batch");
  check(p.real_states() == fc.sssp_after, "converged states after batch");
  check(!ws.rebuilt, "partition maintained in place");

  std::cout << (failures ? "FIXTURE FAIL\n" : "FIXTURE OK\n");
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layered incremental graph processing"};
  app.require_subcommand(1);

  std::string graph_file, update_file, out, algo = "sssp", mode = "layph", container;
  uint64_t source = 0, seed = 1;
  uint32_t K = 0, repl_threshold = 2;
  size_t n_add = 5000, n_del = 5000, n_vadd = 0, n_vdel = 0;
  bool unweighted = false;
  RunFlags fl;
  std::vector<size_t> batch_sizes{10, 100, 1000};
  std::vector<std::string> modes{"layph", "plain-inc", "restart"};

  auto* pre = app.add_subcommand("preprocess", "discover subgraphs, write container + stats");
  pre->add_option("graph", graph_file, "edge list file")->required();
  pre->add_option("-o,--out", out, "container path")->required();
  pre->add_option("--algo", algo, "sssp|bfs|pagerank|php");
  pre->add_option("--source", source, "source vertex (external id)");
  pre->add_option("-K,--cap", K, "subgraph size cap (0 = auto)");
  pre->add_option("--replication-threshold", repl_threshold, "proxy threshold");
  pre->add_option("--seed", seed, "discovery seed");
  pre->add_flag("--unweighted", unweighted, "ignore weights");

  auto* gen = app.add_subcommand("gen-updates", "random update batch file");
  gen->add_option("graph", graph_file)->required();
  gen->add_option("-o,--out", out)->required();
  gen->add_option("--add", n_add, "edge insertions");
  gen->add_option("--del", n_del, "edge deletions");
  gen->add_option("--vadd", n_vadd, "vertex insertions");
  gen->add_option("--vdel", n_vdel, "vertex deletions");
  gen->add_option("--seed", seed);
  gen->add_option("--source", source, "vertex never deleted");
  gen->add_flag("--unweighted", unweighted);

  auto* run = app.add_subcommand("run", "apply one batch and report");
  run->add_option("graph", graph_file)->required();
  run->add_option("--mode", mode, "restart|plain-inc|layph");
  run->add_option("-u,--updates", update_file, "update batch file");
  run->add_option("--algo", algo);
  run->add_option("--source", source);
  run->add_option("-K,--cap", fl.K);
  run->add_option("--replication-threshold", fl.repl_threshold);
  run->add_option("--seed", fl.seed);
  run->add_option("--threads", fl.threads);
  run->add_option("--container", fl.container, "layer structure from preprocess");
  run->add_option("--report", fl.report_path, "report JSON path (default stdout)");
  run->add_option("--states", fl.states_path, "dump converged states");
  run->add_flag("--verify", fl.verify, "cross-check against full recomputation");
  run->add_flag("--corrupt-shortcuts", fl.corrupt_shortcuts, "fault injection for --verify");
  run->add_flag("--unweighted", unweighted);

  auto* bench = app.add_subcommand("bench", "sweep batch sizes and modes, emit CSV");
  bench->add_option("graph", graph_file)->required();
  bench->add_option("--algo", algo);
  bench->add_option("--source", source);
  bench->add_option("--batch-sizes", batch_sizes, "sizes to sweep");
  bench->add_option("--modes", modes, "modes to compare");
  bench->add_option("-K,--cap", K);
  bench->add_option("--seed", seed);
  bench->add_option("-o,--out", out, "CSV path (default stdout)");
  bench->add_flag("--unweighted", unweighted);

  app.add_subcommand("verify-fixture", "run the built-in hand-checked case");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed())
      return cmd_preprocess(graph_file, algo, source, K, repl_threshold, seed, out, unweighted);
    if (gen->parsed())
      return cmd_gen_updates(graph_file, n_add, n_del, n_vadd, n_vdel, seed, source, out,
                             unweighted);
    if (run->parsed())
      return cmd_run(mode, graph_file, update_file, algo, source, fl, unweighted);
    if (bench->parsed())
      return cmd_bench(graph_file, algo, source, batch_sizes, modes, K, seed, out, unweighted);
    return cmd_verify_fixture();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
