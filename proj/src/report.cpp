#include "layph/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace layph {

std::string states_digest(const std::vector<double>& x) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&](const char* s) {
    for (; *s; ++s) {
      h ^= static_cast<unsigned char>(*s);
      h *= 1099511628211ULL;
    }
  };
  char buf[40];
  for (double v : x) {
    if (std::isinf(v))
      std::snprintf(buf, sizeof buf, v > 0 ? "+inf;" : "-inf;");
    else
      std::snprintf(buf, sizeof buf, "%.9g;", v);
    mix(buf);
  }
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["algorithm"] = r.algorithm;
  j["mode"] = r.mode;
  j["vertex_count"] = r.vertex_count;
  j["edge_count"] = r.edge_count;
  j["batch_size"] = r.batch_size;
  j["phase_times_ms"] = {{"layer_update", r.stats.layer_update.ms},
                         {"upload", r.stats.upload.ms},
                         {"upper_iter", r.stats.upper_iter.ms},
                         {"assign", r.stats.assign.ms}};
  j["activations"] = {{"layer_update", r.stats.layer_update.edge_activations},
                      {"upload", r.stats.upload.edge_activations},
                      {"upper_iter", r.stats.upper_iter.edge_activations},
                      {"assign", r.stats.assign.edge_activations},
                      {"total", r.total_activations}};
  j["vertex_updates"] = r.stats.upload.vertex_updates + r.stats.upper_iter.vertex_updates +
                        r.stats.assign.vertex_updates;
  j["touched_subgraphs"] = r.stats.touched_subgraphs.size();
  j["rebuilt_partition"] = r.stats.rebuilt;
  j["total_ms"] = r.total_ms;
  j["states_digest"] = r.states_digest;
  if (!r.states_path.empty()) j["states_path"] = r.states_path;
  return j.dump(2);
}

void write_report(const RunReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write report: " + path);
  f << report_to_json(r) << '\n';
}

void dump_states(const Graph& g, const std::vector<double>& x, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write states: " + path);
  std::vector<std::pair<ExternalId, double>> rows;
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    if (g.is_live(v)) rows.emplace_back(g.external_id(v), x[v]);
  std::sort(rows.begin(), rows.end());
  char buf[48];
  for (const auto& [id, val] : rows) {
    if (std::isinf(val))
      std::snprintf(buf, sizeof buf, "inf");
    else
      std::snprintf(buf, sizeof buf, "%.12g", val);
    f << id << ' ' << buf << '\n';
  }
}

}  // namespace layph
