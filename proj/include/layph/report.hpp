#pragma once

#include <string>
#include <vector>

#include "layph/incremental.hpp"

namespace layph {

// Schema-stable run summary; serialized as JSON with a version marker so
// downstream tooling can rely on the field set.
struct RunReport {
  std::string algorithm;
  std::string mode;  // restart | plain-inc | layph
  size_t vertex_count = 0;
  size_t edge_count = 0;
  size_t batch_size = 0;
  WorkflowStats stats;          // restart / plain-inc fill only upper_iter
  uint64_t total_activations = 0;
  double total_ms = 0;
  std::string states_digest;
  std::string states_path;  // empty unless a dump was written
};

// Order-sensitive digest of a state vector, stable across platforms: values
// are rounded to 9 significant digits before hashing so the incremental and
// restart paths agree despite sub-epsilon float noise.
std::string states_digest(const std::vector<double>& x);

std::string report_to_json(const RunReport& r);
void write_report(const RunReport& r, const std::string& path);

// One "external_id value" line per live vertex, id-sorted.
void dump_states(const Graph& g, const std::vector<double>& x, const std::string& path);

}  // namespace layph
