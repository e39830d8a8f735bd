#pragma once

#include <string>
#include <vector>

#include "layph/partition.hpp"
#include "layph/shortcuts.hpp"

namespace layph {

// Preprocessing output persisted between the preprocess and run commands:
// partition table, proxy table, shortcut tables, plus the source graph's
// vertex/edge counts as a consistency guard. Binary, versioned; a JSON
// sidecar with statistics is written next to it by the CLI.
struct ContainerData {
  size_t vertex_count = 0;
  size_t edge_count = 0;
  Partition partition;
  std::vector<ProxyRecord> proxies;
  ShortcutStore store;
};

void save_container(const std::string& path, const Graph& g, const Partition& p,
                    const std::vector<ProxyRecord>& proxies, const ShortcutStore& store);

// Throws on bad magic, unknown version, or truncation.
ContainerData load_container(const std::string& path);

}  // namespace layph
