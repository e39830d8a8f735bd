#include "layph/container.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace layph {

namespace {

constexpr char kMagic[8] = {'L', 'Y', 'P', 'H', 'C', 'N', 'T', '\0'};
constexpr uint32_t kVersion = 1;

struct Writer {
  std::ofstream f;
  explicit Writer(const std::string& path) : f(path, std::ios::binary) {
    if (!f) throw Error("cannot write container: " + path);
  }
  void bytes(const void* p, size_t n) { f.write(static_cast<const char*>(p), n); }
  void u32(uint32_t v) { bytes(&v, 4); }
  void u64(uint64_t v) { bytes(&v, 8); }
  void i32(int32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  template <class T>
  void vec(const std::vector<T>& v) {
    u64(v.size());
    if (!v.empty()) bytes(v.data(), v.size() * sizeof(T));
  }
};

struct Reader {
  std::ifstream f;
  std::string path;
  explicit Reader(const std::string& p) : f(p, std::ios::binary), path(p) {
    if (!f) throw Error("cannot open container: " + p);
  }
  void bytes(void* p, size_t n) {
    f.read(static_cast<char*>(p), n);
    if (f.gcount() != static_cast<std::streamsize>(n))
      throw Error("truncated container: " + path);
  }
  uint32_t u32() {
    uint32_t v;
    bytes(&v, 4);
    return v;
  }
  uint64_t u64() {
    uint64_t v;
    bytes(&v, 8);
    return v;
  }
  int32_t i32() {
    int32_t v;
    bytes(&v, 4);
    return v;
  }
  template <class T>
  std::vector<T> vec(uint64_t sanity_cap) {
    uint64_t n = u64();
    if (n > sanity_cap) throw Error("corrupt container (size field): " + path);
    std::vector<T> v(n);
    if (n) bytes(v.data(), n * sizeof(T));
    return v;
  }
};

constexpr uint64_t kSanity = 1ull << 33;

}  // namespace

void save_container(const std::string& path, const Graph& g, const Partition& p,
                    const std::vector<ProxyRecord>& proxies, const ShortcutStore& store) {
  Writer w(path);
  w.bytes(kMagic, 8);
  w.u32(kVersion);
  w.u64(g.vertex_count());
  w.u64(g.edge_count());

  w.vec(p.subgraph_of);
  w.u64(p.subgraphs.size());
  for (const auto& sg : p.subgraphs) w.vec(sg.members);
  w.u32(p.cap);

  w.u64(proxies.size());
  for (const auto& r : proxies) {
    w.u32(r.host);
    w.u32(r.proxy);
    w.i32(r.subgraph);
    w.u32(static_cast<uint32_t>(r.direction));
    w.vec(r.targets);
  }

  w.u64(store.subgraph_count());
  for (int32_t sg = 0; sg < static_cast<int32_t>(store.subgraph_count()); ++sg) {
    const auto& tables = store.subgraph_tables(sg);
    std::vector<VertexId> entries;
    entries.reserve(tables.size());
    for (const auto& [entry, tab] : tables) entries.push_back(entry);
    std::sort(entries.begin(), entries.end());  // reproducible bytes
    w.u64(entries.size());
    for (VertexId entry : entries) {
      const EntryTable& tab = tables.at(entry);
      w.u32(entry);
      w.vec(tab.acc);
      w.vec(tab.parent);
    }
  }
}

ContainerData load_container(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw Error("not a layph container: " + path);
  uint32_t ver = r.u32();
  if (ver != kVersion)
    throw Error("unsupported container version " + std::to_string(ver) + ": " + path);

  ContainerData c;
  c.vertex_count = r.u64();
  c.edge_count = r.u64();

  c.partition.subgraph_of = r.vec<int32_t>(kSanity);
  uint64_t nsg = r.u64();
  if (nsg > kSanity) throw Error("corrupt container (subgraph count): " + path);
  c.partition.subgraphs.resize(nsg);
  for (auto& sg : c.partition.subgraphs) sg.members = r.vec<VertexId>(kSanity);
  c.partition.cap = r.u32();

  uint64_t np = r.u64();
  if (np > kSanity) throw Error("corrupt container (proxy count): " + path);
  c.proxies.resize(np);
  for (auto& rec : c.proxies) {
    rec.host = r.u32();
    rec.proxy = r.u32();
    rec.subgraph = r.i32();
    rec.direction = static_cast<ProxyRecord::Direction>(r.u32());
    rec.targets = r.vec<VertexId>(kSanity);
  }

  uint64_t store_sgs = r.u64();
  if (store_sgs > kSanity) throw Error("corrupt container (table count): " + path);
  c.store.reset(store_sgs);
  for (int32_t sg = 0; sg < static_cast<int32_t>(store_sgs); ++sg) {
    uint64_t nt = r.u64();
    if (nt > kSanity) throw Error("corrupt container (entry count): " + path);
    for (uint64_t i = 0; i < nt; ++i) {
      VertexId entry = r.u32();
      EntryTable& tab = c.store.table(sg, entry);
      tab.acc = r.vec<double>(kSanity);
      tab.parent = r.vec<uint32_t>(kSanity);
    }
  }
  return c;
}

}  // namespace layph
