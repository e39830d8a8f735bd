#include "layph/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace layph {

VertexId VertexIdMap::intern(ExternalId ext) {
  auto [it, inserted] = id_of_.try_emplace(ext, static_cast<VertexId>(ext_of_.size()));
  if (inserted) ext_of_.push_back(ext);
  return it->second;
}

VertexId VertexIdMap::lookup(ExternalId ext) const {
  auto it = id_of_.find(ext);
  return it == id_of_.end() ? kNoVertex : it->second;
}

namespace {

struct LineParser {
  const std::string& path;
  size_t lineno = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(path + ":" + std::to_string(lineno) + ": " + what);
  }
};

// Splits a line into whitespace-separated fields; '#' starts a comment.
size_t split_fields(const std::string& line, std::string_view out[4]) {
  size_t n = 0;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != '#')
      ++j;
    if (n < 4) out[n] = std::string_view(line).substr(i, j - i);
    ++n;
    i = j;
  }
  return n;
}

uint64_t parse_u64(std::string_view s, const LineParser& lp) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) lp.fail("bad vertex id '" + std::string(s) + "'");
  return v;
}

double parse_weight(std::string_view s, const LineParser& lp) {
  // from_chars for double is unreliable pre-gcc11 for all formats; strtod is fine here.
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) lp.fail("bad weight '" + tmp + "'");
  return v;
}

}  // namespace

// Mutable counterpart of Graph used during construction and batch apply.
struct GraphBuilder {
  std::vector<std::vector<Graph::Edge>> out, in;
  std::vector<uint8_t> live;
  VertexIdMap ids;
  size_t edge_count = 0;
  bool weighted = false;

  VertexId touch(ExternalId ext) {
    VertexId v = ids.intern(ext);
    if (v >= out.size()) {
      out.resize(v + 1);
      in.resize(v + 1);
      live.resize(v + 1, 0);
    }
    live[v] = 1;
    return v;
  }

  static bool erase_half(std::vector<Graph::Edge>& adj, VertexId other) {
    for (auto it = adj.begin(); it != adj.end(); ++it) {
      if (it->to == other) {
        adj.erase(it);
        return true;
      }
    }
    return false;
  }

  // Returns false when the edge already existed (weight replaced).
  bool insert_edge(VertexId u, VertexId v, double w) {
    for (auto& e : out[u]) {
      if (e.to == v) {
        e.weight = w;
        for (auto& r : in[v])
          if (r.to == u) r.weight = w;
        return false;
      }
    }
    out[u].push_back({v, w});
    in[v].push_back({u, w});
    ++edge_count;
    return true;
  }

  bool delete_edge(VertexId u, VertexId v) {
    if (!erase_half(out[u], v)) return false;
    erase_half(in[v], u);
    --edge_count;
    return true;
  }

  void delete_vertex(VertexId v) {
    // Remove all incident edges, then mark the slot dead.
    for (const auto& e : out[v]) {
      if (e.to != v) erase_half(in[e.to], v);
      --edge_count;
    }
    out[v].clear();
    for (const auto& e : in[v]) {
      if (e.to != v) erase_half(out[e.to], v);
      --edge_count;
    }
    in[v].clear();
    live[v] = 0;
  }

  Graph freeze() && {
    Graph g;
    g.out_ = std::move(out);
    g.in_ = std::move(in);
    g.live_ = std::move(live);
    g.ids_ = std::move(ids);
    g.edge_count_ = edge_count;
    g.weighted_ = weighted;
    g.live_count_ = 0;
    for (uint8_t l : g.live_) g.live_count_ += l;
    return g;
  }

  static GraphBuilder thaw(const Graph& g) {
    GraphBuilder b;
    b.out = g.out_;
    b.in = g.in_;
    b.live = g.live_;
    b.ids = g.ids_;
    b.edge_count = g.edge_count_;
    b.weighted = g.weighted_;
    return b;
  }
};

Graph Graph::load_edge_list(const std::string& path, bool weighted) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open edge list: " + path);
  GraphBuilder b;
  b.weighted = weighted;
  LineParser lp{path};
  std::string line;
  while (std::getline(f, line)) {
    ++lp.lineno;
    std::string_view fields[4];
    size_t n = split_fields(line, fields);
    if (n == 0) continue;
    if (n < 2) lp.fail("expected 'src dst [weight]'");
    if (n > 3) lp.fail("too many fields");
    if (n == 3 && !weighted) lp.fail("weight given on unweighted load");
    VertexId u = b.touch(parse_u64(fields[0], lp));
    VertexId v = b.touch(parse_u64(fields[1], lp));
    double w = 1.0;
    if (n == 3) {
      w = parse_weight(fields[2], lp);
      if (!(w >= 0)) lp.fail("negative weight");
    }
    b.insert_edge(u, v, w);
  }
  return std::move(b).freeze();
}

Graph Graph::from_edges(const std::vector<std::tuple<ExternalId, ExternalId, double>>& edges,
                        bool weighted) {
  GraphBuilder b;
  b.weighted = weighted;
  for (const auto& [u, v, w] : edges) {
    VertexId iu = b.touch(u);
    VertexId iv = b.touch(v);
    b.insert_edge(iu, iv, weighted ? w : 1.0);
  }
  return std::move(b).freeze();
}

Graph Graph::apply(const UpdateBatch& batch) const {
  GraphBuilder b = GraphBuilder::thaw(*this);
  size_t idx = 0;
  for (const auto& up : batch.updates) {
    switch (up.kind) {
      case UnitUpdate::InsertEdge: {
        VertexId u = b.touch(up.u);
        VertexId v = b.touch(up.v);
        b.insert_edge(u, v, b.weighted ? up.w : 1.0);
        break;
      }
      case UnitUpdate::DeleteEdge: {
        VertexId u = b.ids.lookup(up.u);
        VertexId v = b.ids.lookup(up.v);
        if (u == kNoVertex || v == kNoVertex || !b.delete_edge(u, v))
          throw Error("update " + std::to_string(idx) + ": delete of absent edge (" +
                      std::to_string(up.u) + "," + std::to_string(up.v) + ")");
        break;
      }
      case UnitUpdate::InsertVertex:
        b.touch(up.u);
        break;
      case UnitUpdate::DeleteVertex: {
        VertexId v = b.ids.lookup(up.u);
        if (v == kNoVertex || !b.live[v])
          throw Error("update " + std::to_string(idx) + ": delete of absent vertex " +
                      std::to_string(up.u));
        b.delete_vertex(v);
        break;
      }
    }
    ++idx;
  }
  return std::move(b).freeze();
}

double Graph::out_weight_sum(VertexId v) const {
  double s = 0;
  for (const auto& e : out_[v]) s += e.weight;
  return s;
}

double Graph::edge_weight(VertexId u, VertexId v) const {
  for (const auto& e : out_[u])
    if (e.to == v) return e.weight;
  return kInf;
}

UpdateBatch UpdateBatch::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open update file: " + path);
  UpdateBatch batch;
  LineParser lp{path};
  std::string line;
  while (std::getline(f, line)) {
    ++lp.lineno;
    std::string_view fields[4];
    size_t n = split_fields(line, fields);
    if (n == 0) continue;
    std::string_view op = fields[0];
    if (op == "a") {
      if (n != 3 && n != 4) lp.fail("expected 'a u v [w]'");
      double w = n == 4 ? parse_weight(fields[3], lp) : 1.0;
      batch.updates.push_back(
          UnitUpdate::insert_edge(parse_u64(fields[1], lp), parse_u64(fields[2], lp), w));
    } else if (op == "d") {
      if (n != 3) lp.fail("expected 'd u v'");
      batch.updates.push_back(
          UnitUpdate::delete_edge(parse_u64(fields[1], lp), parse_u64(fields[2], lp)));
    } else if (op == "av") {
      if (n != 2) lp.fail("expected 'av v'");
      batch.updates.push_back(UnitUpdate::insert_vertex(parse_u64(fields[1], lp)));
    } else if (op == "dv") {
      if (n != 2) lp.fail("expected 'dv v'");
      batch.updates.push_back(UnitUpdate::delete_vertex(parse_u64(fields[1], lp)));
    } else {
      lp.fail("unknown op '" + std::string(op) + "'");
    }
  }
  return batch;
}

void UpdateBatch::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error("cannot write update file: " + path);
  for (const auto& up : updates) {
    switch (up.kind) {
      case UnitUpdate::InsertEdge:
        f << "a " << up.u << ' ' << up.v << ' ' << up.w << '\n';
        break;
      case UnitUpdate::DeleteEdge:
        f << "d " << up.u << ' ' << up.v << '\n';
        break;
      case UnitUpdate::InsertVertex:
        f << "av " << up.u << '\n';
        break;
      case UnitUpdate::DeleteVertex:
        f << "dv " << up.u << '\n';
        break;
    }
  }
}

std::vector<VertexId> diff_summary(const Graph& before, const Graph& after,
                                   const UpdateBatch& batch) {
  std::unordered_set<VertexId> touched;
  auto touch_ext = [&](ExternalId ext) {
    VertexId v = after.internal_id(ext);
    if (v != kNoVertex) touched.insert(v);
  };
  for (const auto& up : batch.updates) {
    switch (up.kind) {
      case UnitUpdate::InsertEdge:
      case UnitUpdate::DeleteEdge:
        touch_ext(up.u);
        touch_ext(up.v);
        break;
      case UnitUpdate::InsertVertex:
        touch_ext(up.u);
        break;
      case UnitUpdate::DeleteVertex: {
        touch_ext(up.u);
        VertexId v = before.internal_id(up.u);
        if (v == kNoVertex) break;
        for (const auto& e : before.out(v)) touched.insert(e.to);
        for (const auto& e : before.in(v)) touched.insert(e.to);
        break;
      }
    }
  }
  std::vector<VertexId> result(touched.begin(), touched.end());
  std::sort(result.begin(), result.end());
  return result;
}

NetDiff net_diff(const Graph& before, const Graph& after, const UpdateBatch& batch) {
  NetDiff d;
  // Candidate endpoints are bounded by the batch, so comparisons stay local.
  std::unordered_set<VertexId> sources;
  std::unordered_set<VertexId> vertices;
  auto note = [&](ExternalId ext) {
    VertexId v = after.internal_id(ext);
    if (v != kNoVertex) vertices.insert(v);
    return v;
  };
  for (const auto& up : batch.updates) {
    switch (up.kind) {
      case UnitUpdate::InsertEdge:
      case UnitUpdate::DeleteEdge: {
        VertexId u = note(up.u);
        note(up.v);
        if (u != kNoVertex) sources.insert(u);
        break;
      }
      case UnitUpdate::InsertVertex:
        note(up.u);
        break;
      case UnitUpdate::DeleteVertex: {
        VertexId v = note(up.u);
        if (v != kNoVertex && v < before.vertex_count()) {
          for (const auto& e : before.in(v)) sources.insert(e.to);
          for (const auto& e : before.out(v)) vertices.insert(e.to);
        }
        if (v != kNoVertex) sources.insert(v);
        break;
      }
    }
  }
  for (VertexId u : sources) {
    bool in_before = u < before.vertex_count();
    if (in_before) {
      for (const auto& e : before.out(u)) {
        double neww = after.is_live(u) && after.is_live(e.to) ? after.edge_weight(u, e.to) : kInf;
        if (neww == kInf)
          d.deleted.push_back({u, e.to, e.weight});
        else if (neww != e.weight)
          d.reweighted.push_back({{u, e.to, neww}, e.weight});
      }
    }
    if (after.is_live(u)) {
      for (const auto& e : after.out(u)) {
        double oldw = in_before && before.is_live(u) && e.to < before.vertex_count() &&
                              before.is_live(e.to)
                          ? before.edge_weight(u, e.to)
                          : kInf;
        if (oldw == kInf) d.inserted.push_back({u, e.to, e.weight});
      }
    }
  }
  for (VertexId v : vertices) {
    bool live_before = v < before.vertex_count() && before.is_live(v);
    bool live_after = after.is_live(v);
    if (live_before && !live_after) d.vertices_removed.push_back(v);
    if (!live_before && live_after) d.vertices_added.push_back(v);
  }
  auto by_pair = [](const NetDiff::EdgeDelta& a, const NetDiff::EdgeDelta& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  };
  std::sort(d.inserted.begin(), d.inserted.end(), by_pair);
  std::sort(d.deleted.begin(), d.deleted.end(), by_pair);
  std::sort(d.reweighted.begin(), d.reweighted.end(),
            [&](const auto& a, const auto& b) { return by_pair(a.first, b.first); });
  std::sort(d.vertices_added.begin(), d.vertices_added.end());
  std::sort(d.vertices_removed.begin(), d.vertices_removed.end());
  return d;
}

}  // namespace layph
