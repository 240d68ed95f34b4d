// Binary entanglement addressing trees over a qubit chain,
// their 2D grid extension, address codes, routing and distance statistics.
//
// A tree of depth parameter L spans positions 1..N-1 with N = 2^L. Position p
// sits at level L - 1 - v2(p); the root is N/2.

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

namespace nlc::beat {

inline int valuation(std::int64_t p, int base = 2) {
  if (p == 0) throw std::invalid_argument("valuation of zero");
  int v = 0;
  while (p % base == 0) {
    p /= base;
    ++v;
  }
  return v;
}

inline std::int64_t ipow(int base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

struct BeatTree {
  int depth{};                 // L
  int arity{2};
  std::int64_t n{};            // N = arity^L
  std::vector<int> level;      // index p, 0 unused
  std::vector<std::int64_t> parent;  // 0 for top-level nodes

  std::int64_t size() const { return n - 1; }
  std::int64_t root() const { return n / arity; }
  int max_level() const { return depth - 1; }

  std::vector<std::int64_t> nodes_at(int l) const {
    std::vector<std::int64_t> out;
    for (std::int64_t p = 1; p < n; ++p)
      if (level[p] == l) out.push_back(p);
    return out;
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> edges() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> e;
    for (std::int64_t p = 1; p < n; ++p)
      if (parent[p] != 0) e.emplace_back(parent[p], p);
    return e;
  }
};

// Level-l nodes are the positions m N / d^{l+1} with m not divisible by d. A
// node's parent is the nearest level-(l-1) node (lower position on ties); for
// d = 2 that is the unique level-(l-1) node whose dyadic interval contains it.
// For d > 2 the d - 1 top-level nodes are chained to the first of them.
inline BeatTree build_tree(int L, int arity = 2) {
  if (arity < 2) throw std::invalid_argument("arity must be >= 2");
  if (L < 2 || L > 24) throw std::invalid_argument("depth parameter L must be in [2, 24]");
  BeatTree t;
  t.depth = L;
  t.arity = arity;
  t.n = ipow(arity, L);
  if (t.n > (std::int64_t{1} << 25)) throw std::invalid_argument("tree too large");
  t.level.assign(t.n, -1);
  t.parent.assign(t.n, 0);
  for (std::int64_t p = 1; p < t.n; ++p) t.level[p] = L - 1 - valuation(p, arity);
  for (std::int64_t p = 1; p < t.n; ++p) {
    const int l = t.level[p];
    if (l == 0) continue;
    const std::int64_t step = ipow(arity, L - l);  // spacing of level l-1 candidates
    const std::int64_t lo = (p / step) * step;
    std::int64_t best = 0;
    for (std::int64_t q : {lo, lo + step}) {
      if (q <= 0 || q >= t.n || t.level[q] != l - 1) continue;
      if (best == 0 || std::abs(q - p) < std::abs(best - p)) best = q;
    }
    if (best == 0) {
      // nearest level-(l-1) node further away (only for arity > 2)
      for (std::int64_t k = 1; best == 0 && k < t.n; ++k)
        for (std::int64_t q : {lo - k * step, lo + (k + 1) * step})
          if (q > 0 && q < t.n && t.level[q] == l - 1) {
            best = q;
            break;
          }
    }
    t.parent[p] = best;
  }
  const auto top = t.nodes_at(0);
  for (std::size_t i = 1; i < top.size(); ++i) t.parent[top[i]] = top[0];
  return t;
}

// ---------------------------------------------------------------- addresses

struct QubitAddress {
  std::string bits;  // leading '0' integer digit, then fractional digits

  int depth() const { return static_cast<int>(bits.size()) - 1; }
  auto operator<=>(const QubitAddress&) const = default;
};

inline QubitAddress address_of(std::int64_t p, std::int64_t n) {
  if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("N must be a power of two");
  if (p < 1 || p > n - 1) throw std::out_of_range("position outside 1..N-1");
  int L = 0;
  while ((std::int64_t{1} << L) < n) ++L;
  const int v = valuation(p);
  // fractional digits of p / N: L - v of them, last is 1
  std::string bits = "0";
  for (int k = 1; k < L - v; ++k) bits.push_back(((p >> (L - k)) & 1) ? '1' : '0');
  return {bits};
}

inline std::int64_t position_of(const QubitAddress& a, std::int64_t n) {
  if (a.bits.empty() || a.bits.front() != '0') throw std::invalid_argument("address must start with 0");
  int L = 0;
  while ((std::int64_t{1} << L) < n) ++L;
  const int frac = static_cast<int>(a.bits.size());  // includes the appended 1
  if (frac > L) throw std::invalid_argument("address too long for N");
  std::int64_t p = 0;
  for (std::size_t k = 1; k < a.bits.size(); ++k) {
    if (a.bits[k] != '0' && a.bits[k] != '1') throw std::invalid_argument("address digits must be binary");
    p = 2 * p + (a.bits[k] - '0');
  }
  p = 2 * p + 1;
  return p << (L - frac);
}

inline QubitAddress lca(const QubitAddress& a, const QubitAddress& b) {
  std::size_t k = 0;
  while (k < a.bits.size() && k < b.bits.size() && a.bits[k] == b.bits[k]) ++k;
  return {a.bits.substr(0, std::max<std::size_t>(k, 1))};
}

inline int tree_distance(const QubitAddress& a, const QubitAddress& b) {
  return a.depth() + b.depth() - 2 * lca(a, b).depth();
}

// Positions from a to b through their lowest common ancestor.
inline std::vector<std::int64_t> tree_route(std::int64_t a, std::int64_t b, std::int64_t n) {
  const QubitAddress aa = address_of(a, n), bb = address_of(b, n);
  const QubitAddress c = lca(aa, bb);
  std::vector<std::int64_t> up, down;
  for (auto k = aa.bits.size(); k > c.bits.size(); --k) up.push_back(position_of({aa.bits.substr(0, k)}, n));
  up.push_back(position_of(c, n));
  for (auto k = bb.bits.size(); k > c.bits.size(); --k) down.push_back(position_of({bb.bits.substr(0, k)}, n));
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

// ---------------------------------------------------------------- graphs

enum EdgeKind : unsigned { kChain = 1u, kTree = 2u, kGridColumn = 4u };

inline std::string kind_name(unsigned k) {
  std::string s;
  auto add = [&](unsigned bit, const char* name) {
    if (k & bit) s += (s.empty() ? "" : "+") + std::string(name);
  };
  add(kChain, "chain");
  add(kTree, "tree");
  add(kGridColumn, "grid-column");
  return s;
}

inline unsigned kind_from_name(const std::string& s) {
  unsigned k = 0;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "chain") k |= kChain;
    else if (part == "tree") k |= kTree;
    else if (part == "grid-column") k |= kGridColumn;
    else throw std::invalid_argument("unknown edge kind: " + part);
  }
  return k;
}

struct Vertex {
  int row{};
  std::int64_t position{};
};

class ConnectivityGraph {
 public:
  int add_vertex(Vertex v) {
    vertices_.push_back(v);
    alive_.push_back(1);
    adj_.emplace_back();
    return static_cast<int>(vertices_.size()) - 1;
  }

  // Undirected; a repeated pair merges kinds instead of adding a multi-edge.
  void add_edge(int u, int v, unsigned kind) {
    if (u == v) throw std::invalid_argument("self loops are not allowed");
    check(u);
    check(v);
    const auto key = std::minmax(u, v);
    auto [it, inserted] = edges_.try_emplace({key.first, key.second}, kind);
    if (!inserted) {
      it->second |= kind;
      return;
    }
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }

  int size() const { return static_cast<int>(vertices_.size()); }
  int alive_count() const { return static_cast<int>(std::count(alive_.begin(), alive_.end(), 1)); }
  bool alive(int v) const { return alive_[v] != 0; }
  const Vertex& vertex(int v) const { return vertices_[v]; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  const std::map<std::pair<int, int>, unsigned>& edges() const { return edges_; }

  std::optional<unsigned> edge_kind(int u, int v) const {
    const auto key = std::minmax(u, v);
    auto it = edges_.find({key.first, key.second});
    if (it == edges_.end()) return std::nullopt;
    return it->second;
  }
  bool has_edge(int u, int v) const { return edge_kind(u, v).has_value(); }

  int degree(int v, unsigned kinds) const {
    int d = 0;
    for (int w : adj_[v])
      if (*edge_kind(v, w) & kinds) ++d;
    return d;
  }

  int find(int row, std::int64_t position) const {
    for (int v = 0; v < size(); ++v)
      if (vertices_[v].row == row && vertices_[v].position == position) return v;
    return -1;
  }

  // Induced subgraph on the surviving vertices. Vertex ids are preserved.
  ConnectivityGraph without(const std::set<int>& dead) const {
    ConnectivityGraph g;
    g.vertices_ = vertices_;
    g.alive_ = alive_;
    g.adj_.assign(vertices_.size(), {});
    for (int d : dead) {
      check(d);
      g.alive_[d] = 0;
    }
    for (const auto& [e, k] : edges_)
      if (g.alive_[e.first] && g.alive_[e.second]) g.add_edge(e.first, e.second, k);
    return g;
  }

  // BFS distances from `source` (-1: unreachable or removed).
  std::vector<int> bfs(int source) const {
    std::vector<int> dist(size(), -1);
    if (!alive(source)) return dist;
    std::deque<int> q{source};
    dist[source] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int w : adj_[u])
        if (dist[w] < 0 && alive(w)) {
          dist[w] = dist[u] + 1;
          q.push_back(w);
        }
    }
    return dist;
  }

  std::optional<std::vector<int>> shortest_path(int a, int b) const {
    check(a);
    check(b);
    if (!alive(a) || !alive(b)) return std::nullopt;
    std::vector<int> prev(size(), -2);
    std::deque<int> q{a};
    prev[a] = -1;
    while (!q.empty() && prev[b] == -2) {
      const int u = q.front();
      q.pop_front();
      for (int w : adj_[u])
        if (prev[w] == -2 && alive(w)) {
          prev[w] = u;
          q.push_back(w);
        }
    }
    if (prev[b] == -2) return std::nullopt;
    std::vector<int> path;
    for (int v = b; v != -1; v = prev[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  void check(int v) const {
    if (v < 0 || v >= size()) throw std::out_of_range("vertex id out of range");
  }
  std::vector<Vertex> vertices_;
  std::vector<char> alive_;
  std::vector<std::vector<int>> adj_;
  std::map<std::pair<int, int>, unsigned> edges_;
};

// 1D BEAT: positions 1..N-1 (vertex id p-1), tree couplers, optional chain.
inline ConnectivityGraph beat_graph(const BeatTree& t, bool with_chain = true, int row = 0) {
  ConnectivityGraph g;
  for (std::int64_t p = 1; p < t.n; ++p) g.add_vertex({row, p});
  for (const auto& [a, b] : t.edges()) g.add_edge(static_cast<int>(a - 1), static_cast<int>(b - 1), kTree);
  if (with_chain)
    for (std::int64_t p = 1; p + 1 < t.n; ++p) g.add_edge(static_cast<int>(p - 1), static_cast<int>(p), kChain);
  return g;
}

inline ConnectivityGraph chain_graph(std::int64_t n_qubits) {
  ConnectivityGraph g;
  for (std::int64_t p = 1; p <= n_qubits; ++p) g.add_vertex({0, p});
  for (int v = 0; v + 1 < n_qubits; ++v) g.add_edge(v, v + 1, kChain);
  return g;
}

// rows copies of the 1D BEAT (chain + tree); the leftmost qubits (position 1)
// of all rows are joined by one more BEAT assembly over the row index.
inline ConnectivityGraph build_grid(int rows, int L) {
  if (rows < 1) throw std::invalid_argument("rows must be >= 1");
  const BeatTree t = build_tree(L);
  ConnectivityGraph g;
  const auto per_row = static_cast<int>(t.n - 1);
  for (int r = 0; r < rows; ++r)
    for (std::int64_t p = 1; p < t.n; ++p) g.add_vertex({r, p});
  for (int r = 0; r < rows; ++r) {
    const int base = r * per_row;
    for (const auto& [a, b] : t.edges()) g.add_edge(base + static_cast<int>(a - 1), base + static_cast<int>(b - 1), kTree);
    for (int p = 0; p + 1 < per_row; ++p) g.add_edge(base + p, base + p + 1, kChain);
  }
  if (rows >= 2) {
    int lc = 1;
    while ((1 << lc) - 1 < rows) ++lc;
    const BeatTree col = build_tree(std::max(lc, 2));
    auto vid = [&](std::int64_t r1) { return static_cast<int>((r1 - 1) * per_row); };
    for (std::int64_t r1 = 1; r1 <= rows; ++r1) {
      std::int64_t q = col.parent[r1];
      while (q > rows) q = col.parent[q];
      if (q != 0) g.add_edge(vid(r1), vid(q), kGridColumn);
      if (r1 + 1 <= rows) g.add_edge(vid(r1), vid(r1 + 1), kGridColumn);
    }
  }
  return g;
}

// Tree-only graphs follow the LCA path; anything else uses BFS.
inline std::optional<std::vector<int>> route(int a, int b, const ConnectivityGraph& g) {
  bool tree_only = !g.edges().empty();
  for (const auto& [e, k] : g.edges()) tree_only = tree_only && k == kTree;
  if (tree_only && g.alive(a) && g.alive(b) && g.vertex(a).row == g.vertex(b).row) {
    std::int64_t n = 2;
    for (int v = 0; v < g.size(); ++v) n = std::max(n, g.vertex(v).position + 1);
    if ((n & (n - 1)) == 0) {
      std::vector<int> path;
      for (std::int64_t p : tree_route(g.vertex(a).position, g.vertex(b).position, n)) {
        const int v = g.find(g.vertex(a).row, p);
        if (v < 0 || !g.alive(v)) return std::nullopt;
        path.push_back(v);
      }
      return path;
    }
  }
  return g.shortest_path(a, b);
}

inline ConnectivityGraph remove_nodes(const ConnectivityGraph& g, const std::set<int>& dead) { return g.without(dead); }

// ---------------------------------------------------------------- statistics

struct DistanceReport {
  int max_distance{};
  double mean_distance{};
  std::vector<std::uint64_t> histogram;  // index: distance
  std::uint64_t pairs{};                 // connected unordered pairs counted
  std::uint64_t disconnected_pairs{};
  bool sampled{};
  int sample_size{};                     // BFS sources used when sampled
};

inline constexpr int kExactPairsCap = 1 << 14;

inline DistanceReport distance_stats(const ConnectivityGraph& g, int threads = 1, int sample_sources = 512,
                                     std::uint64_t seed = 1) {
  std::vector<int> sources;
  for (int v = 0; v < g.size(); ++v)
    if (g.alive(v)) sources.push_back(v);
  DistanceReport r;
  if (static_cast<int>(sources.size()) > kExactPairsCap) {
    std::mt19937_64 rng(seed);
    std::shuffle(sources.begin(), sources.end(), rng);
    sources.resize(sample_sources);
    r.sampled = true;
    r.sample_size = sample_sources;
  }
  threads = std::max(1, std::min<int>(threads, static_cast<int>(sources.size())));
  std::vector<DistanceReport> part(threads);
  std::vector<std::uint64_t> sums(threads, 0);
  auto work = [&](int w) {
    DistanceReport& pr = part[w];
    for (std::size_t i = w; i < sources.size(); i += threads) {
      const int s = sources[i];
      const auto d = g.bfs(s);
      for (int v = 0; v < g.size(); ++v) {
        if (!g.alive(v) || v == s) continue;
        if (!r.sampled && v < s) continue;  // unordered pairs once
        if (d[v] < 0) {
          ++pr.disconnected_pairs;
          continue;
        }
        if (static_cast<std::size_t>(d[v]) >= pr.histogram.size()) pr.histogram.resize(d[v] + 1, 0);
        ++pr.histogram[d[v]];
        sums[w] += static_cast<std::uint64_t>(d[v]);
        ++pr.pairs;
        pr.max_distance = std::max(pr.max_distance, d[v]);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(work, w);
    work(0);
  }
  std::uint64_t sum = 0;
  for (int w = 0; w < threads; ++w) {
    const auto& pr = part[w];
    r.pairs += pr.pairs;
    r.disconnected_pairs += pr.disconnected_pairs;
    r.max_distance = std::max(r.max_distance, pr.max_distance);
    if (pr.histogram.size() > r.histogram.size()) r.histogram.resize(pr.histogram.size(), 0);
    for (std::size_t k = 0; k < pr.histogram.size(); ++k) r.histogram[k] += pr.histogram[k];
    sum += sums[w];
  }
  r.mean_distance = r.pairs ? static_cast<double>(sum) / static_cast<double>(r.pairs) : 0.0;
  return r;
}

// ---------------------------------------------------------------- export

inline nlohmann::json to_json(const ConnectivityGraph& g) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (int v = 0; v < g.size(); ++v)
    if (g.alive(v)) j["vertices"].push_back({{"id", v}, {"row", g.vertex(v).row}, {"position", g.vertex(v).position}});
  j["edges"] = nlohmann::json::array();
  for (const auto& [e, k] : g.edges()) j["edges"].push_back({{"u", e.first}, {"v", e.second}, {"kind", kind_name(k)}});
  return j;
}

inline std::string to_dot(const ConnectivityGraph& g) {
  std::ostringstream os;
  os << "graph beat {\n";
  for (int v = 0; v < g.size(); ++v)
    if (g.alive(v))
      os << "  " << v << " [row=" << g.vertex(v).row << ", position=" << g.vertex(v).position << "];\n";
  for (const auto& [e, k] : g.edges()) os << "  " << e.first << " -- " << e.second << " [kind=\"" << kind_name(k) << "\"];\n";
  os << "}\n";
  return os.str();
}

// Reads the subset of DOT written by to_dot.
inline ConnectivityGraph from_dot(const std::string& text) {
  static const std::regex node_re(R"re(^\s*(\d+)\s*\[row=(\d+),\s*position=(\d+)\];\s*$)re");
  static const std::regex edge_re(R"re(^\s*(\d+)\s*--\s*(\d+)\s*\[kind="([a-z+\-]+)"\];\s*$)re");
  std::istringstream is(text);
  std::string line;
  std::map<int, Vertex> nodes;
  std::vector<std::tuple<int, int, unsigned>> edges;
  bool opened = false, closed = false;
  while (std::getline(is, line)) {
    std::smatch m;
    if (line.find("graph") != std::string::npos && line.find('{') != std::string::npos) {
      opened = true;
    } else if (std::regex_match(line, m, node_re)) {
      nodes[std::stoi(m[1])] = {std::stoi(m[2]), std::stoll(m[3])};
    } else if (std::regex_match(line, m, edge_re)) {
      edges.emplace_back(std::stoi(m[1]), std::stoi(m[2]), kind_from_name(m[3]));
    } else if (line.find('}') != std::string::npos) {
      closed = true;
    } else if (!line.empty()) {
      throw std::invalid_argument("unrecognized DOT line: " + line);
    }
  }
  if (!opened || !closed) throw std::invalid_argument("DOT graph block not found");
  ConnectivityGraph g;
  const int n = nodes.empty() ? 0 : nodes.rbegin()->first + 1;
  std::set<int> missing;
  for (int v = 0; v < n; ++v) {
    auto it = nodes.find(v);
    g.add_vertex(it == nodes.end() ? Vertex{} : it->second);
    if (it == nodes.end()) missing.insert(v);
  }
  for (const auto& [u, v, k] : edges) g.add_edge(u, v, k);
  return missing.empty() ? g : g.without(missing);
}

}  // namespace nlc::beat
