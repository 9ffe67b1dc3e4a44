#include "decsim/topology.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace decsim {

void NetworkSpec::validate() const {
  if (n <= 0) throw ConfigError("network must have at least one worker");
  if (static_cast<int>(h.size()) != n) throw ConfigError("h must have length n");
  if (static_cast<int>(rho.size()) != n) throw ConfigError("rho must be n x n");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rho[i].size()) != n) throw ConfigError("rho must be n x n");
    if (!(h[i] >= 0.0)) throw ConfigError("h entries must be nonnegative");
    if (rho[i][i] != 0.0) throw ConfigError("rho[i][i] must be 0");
    for (int j = 0; j < n; ++j) {
      if (!(rho[i][j] >= 0.0)) throw ConfigError("rho entries must be nonnegative");
    }
  }
}

namespace {

NetworkSpec empty_net(int n) {
  NetworkSpec net;
  net.n = n;
  net.h.assign(n, 1.0);
  net.rho.assign(n, std::vector<double>(n, kInf));
  for (int i = 0; i < n; ++i) net.rho[i][i] = 0.0;
  return net;
}

}  // namespace

NetworkSpec build_line(int n, double rho, double h) {
  return build_line(n, rho, std::vector<double>(n, h));
}

NetworkSpec build_line(int n, double rho, const std::vector<double>& h) {
  if (n <= 0) throw ConfigError("line: n must be positive");
  NetworkSpec net = empty_net(n);
  net.h = h;
  for (int i = 0; i + 1 < n; ++i) {
    net.rho[i][i + 1] = rho;
    net.rho[i + 1][i] = rho;
  }
  net.validate();
  return net;
}

namespace {

NetworkSpec build_lattice(const std::vector<int>& dims, double rho, double h, bool wrap) {
  if (dims.empty()) throw ConfigError("mesh: dims must be nonempty");
  long long total = 1;
  for (int d : dims) {
    if (d <= 0) throw ConfigError("mesh: dimension sizes must be positive");
    total *= d;
    if (total > 1000000) throw ConfigError("mesh: too many workers");
  }
  const int n = static_cast<int>(total);
  NetworkSpec net = empty_net(n);
  net.h.assign(n, h);

  // Row-major linearization; coordinate c of worker idx varies fastest last.
  const int ndim = static_cast<int>(dims.size());
  std::vector<int> stride(ndim, 1);
  for (int d = ndim - 2; d >= 0; --d) stride[d] = stride[d + 1] * dims[d + 1];

  std::vector<int> coord(ndim, 0);
  for (int idx = 0; idx < n; ++idx) {
    int rem = idx;
    for (int d = 0; d < ndim; ++d) {
      coord[d] = rem / stride[d];
      rem %= stride[d];
    }
    for (int d = 0; d < ndim; ++d) {
      if (coord[d] + 1 < dims[d]) {
        const int j = idx + stride[d];
        net.rho[idx][j] = std::min(net.rho[idx][j], rho);
        net.rho[j][idx] = std::min(net.rho[j][idx], rho);
      } else if (wrap && dims[d] > 2) {
        const int j = idx - (dims[d] - 1) * stride[d];
        net.rho[idx][j] = std::min(net.rho[idx][j], rho);
        net.rho[j][idx] = std::min(net.rho[j][idx], rho);
      }
    }
  }
  net.validate();
  return net;
}

}  // namespace

NetworkSpec build_mesh(const std::vector<int>& dims, double rho, double h) {
  return build_lattice(dims, rho, h, false);
}

NetworkSpec build_torus(const std::vector<int>& dims, double rho, double h) {
  return build_lattice(dims, rho, h, true);
}

NetworkSpec build_star(int n, const std::vector<double>& rho_to_center,
                       const std::vector<double>& rho_from_center,
                       const std::vector<double>& h) {
  if (n <= 0) throw ConfigError("star: n must be positive");
  if (static_cast<int>(rho_to_center.size()) != n ||
      static_cast<int>(rho_from_center.size()) != n) {
    throw ConfigError("star: rho_to_center/rho_from_center must have length n");
  }
  if (static_cast<int>(h.size()) != n + 1) throw ConfigError("star: h must have length n + 1");
  NetworkSpec net = empty_net(n + 1);
  net.h = h;
  for (int i = 0; i < n; ++i) {
    net.rho[i][n] = rho_to_center[i];
    net.rho[n][i] = rho_from_center[i];
  }
  net.validate();
  return net;
}

TauMatrix all_pairs_shortest(const NetworkSpec& net) {
  net.validate();
  const int n = net.n;
  TauMatrix out;
  out.tau = net.rho;
  for (int i = 0; i < n; ++i) out.tau[i][i] = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double dik = out.tau[i][k];
      if (is_inf(dik)) continue;
      for (int j = 0; j < n; ++j) {
        const double cand = dik + out.tau[k][j];
        if (cand < out.tau[i][j]) out.tau[i][j] = cand;
      }
    }
  }
  return out;
}

std::vector<std::vector<int>> SpanningTree::children() const {
  std::vector<std::vector<int>> kids(next.size());
  for (int i = 0; i < n(); ++i) {
    if (next[i] != kNoNext) kids[next[i]].push_back(i);
  }
  return kids;
}

void SpanningTree::validate(const NetworkSpec& net) const {
  if (n() != net.n) throw ConfigError("tree size mismatch");
  if (pivot < 0 || pivot >= net.n) throw ConfigError("tree pivot out of range");
  if (next[pivot] != kNoNext) throw ConfigError("tree: next[pivot] must be the terminal");
  for (int i = 0; i < n(); ++i) {
    int hops = 0;
    int cur = i;
    while (cur != kNoNext) {
      cur = next[cur];
      if (++hops > n()) throw ConfigError("tree: next mapping has a cycle");
    }
    if (reachable[i] && next[i] == kNoNext && i != pivot) {
      throw ConfigError("tree: reachable worker without a next hop");
    }
  }
}

SpanningTree shortest_path_tree(const NetworkSpec& net, const TauMatrix& tau,
                                int pivot, TreeDirection direction) {
  const int n = net.n;
  if (pivot < 0 || pivot >= n) throw ConfigError("pivot out of range");

  SpanningTree tree;
  tree.pivot = pivot;
  tree.direction = direction;
  tree.next.assign(n, kNoNext);
  tree.mu.assign(n, kInf);
  tree.reachable.assign(n, false);

  // Dijkstra from the pivot. For kTowardPivot we walk reversed edges
  // (weight rho[i][u] to reach i from settled u), so dist[i] = tau[i][pivot];
  // for kFromPivot forward edges give dist[i] = tau[pivot][i]. Parents are
  // settled at relaxation time, which keeps the next mapping acyclic; ties
  // prefer the smaller parent index.
  std::vector<double> dist(n, kInf);
  std::vector<bool> settled(n, false);
  dist[pivot] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, pivot});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = true;
    for (int v = 0; v < n; ++v) {
      if (settled[v] || v == u) continue;
      const double w = direction == TreeDirection::kTowardPivot ? net.rho[v][u] : net.rho[u][v];
      if (is_inf(w)) continue;
      const double cand = d + w;
      if (cand < dist[v] || (cand == dist[v] && tree.next[v] != kNoNext && u < tree.next[v])) {
        dist[v] = cand;
        tree.next[v] = u;
        heap.push({cand, v});
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    tree.mu[i] = dist[i];
    tree.reachable[i] = !is_inf(dist[i]);
    if (!tree.reachable[i]) tree.next[i] = kNoNext;
  }
  // Sanity against the Floyd–Warshall distances.
  for (int i = 0; i < n; ++i) {
    const double want = direction == TreeDirection::kTowardPivot ? tau(i, pivot) : tau(pivot, i);
    if (!(tree.mu[i] == want || nearly_equal(tree.mu[i], want, 1e-9))) {
      throw std::logic_error("shortest_path_tree: latency disagrees with tau");
    }
  }
  return tree;
}

SpanningTree tree_from_next(const NetworkSpec& net, int pivot,
                            TreeDirection direction,
                            const std::vector<int>& next) {
  if (static_cast<int>(next.size()) != net.n) throw ConfigError("tree: next must have length n");
  SpanningTree tree;
  tree.pivot = pivot;
  tree.direction = direction;
  tree.next = next;
  tree.mu.assign(net.n, kInf);
  tree.reachable.assign(net.n, false);
  for (int i = 0; i < net.n; ++i) {
    if (i != pivot && next[i] == kNoNext) continue;
    double sum = 0.0;
    int cur = i;
    int hops = 0;
    while (cur != pivot) {
      const int nx = next[cur];
      if (nx == kNoNext || ++hops > net.n) {
        throw ConfigError("tree: path does not reach the pivot");
      }
      sum += direction == TreeDirection::kTowardPivot ? net.rho[cur][nx] : net.rho[nx][cur];
      cur = nx;
    }
    tree.mu[i] = sum;
    tree.reachable[i] = !is_inf(sum);
  }
  tree.validate(net);
  return tree;
}

namespace {

using nlohmann::json;

double real_or_inf(const json& v, const char* what) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") return kInf;
    throw ConfigError(std::string(what) + ": expected a number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError(std::string(what) + ": expected a number or \"inf\"");
  return v.get<double>();
}

std::vector<double> real_list(const json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(real_or_inf(e, what));
  return out;
}

// h may be a scalar (replicated) or a per-worker list.
std::vector<double> h_field(const json& v, int n) {
  if (v.is_array()) {
    auto out = real_list(v, "h");
    if (static_cast<int>(out.size()) != n) throw ConfigError("h has the wrong length");
    return out;
  }
  return std::vector<double>(n, real_or_inf(v, "h"));
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) { ok = true; break; }
    }
    if (!ok) throw ConfigError("unknown network key: " + item.key());
  }
}

NetworkSpec network_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("network must be a JSON object");
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "line") {
      reject_unknown_keys(j, {"kind", "n", "rho", "h"});
      const int n = j.at("n").get<int>();
      return build_line(n, real_or_inf(j.at("rho"), "rho"), h_field(j.at("h"), n));
    }
    if (kind == "mesh" || kind == "torus") {
      reject_unknown_keys(j, {"kind", "dims", "rho", "h"});
      const auto dims = j.at("dims").get<std::vector<int>>();
      const double rho = real_or_inf(j.at("rho"), "rho");
      const double h = real_or_inf(j.at("h"), "h");
      return kind == "mesh" ? build_mesh(dims, rho, h) : build_torus(dims, rho, h);
    }
    if (kind == "star") {
      reject_unknown_keys(j, {"kind", "n", "rho_to_center", "rho_from_center", "h"});
      const int n = j.at("n").get<int>();
      return build_star(n, real_list(j.at("rho_to_center"), "rho_to_center"),
                        real_list(j.at("rho_from_center"), "rho_from_center"),
                        real_list(j.at("h"), "h"));
    }
    throw ConfigError("unknown network kind: " + kind);
  }

  reject_unknown_keys(j, {"n", "h", "rho", "edges"});
  const int n = j.at("n").get<int>();
  if (n <= 0) throw ConfigError("network n must be positive");
  NetworkSpec net = empty_net(n);
  net.h = h_field(j.at("h"), n);
  if (j.contains("rho")) {
    const auto& m = j.at("rho");
    if (!m.is_array() || static_cast<int>(m.size()) != n) throw ConfigError("rho must be n x n");
    for (int i = 0; i < n; ++i) {
      auto row = real_list(m[i], "rho");
      if (static_cast<int>(row.size()) != n) throw ConfigError("rho must be n x n");
      net.rho[i] = std::move(row);
    }
  } else if (j.contains("edges")) {
    // Multigraph entry point: 1-based [src, dst, rho] triples, parallel
    // edges collapsed to their minimum.
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw ConfigError("edges entries must be [i, j, rho]");
      const int src = e[0].get<int>() - 1;
      const int dst = e[1].get<int>() - 1;
      if (src < 0 || src >= n || dst < 0 || dst >= n) throw ConfigError("edge index out of range");
      const double r = real_or_inf(e[2], "edge rho");
      if (src != dst) net.rho[src][dst] = std::min(net.rho[src][dst], r);
    }
  } else {
    throw ConfigError("network needs either rho or edges");
  }
  net.validate();
  return net;
}

json real_or_inf_to_json(double x) {
  if (is_inf(x)) return json("inf");
  return json(x);
}

}  // namespace

NetworkSpec network_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("network JSON parse error: ") + e.what());
  }
  return network_from_json(j);
}

std::string network_to_json_text(const NetworkSpec& net) {
  json j;
  j["n"] = net.n;
  json h = json::array();
  for (double x : net.h) h.push_back(real_or_inf_to_json(x));
  j["h"] = h;
  json rho = json::array();
  for (const auto& row : net.rho) {
    json r = json::array();
    for (double x : row) r.push_back(real_or_inf_to_json(x));
    rho.push_back(r);
  }
  j["rho"] = rho;
  return j.dump(2);
}

}  // namespace decsim
