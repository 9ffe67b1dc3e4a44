#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "decsim/time_inf.hpp"

namespace decsim {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Weighted directed multigraph of workers. h[i] bounds the seconds worker i
// needs per stochastic gradient; rho[i][j] bounds the seconds to send one
// vector directly from i to j (kInf = no direct link). Parallel edges are
// collapsed to their minimum at construction. Immutable after construction.
struct NetworkSpec {
  int n = 0;
  std::vector<double> h;                    // length n
  std::vector<std::vector<double>> rho;     // n x n, rho[i][i] == 0

  void validate() const;
};

NetworkSpec build_line(int n, double rho, double h);
NetworkSpec build_line(int n, double rho, const std::vector<double>& h);

// ND mesh with the given per-dimension sizes; edges between lattice
// neighbours. Torus additionally wraps each dimension around.
NetworkSpec build_mesh(const std::vector<int>& dims, double rho, double h);
NetworkSpec build_torus(const std::vector<int>& dims, double rho, double h);

// n leaves plus a hub stored at index n. h has length n + 1 (hub last).
NetworkSpec build_star(int n, const std::vector<double>& rho_to_center,
                       const std::vector<double>& rho_from_center,
                       const std::vector<double>& h);

// All-pairs shortest communication distances derived from rho.
struct TauMatrix {
  std::vector<std::vector<double>> tau;  // n x n

  int n() const { return static_cast<int>(tau.size()); }
  double operator()(int i, int j) const { return tau[i][j]; }
};

// Floyd–Warshall over [0, inf] weights; infinities propagate, never NaN.
TauMatrix all_pairs_shortest(const NetworkSpec& net);

enum class TreeDirection { kTowardPivot, kFromPivot };

// Sentinel used as next[pivot] and for unreachable workers.
inline constexpr int kNoNext = -1;

// Pivot-rooted routing tree. next[i] is the worker after i on the tree path
// between i and the pivot (always oriented toward the pivot, also for
// broadcast trees). mu[i] sums rho along that path in the tree's direction:
// i -> pivot for kTowardPivot trees, pivot -> i for kFromPivot trees.
struct SpanningTree {
  int pivot = 0;
  TreeDirection direction = TreeDirection::kTowardPivot;
  std::vector<int> next;          // kNoNext for pivot and unreachable workers
  std::vector<double> mu;         // kInf for unreachable workers
  std::vector<bool> reachable;

  int n() const { return static_cast<int>(next.size()); }
  std::vector<std::vector<int>> children() const;
  void validate(const NetworkSpec& net) const;
};

// Shortest-path tree for the given pivot; mu[i] equals tau[i][pivot]
// (toward) or tau[pivot][i] (from). Deterministic: among equal-distance
// parents the smallest settled worker index wins.
SpanningTree shortest_path_tree(const NetworkSpec& net, const TauMatrix& tau,
                                int pivot, TreeDirection direction);

// Tree built from an explicit next mapping; mu is recomputed from rho.
SpanningTree tree_from_next(const NetworkSpec& net, int pivot,
                            TreeDirection direction,
                            const std::vector<int>& next);

inline int next_worker(const SpanningTree& tree, int i) { return tree.next.at(i); }

// JSON I/O. Accepts either the explicit form {"n", "h", "rho"} with "inf"
// strings for missing links, an {"edges": [[i, j, rho], ...]} multigraph
// form (1-based, duplicates collapsed to the minimum), or a generator
// shorthand {"kind": "line"|"mesh"|"torus"|"star", ...}.
NetworkSpec network_from_json_text(const std::string& text);
std::string network_to_json_text(const NetworkSpec& net);

}  // namespace decsim
