#pragma once

#include <cstdint>
#include <vector>

#include "decsim/time_inf.hpp"

namespace decsim {

// The level game behind the lower bound: workers flip Geometric(p) coins
// at their compute speeds and share levels over the tau distances; y^T is
// the earliest time any worker can reach level T.
struct LevelGameParams {
  int n = 0;
  std::vector<double> h;
  std::vector<std::vector<double>> tau;  // must satisfy the triangle inequality
  double p = 1.0;                        // in (0, 1]
  int levels = 1;                        // target level T

  void validate() const;
};

// One Monte-Carlo sample of y^T via the exact recursion
//   y^T_j = min_i { y^{T-1}_i + h_i eta^T_i + tau[i][j] },  y^0 = 0,
// with eta ~ Geometric(p) i.i.d. Cost O(T n^2).
double sample_level_time(const LevelGameParams& params, uint64_t seed);

// The fully explicit intermediate threshold from the concentration proof:
// per-pivot t_bar_j (an eighth of the equilibrium time with budget 1/p),
// the Chernoff rate s = max_j log(8n)/t_bar_j, and the time
// t = (T - log n - log 2) / s, clamped at zero.
struct LemmaThreshold {
  std::vector<double> t_bar;  // per pivot j
  double rate = 0.0;          // s
  double t = 0.0;
};
LemmaThreshold lemma_threshold(const LevelGameParams& params);

// Checks p * sum_i floor(t_bar_j / h_{pi_i}) [tau_{pi_i -> j} <= t_bar_j] <= 1/8
// for every pivot j, with t_bar_j from lemma_threshold.
bool check_lemma_f1(const LevelGameParams& params);

// Fraction of num_samples Monte-Carlo draws of y^T that are <= threshold.
double empirical_quantile(const LevelGameParams& params, int num_samples,
                          double threshold, uint64_t seed);

}  // namespace decsim
