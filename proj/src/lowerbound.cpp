#include "decsim/lowerbound.hpp"

#include <cmath>
#include <stdexcept>

#include "decsim/equilibrium.hpp"
#include "decsim/rng.hpp"

namespace decsim {

void LevelGameParams::validate() const {
  if (n <= 0) throw std::invalid_argument("level game: n must be positive");
  if (static_cast<int>(h.size()) != n) throw std::invalid_argument("level game: bad h length");
  if (static_cast<int>(tau.size()) != n) throw std::invalid_argument("level game: tau must be n x n");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("level game: p must be in (0, 1]");
  if (levels < 1) throw std::invalid_argument("level game: T must be positive");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(tau[i].size()) != n) {
      throw std::invalid_argument("level game: tau must be n x n");
    }
    if (tau[i][i] != 0.0) throw std::invalid_argument("level game: tau[i][i] must be 0");
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (is_inf(tau[i][k])) continue;
      for (int j = 0; j < n; ++j) {
        if (tau[i][j] > tau[i][k] + tau[k][j] + 1e-9 * (1.0 + tau[i][j])) {
          throw std::invalid_argument("level game: tau violates the triangle inequality");
        }
      }
    }
  }
}

namespace {

double sample_unchecked(const LevelGameParams& params, uint64_t seed) {
  const int n = params.n;
  RngStream rng(seed, 0, RngPurpose::kLevelGame);
  std::vector<double> y(n, 0.0), next(n, 0.0), flip(n, 0.0);
  for (int level = 0; level < params.levels; ++level) {
    for (int i = 0; i < n; ++i) {
      const double eta = static_cast<double>(rng.geometric(params.p));
      flip[i] = y[i] + mul0(params.h[i], eta);
    }
    for (int j = 0; j < n; ++j) {
      double best = kInf;
      for (int i = 0; i < n; ++i) {
        const double cand = flip[i] + params.tau[i][j];
        if (cand < best) best = cand;
      }
      next[j] = best;
    }
    y.swap(next);
  }
  double out = kInf;
  for (double v : y) out = std::fmin(out, v);
  return out;
}

}  // namespace

double sample_level_time(const LevelGameParams& params, uint64_t seed) {
  params.validate();
  return sample_unchecked(params, seed);
}

LemmaThreshold lemma_threshold(const LevelGameParams& params) {
  params.validate();
  const int n = params.n;
  LemmaThreshold out;
  out.t_bar.resize(n);
  EquilibriumInput inp;
  inp.s = 1.0 / params.p;
  inp.h = params.h;
  inp.tau_bar.resize(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) inp.tau_bar[i] = params.tau[i][j];
    out.t_bar[j] = equilibrium_time(inp).value / 8.0;
  }
  out.rate = 0.0;
  for (int j = 0; j < n; ++j) {
    out.rate = std::fmax(out.rate, std::log(8.0 * n) / out.t_bar[j]);
  }
  const double budget = params.levels - std::log(static_cast<double>(n)) - std::log(2.0);
  out.t = budget > 0.0 ? budget / out.rate : 0.0;
  return out;
}

bool check_lemma_f1(const LevelGameParams& params) {
  const LemmaThreshold th = lemma_threshold(params);
  const int n = params.n;
  for (int j = 0; j < n; ++j) {
    const double tb = th.t_bar[j];
    double lhs = 0.0;
    for (int i = 0; i < n; ++i) {
      if (params.tau[i][j] > tb) continue;
      double flips;
      if (params.h[i] == 0.0) {
        flips = tb == 0.0 ? 0.0 : kInf;
      } else if (is_inf(params.h[i])) {
        flips = 0.0;
      } else {
        flips = std::floor(tb / params.h[i]);
      }
      lhs += params.p * flips;
    }
    if (lhs > 0.125 + 1e-12) return false;
  }
  return true;
}

double empirical_quantile(const LevelGameParams& params, int num_samples,
                          double threshold, uint64_t seed) {
  if (num_samples <= 0) throw std::invalid_argument("empirical_quantile: no samples");
  params.validate();
  int hits = 0;
  for (int s = 0; s < num_samples; ++s) {
    if (sample_unchecked(params, seed + static_cast<uint64_t>(s)) <= threshold) ++hits;
  }
  return static_cast<double>(hits) / num_samples;
}

}  // namespace decsim
