#include "decsim/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace decsim {

bool EquilibriumResult::participates(int worker) const {
  return std::binary_search(participating.begin(), participating.end(), worker);
}

EquilibriumResult equilibrium_time(const EquilibriumInput& inp) {
  const int n = static_cast<int>(inp.h.size());
  if (n == 0) throw std::invalid_argument("equilibrium_time: empty input");
  if (inp.tau_bar.size() != inp.h.size()) {
    throw std::invalid_argument("equilibrium_time: h and tau_bar lengths differ");
  }
  if (!(inp.s >= 0.0)) throw std::invalid_argument("equilibrium_time: s must be nonnegative");

  EquilibriumResult res;
  res.perm.resize(n);
  std::iota(res.perm.begin(), res.perm.end(), 0);
  std::sort(res.perm.begin(), res.perm.end(), [&](int a, int b) {
    const double ka = std::fmax(inp.tau_bar[a], inp.h[a]);
    const double kb = std::fmax(inp.tau_bar[b], inp.h[b]);
    if (ka != kb) return ka < kb;
    return a < b;
  });

  double best = kInf;
  int best_k = n;
  double inv_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const int w = res.perm[k - 1];
    inv_sum += inv0(inp.h[w]);
    const double slowest = std::fmax(inp.tau_bar[w], inp.h[w]);
    const double noise = mul0(inp.s, inv0(inv_sum));
    const double term = std::fmax(slowest, noise);
    // Largest minimizer within the tie tolerance (Lemma F.1 convention).
    if (term < best && !nearly_equal(term, best)) {
      best = term;
      best_k = k;
    } else if (nearly_equal(term, best)) {
      best_k = k;
    }
  }
  res.value = best;
  res.k_star = best_k;
  res.participating.assign(res.perm.begin(), res.perm.begin() + best_k);
  std::sort(res.participating.begin(), res.participating.end());
  return res;
}

PivotChoice select_pivot(const NetworkSpec& net, const TauMatrix& tau, double s,
                         bool roundtrip) {
  if (tau.n() != net.n) throw std::invalid_argument("select_pivot: tau size mismatch");
  PivotChoice best;
  bool have = false;
  EquilibriumInput inp;
  inp.s = s;
  inp.h = net.h;
  inp.tau_bar.resize(net.n);
  for (int j = 0; j < net.n; ++j) {
    for (int i = 0; i < net.n; ++i) {
      inp.tau_bar[i] = roundtrip ? tau(i, j) + tau(j, i) : tau(i, j);
    }
    EquilibriumResult r = equilibrium_time(inp);
    if (!have || r.value < best.result.value) {
      best.pivot = j;
      best.result = std::move(r);
      have = true;
    }
  }
  return best;
}

double fragile_batch(const ProblemConstants& c) {
  return std::fmax(std::ceil(c.sigma2 / c.eps), 1.0);
}

double amelie_batch(const ProblemConstants& c, int n) {
  return std::fmax(std::ceil(c.sigma2 / c.eps), static_cast<double>(n));
}

double nonconvex_iterations(const ProblemConstants& c) {
  return 16.0 * c.L * c.Delta / c.eps;
}

Prediction predict_fragile(const NetworkSpec& net, const TauMatrix& tau,
                           const ProblemConstants& c, bool roundtrip) {
  Prediction p;
  p.method = "fragile";
  p.batch = fragile_batch(c);
  p.iterations = nonconvex_iterations(c);
  PivotChoice choice = select_pivot(net, tau, p.batch, roundtrip);
  p.pivot = choice.pivot;
  p.per_iteration = choice.result.value;
  p.seconds = mul0(p.iterations, p.per_iteration);
  return p;
}

double predict_fragile_dynamic(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& bounds,
    double S) {
  double total = 0.0;
  for (const auto& [h, mu] : bounds) {
    if (h.size() != mu.size()) {
      throw std::invalid_argument("predict_fragile_dynamic: length mismatch");
    }
    total += equilibrium_time({S, h, mu}).value;
  }
  return total;
}

namespace {

double diameter(const TauMatrix& tau) {
  double d = 0.0;
  for (int i = 0; i < tau.n(); ++i) {
    for (int j = 0; j < tau.n(); ++j) d = std::fmax(d, tau(i, j));
  }
  return d;
}

double slowest(const std::vector<double>& h) {
  double m = 0.0;
  for (double x : h) m = std::fmax(m, x);
  return m;
}

double mean(const std::vector<double>& h) {
  double s = 0.0;
  for (double x : h) s += x;
  return s / static_cast<double>(h.size());
}

}  // namespace

Prediction predict_minibatch(const NetworkSpec& net, const TauMatrix& tau,
                             const ProblemConstants& c, bool heterogeneous) {
  Prediction p;
  p.method = heterogeneous ? "minibatch_hetero" : "minibatch";
  const double span = std::fmax(diameter(tau), slowest(net.h));
  const double n = static_cast<double>(net.n);
  if (heterogeneous) {
    p.iterations = mul0(c.L * c.Delta / c.eps, 1.0 + c.sigma2 / (n * c.eps));
    p.per_iteration = span;
  } else {
    p.iterations = c.L * c.Delta / c.eps + c.sigma2 * c.L * c.Delta / (n * c.eps * c.eps);
    p.per_iteration = span;
  }
  p.seconds = mul0(p.iterations, p.per_iteration);
  return p;
}

Prediction predict_amelie(const NetworkSpec& net, const TauMatrix& tau,
                          const ProblemConstants& c) {
  Prediction p;
  p.method = "amelie";
  p.batch = amelie_batch(c, net.n);
  p.iterations = nonconvex_iterations(c);
  const double n = static_cast<double>(net.n);
  p.per_iteration = std::fmax(std::fmax(diameter(tau), slowest(net.h)),
                              mul0(c.sigma2 / (n * c.eps), mean(net.h)));
  p.seconds = mul0(p.iterations, p.per_iteration);
  return p;
}

Prediction predict_convex(const ProblemConstants& c, const NetworkSpec& net,
                          const TauMatrix& tau, ConvexSmoothness smoothness,
                          bool heterogeneous, bool roundtrip) {
  Prediction p;
  double budget = 0.0;
  if (smoothness == ConvexSmoothness::kNonsmooth) {
    p.method = heterogeneous ? "convex_nonsmooth_hetero" : "convex_nonsmooth";
    p.iterations = 2.0 * c.M * c.M * c.R * c.R / (c.eps * c.eps);
    budget = c.sigma2 / (c.M * c.M);
  } else {
    p.method = heterogeneous ? "convex_accel_hetero" : "convex_accel";
    p.iterations = 8.0 * std::sqrt(c.L) * c.R / std::sqrt(c.eps);
    budget = c.sigma2 * c.R / (std::pow(c.eps, 1.5) * std::sqrt(c.L));
  }
  if (heterogeneous) {
    const double n = static_cast<double>(net.n);
    p.per_iteration = std::fmax(std::fmax(diameter(tau), slowest(net.h)),
                                mul0(budget / n, mean(net.h)));
  } else {
    PivotChoice choice = select_pivot(net, tau, budget, roundtrip);
    p.pivot = choice.pivot;
    p.per_iteration = choice.result.value;
  }
  p.seconds = mul0(p.iterations, p.per_iteration);
  return p;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kSlow: return "slow";
    case Regime::kMedium: return "medium";
    case Regime::kFast: return "fast";
  }
  return "?";
}

ClosedForm line_closed_form(int n, double h, double rho, double s) {
  if (n <= 0) throw std::invalid_argument("line_closed_form: n must be positive");
  ClosedForm out;
  const double key = std::sqrt(mul0(s, inv0(rho)) * h);  // sqrt(s h / rho)
  if (key <= 1.0) {
    out.regime = Regime::kSlow;
    out.per_iteration = h + mul0(s, h);
  } else if (key < static_cast<double>(n)) {
    out.regime = Regime::kMedium;
    out.per_iteration = h + std::sqrt(mul0(rho, mul0(s, h)));
  } else {
    out.regime = Regime::kFast;
    out.per_iteration = h + mul0(s, h) / static_cast<double>(n);
  }
  return out;
}

ClosedForm mesh_closed_form(int nd, int side, double h, double rho, double s) {
  if (nd <= 0 || side <= 0) throw std::invalid_argument("mesh_closed_form: bad dimensions");
  ClosedForm out;
  double n = 1.0;
  for (int d = 0; d < nd; ++d) n *= static_cast<double>(side);
  const double expo = static_cast<double>(nd) / (nd + 1.0);
  const double key = std::pow(mul0(s, h) * inv0(rho), expo);
  if (key <= 1.0) {
    out.regime = Regime::kSlow;
    out.per_iteration = h + mul0(s, h);
  } else if (key < n) {
    out.regime = Regime::kMedium;
    out.per_iteration = h + std::pow(rho, expo) * std::pow(mul0(s, h), 1.0 / (nd + 1.0));
  } else {
    out.regime = Regime::kFast;
    out.per_iteration = h + mul0(s, h) / n;
  }
  return out;
}

StarClosedForm star_closed_form(const std::vector<double>& rho_to,
                                const std::vector<double>& rho_from,
                                const std::vector<double>& h, double s) {
  const int n = static_cast<int>(rho_to.size());
  if (n == 0 || rho_from.size() != rho_to.size() ||
      h.size() != rho_to.size() + 1) {
    throw std::invalid_argument("star_closed_form: inconsistent lengths");
  }
  // Strategy 1: the best leaf works alone.
  double local = kInf;
  for (int j = 0; j < n; ++j) {
    local = std::fmin(local, std::fmax(h[j], mul0(s, h[j])));
  }
  // Strategy 2: aggregate at the hub; round trips go through the hub edges.
  EquilibriumInput inp;
  inp.s = s;
  inp.h = h;
  inp.tau_bar.resize(n + 1);
  for (int i = 0; i < n; ++i) inp.tau_bar[i] = rho_to[i] + rho_from[i];
  inp.tau_bar[n] = 0.0;
  const double center = equilibrium_time(inp).value;

  StarClosedForm out;
  if (local <= center) {
    out.strategy = "local";
    out.per_iteration = local;
  } else {
    out.strategy = "center";
    out.per_iteration = center;
  }
  return out;
}

}  // namespace decsim
