#pragma once

#include <string>
#include <vector>

#include "decsim/time_inf.hpp"
#include "decsim/topology.hpp"

namespace decsim {

// Inputs of the equilibrium-time mapping: a noise budget s and, per worker,
// a compute bound h[i] and a distance tau_bar[i] to a fixed pivot (possibly
// a round-trip sum).
struct EquilibriumInput {
  double s = 0.0;
  std::vector<double> h;
  std::vector<double> tau_bar;
};

struct EquilibriumResult {
  double value = 0.0;        // t*
  int k_star = 0;            // 1..n, largest minimizer
  std::vector<int> perm;     // sorts max{tau_bar, h} nondecreasing, ties by index
  std::vector<int> participating;  // perm[0..k_star-1], sorted

  bool participates(int worker) const;
};

// min over k of max{ max{tau_bar_{pi_k}, h_{pi_k}}, s * (sum_{i<=k} 1/h_{pi_i})^-1 }.
// Among values tied within 1e-12 relative tolerance the largest k wins.
EquilibriumResult equilibrium_time(const EquilibriumInput& inp);

// Pivot that minimizes the equilibrium time; tau_bar[i] is tau[i][j]+tau[j][i]
// when roundtrip, else tau[i][j]. Ties prefer the smaller pivot index.
struct PivotChoice {
  int pivot = 0;
  EquilibriumResult result;
};
PivotChoice select_pivot(const NetworkSpec& net, const TauMatrix& tau, double s,
                         bool roundtrip);

struct ProblemConstants {
  double L = 1.0;
  double Delta = 1.0;
  double eps = 1.0;
  double sigma2 = 0.0;
  double M = 0.0;   // Lipschitz constant of f itself (convex nonsmooth)
  double R = 0.0;   // distance from x0 to a minimizer (convex)
};

// Wall-clock predictions. All figures are exact products of the explicit
// theorem constants (no hidden factors), flagged up-to-universal-constant.
struct Prediction {
  std::string method;
  double iterations = 0.0;
  double per_iteration = 0.0;  // t* or the max-form per-iteration bound
  double seconds = 0.0;
  double batch = 0.0;          // S where the method has one
  int pivot = kNoNext;         // chosen pivot, when applicable
  bool up_to_universal_constant = true;
};

// Batch sizes and iteration counts from the theorems.
double fragile_batch(const ProblemConstants& c);             // max{ceil(sigma2/eps), 1}
double amelie_batch(const ProblemConstants& c, int n);       // max{ceil(sigma2/eps), n}
double nonconvex_iterations(const ProblemConstants& c);      // 16 L Delta / eps

Prediction predict_fragile(const NetworkSpec& net, const TauMatrix& tau,
                           const ProblemConstants& c, bool roundtrip = true);

// Sum of per-iteration equilibrium times for per-iteration bounds
// (h^k, mu^k) with mu^k already combined (round trips included by caller).
double predict_fragile_dynamic(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& bounds,
    double S);

Prediction predict_minibatch(const NetworkSpec& net, const TauMatrix& tau,
                             const ProblemConstants& c, bool heterogeneous);

Prediction predict_amelie(const NetworkSpec& net, const TauMatrix& tau,
                          const ProblemConstants& c);

enum class ConvexSmoothness { kNonsmooth, kSmoothAccelerated };

Prediction predict_convex(const ProblemConstants& c, const NetworkSpec& net,
                          const TauMatrix& tau, ConvexSmoothness smoothness,
                          bool heterogeneous, bool roundtrip = true);

// Closed-form per-iteration times for the reference topologies. Regime tags:
// slow (one worker), medium (a prefix), fast (everyone).
enum class Regime { kSlow, kMedium, kFast };
const char* regime_name(Regime r);

struct ClosedForm {
  Regime regime = Regime::kSlow;
  double per_iteration = 0.0;
};

ClosedForm line_closed_form(int n, double h, double rho, double s);
ClosedForm mesh_closed_form(int nd, int side, double h, double rho, double s);

struct StarClosedForm {
  std::string strategy;  // "local" or "center"
  double per_iteration = 0.0;
};
StarClosedForm star_closed_form(const std::vector<double>& rho_to,
                                const std::vector<double>& rho_from,
                                const std::vector<double>& h, double s);

}  // namespace decsim
