#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "decsim/engine.hpp"
#include "decsim/equilibrium.hpp"
#include "decsim/problems.hpp"
#include "decsim/topology.hpp"

namespace decsim {

enum class Method { kFragile, kAmelie, kMinibatch, kAccelFragile, kAccelAmelie };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

// Stepsize rules with the constants the convergence statements use.
enum class StepsizeRule {
  kNonconvex,       // gamma = 1 / 2L
  kConvexNonsmooth, // gamma = eps / (M^2 + sigma2 / S)
  kConvexAccel,     // gamma = min{1/4L, sqrt(3 R^2 S / (4 sigma2 (K+1)(K+2)^2))}
  kHeterogeneous,   // gamma = 1 / 2L
};
double stepsize_for(StepsizeRule rule, const ProblemConstants& c, double S,
                    double K = 0.0);

struct MethodConfig {
  Method method = Method::kFragile;
  double gamma = 0.1;
  long long S = 1;           // batch / counter target
  long long K = 1;           // iteration budget
  int pivot = -1;            // worker index, or -1 for "auto"
  bool roundtrip_pivot = true;
  uint64_t seed = 0;
  bool jitter = false;       // actual compute time = U * h, U ~ U[jitter_lo, 1]
  double jitter_lo = 0.5;
  bool grad_at_extrapolated = true;  // accelerated: evaluate at y, not x
  double time_horizon = kInf;        // optional early stop on simulated time
  double target_grad_norm_sq = 0.0;  // optional early stop on the iterate (0 = off)
  uint64_t event_cap = 200000000ULL;
  bool record_samples = false;       // keep a replay log (tests, small runs)
  std::vector<int> tree_next;        // explicit up tree (empty = shortest path)
  std::vector<int> tree_bc_next;     // explicit broadcast tree
  std::function<void(const EventLogRow&)> event_log;  // optional event sink
};

struct IterationRecord {
  long long k = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  long long s_k = 0;            // gradients in the update (total over workers)
  double grad_norm_sq = 0.0;    // at x^k
  double f_value = 0.0;         // at x^k
  int n_contributors = 0;
  long long messages = 0;       // transmissions begun during the iteration
  std::vector<long long> s_i;   // per-worker counts (Amelie only)
  double harmonic_sum = 0.0;    // sum_i 1/s_i at the update (Amelie only)
};

struct SampleRef {
  int worker;
  uint64_t counter;  // oracle stream counter before the draw
};

struct RunTrace {
  std::vector<IterationRecord> rows;
  int pivot = 0;
  double total_time = 0.0;
  long long total_gradients_used = 0;
  uint64_t total_messages = 0;
  std::vector<int> contributors_union;
  std::vector<double> mu_up;    // latencies of the trees actually used
  std::vector<double> mu_down;
  Vec x_final;
  double time_to_target = kInf;  // first update time meeting the target
  std::string stop_reason;       // "iterations", "horizon", "target"
  std::vector<std::vector<SampleRef>> sample_log;  // when record_samples
  std::vector<Vec> iterates;                       // when record_samples
};

RunTrace run_fragile(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                     const StochasticOracle& oracle, const MethodConfig& cfg);

RunTrace run_minibatch(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                       const StochasticOracle& oracle, const MethodConfig& cfg);

RunTrace run_amelie(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                    const StochasticOracle& oracle, const MethodConfig& cfg);

// Dispatch on cfg.method (accelerated variants reuse the fragile / amelie
// machinery with the accelerated update).
RunTrace run_method(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                    const StochasticOracle& oracle, const MethodConfig& cfg);

// Accelerated recurrence (two-sequence scheme): with a = 2/(k+2) and
// g evaluated at y^{k+1} = (1-a) x^k + a u^k,
//   u^{k+1} = u^k - (gamma (k+1) / s) g,
//   x^{k+1} = (1-a) x^k + a u^{k+1}.
struct AccelState {
  Vec x;
  Vec u;
  Vec y;  // the most recent extrapolated point
};

AccelState accel_init(const Vec& x0);

// Point at which iteration k's gradients are requested (y^{k+1}).
Vec accel_broadcast_point(const AccelState& st, long long k);

// Applies the update for iteration k given the aggregated g and count s.
AccelState accelerated_update(const AccelState& st, const Vec& g, long long s_k,
                              long long k, double gamma);

// CSV emission for a trace (fixed column order; '.' decimals, no locale).
std::string trace_to_csv(const RunTrace& trace);

}  // namespace decsim
