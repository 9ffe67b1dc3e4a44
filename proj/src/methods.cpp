#include "decsim/methods.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace decsim {

const char* method_name(Method m) {
  switch (m) {
    case Method::kFragile: return "fragile";
    case Method::kAmelie: return "amelie";
    case Method::kMinibatch: return "minibatch";
    case Method::kAccelFragile: return "accel_fragile";
    case Method::kAccelAmelie: return "accel_amelie";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "fragile") return Method::kFragile;
  if (name == "amelie") return Method::kAmelie;
  if (name == "minibatch") return Method::kMinibatch;
  if (name == "accel_fragile") return Method::kAccelFragile;
  if (name == "accel_amelie") return Method::kAccelAmelie;
  return std::nullopt;
}

double stepsize_for(StepsizeRule rule, const ProblemConstants& c, double S,
                    double K) {
  switch (rule) {
    case StepsizeRule::kNonconvex:
    case StepsizeRule::kHeterogeneous:
      return 1.0 / (2.0 * c.L);
    case StepsizeRule::kConvexNonsmooth:
      return c.eps / (c.M * c.M + c.sigma2 / S);
    case StepsizeRule::kConvexAccel: {
      const double cap = 1.0 / (4.0 * c.L);
      if (c.sigma2 == 0.0) return cap;
      const double root =
          std::sqrt(3.0 * c.R * c.R * S / (4.0 * c.sigma2 * (K + 1.0) * (K + 2.0) * (K + 2.0)));
      return std::fmin(cap, root);
    }
  }
  return 0.0;
}

AccelState accel_init(const Vec& x0) { return AccelState{x0, x0, x0}; }

Vec accel_broadcast_point(const AccelState& st, long long k) {
  const double a = 2.0 / static_cast<double>(k + 2);
  Vec y(st.x.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = (1.0 - a) * st.x[i] + a * st.u[i];
  return y;
}

AccelState accelerated_update(const AccelState& st, const Vec& g, long long s_k,
                              long long k, double gamma) {
  const double a = 2.0 / static_cast<double>(k + 2);
  const double gk = gamma * static_cast<double>(k + 1);
  AccelState out;
  const size_t d = st.x.size();
  out.y.resize(d);
  out.u.resize(d);
  out.x.resize(d);
  for (size_t i = 0; i < d; ++i) {
    out.y[i] = (1.0 - a) * st.x[i] + a * st.u[i];
    out.u[i] = st.u[i] - (gk / static_cast<double>(s_k)) * g[i];
    out.x[i] = (1.0 - a) * st.x[i] + a * out.u[i];
  }
  return out;
}

namespace {

void add_into(Vec& dst, const Vec& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void add_scaled(Vec& dst, const Vec& src, double scale) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

// Worker membership sets carried inside aggregation messages.
class Bits {
 public:
  explicit Bits(int n = 0) : n_(n), w_((n + 63) / 64, 0) {}
  void set(int i) { w_[i >> 6] |= 1ULL << (i & 63); }
  void clear() { std::fill(w_.begin(), w_.end(), 0ULL); }
  void merge(const Bits& o) {
    for (size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
  }
  int count() const {
    int c = 0;
    for (uint64_t w : w_) c += __builtin_popcountll(w);
    return c;
  }
  std::vector<int> to_vector() const {
    std::vector<int> out;
    for (int i = 0; i < n_; ++i) {
      if (w_[i >> 6] & (1ULL << (i & 63))) out.push_back(i);
    }
    return out;
  }

 private:
  int n_;
  std::vector<uint64_t> w_;
};

struct Trees {
  SpanningTree up;    // toward the pivot
  SpanningTree down;  // from the pivot (next still points pivotward)
};

Trees make_trees(const NetworkSpec& net, const TauMatrix& tau, int pivot,
                 const MethodConfig& cfg) {
  Trees t;
  if (cfg.tree_next.empty()) {
    t.up = shortest_path_tree(net, tau, pivot, TreeDirection::kTowardPivot);
  } else {
    t.up = tree_from_next(net, pivot, TreeDirection::kTowardPivot, cfg.tree_next);
  }
  if (cfg.tree_bc_next.empty()) {
    t.down = shortest_path_tree(net, tau, pivot, TreeDirection::kFromPivot);
  } else {
    t.down = tree_from_next(net, pivot, TreeDirection::kFromPivot, cfg.tree_bc_next);
  }
  return t;
}

int resolve_pivot(const NetworkSpec& net, const TauMatrix& tau,
                  const MethodConfig& cfg) {
  if (cfg.pivot >= 0) {
    if (cfg.pivot >= net.n) throw ConfigError("pivot out of range");
    return cfg.pivot;
  }
  return select_pivot(net, tau, static_cast<double>(cfg.S), cfg.roundtrip_pivot).pivot;
}

void validate_config(const MethodConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (cfg.S < 1) throw ConfigError("S must be at least 1");
  if (cfg.K < 1) throw ConfigError("K must be at least 1");
}

// Shared run scaffolding: iterate bookkeeping, stopping rules, trace rows.
class RunBase {
 public:
  RunBase(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
          const StochasticOracle& oracle, const MethodConfig& cfg, int pivot,
          const Trees& trees)
      : net_(net), obj_(std::move(obj)), oracle_(oracle), cfg_(cfg), pivot_(pivot),
        accel_(cfg.method == Method::kAccelFragile || cfg.method == Method::kAccelAmelie),
        channels_(static_cast<size_t>(net.n) * net.n) {
    engine_.set_event_cap(cfg.event_cap);
    if (cfg.event_log) engine_.set_log_sink(cfg.event_log);
    for (int i = 0; i < net.n; ++i) {
      for (int j = 0; j < net.n; ++j) {
        channels_[idx(i, j)] = Channel{i, j, net.rho[i][j], 0.0};
      }
    }
    trace_.pivot = pivot;
    trace_.mu_up = trees.up.mu;
    trace_.mu_down = trees.down.mu;
    const Vec x0 = obj_->start_point();
    state_ = accel_init(x0);
    cached_gnorm_ = norm_sq(obj_->gradient(state_.x));
    cached_f_ = obj_->value(state_.x);
    contributors_union_ = Bits(net.n);
  }

  virtual ~RunBase() = default;

  RunTrace take_trace() {
    trace_.contributors_union = contributors_union_.to_vector();
    trace_.x_final = state_.x;
    trace_.total_time = last_update_time_;
    trace_.total_messages = engine_.messages_sent();
    return std::move(trace_);
  }

 protected:
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * net_.n + j; }
  Channel& channel(int i, int j) { return channels_[idx(i, j)]; }

  // Point gradients are requested at during iteration k_.
  Vec current_broadcast_point() const {
    if (accel_ && cfg_.grad_at_extrapolated) return accel_broadcast_point(state_, k_);
    return state_.x;
  }

  // Applies the update x <- x - (gamma / s_scale) g (or the accelerated
  // recurrence), records the row, and returns false when the run must stop.
  // s_scale is the divisor of the update; s_row the gradient count reported.
  bool complete_iteration(const Vec& g, long long s_scale, long long s_row,
                          int n_contributors, const std::vector<long long>& s_i,
                          double harmonic) {
    IterationRecord row;
    row.k = k_;
    row.t_start = iter_start_;
    row.t_end = engine_.now();
    row.s_k = s_row;
    row.grad_norm_sq = cached_gnorm_;
    row.f_value = cached_f_;
    row.n_contributors = n_contributors;
    row.messages = static_cast<long long>(engine_.messages_sent() - messages_at_start_);
    row.s_i = s_i;
    row.harmonic_sum = harmonic;
    trace_.rows.push_back(std::move(row));
    trace_.total_gradients_used += s_row;
    last_update_time_ = engine_.now();

    if (accel_) {
      state_ = accelerated_update(state_, g, s_scale, k_, cfg_.gamma);
    } else {
      Vec x = state_.x;
      add_scaled(x, g, -cfg_.gamma / static_cast<double>(s_scale));
      state_.x = std::move(x);
      state_.u = state_.x;
    }
    ++k_;
    cached_gnorm_ = norm_sq(obj_->gradient(state_.x));
    cached_f_ = obj_->value(state_.x);

    if (cfg_.target_grad_norm_sq > 0.0 && cached_gnorm_ <= cfg_.target_grad_norm_sq) {
      trace_.time_to_target = engine_.now();
      trace_.stop_reason = "target";
      return false;
    }
    if (k_ >= cfg_.K) {
      trace_.stop_reason = "iterations";
      return false;
    }
    if (engine_.now() >= cfg_.time_horizon) {
      trace_.stop_reason = "horizon";
      return false;
    }
    iter_start_ = engine_.now();
    messages_at_start_ = engine_.messages_sent();
    return true;
  }

  void run_loop() {
    engine_.run_until([this] { return stopped_; });
    if (!stopped_) {
      throw SimDiagnostic("simulation stalled: event queue drained at t=" +
                          std::to_string(engine_.now()));
    }
  }

  const NetworkSpec& net_;
  std::shared_ptr<const Objective> obj_;
  const StochasticOracle& oracle_;
  const MethodConfig& cfg_;
  int pivot_;
  bool accel_;
  Engine engine_;
  std::vector<Channel> channels_;
  RunTrace trace_;
  AccelState state_;
  long long k_ = 0;
  double iter_start_ = 0.0;
  uint64_t messages_at_start_ = 0;
  double cached_gnorm_ = 0.0;
  double cached_f_ = 0.0;
  double last_update_time_ = 0.0;
  Bits contributors_union_;
  bool stopped_ = false;
};

// ---------------------------------------------------------------------------
// Fragile SGD (and its accelerated variant).
//
// Every worker runs three logical jobs: keep computing gradients at the
// newest point it has, fold everything it receives into a single
// accumulator keyed by the newest iteration tag it has seen, and relay that
// accumulator toward the pivot whenever its outgoing line is free. Entries
// tagged older than the accumulator are dropped on arrival.
// ---------------------------------------------------------------------------
class FragileRun : public RunBase {
 public:
  FragileRun(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
             const StochasticOracle& oracle, const MethodConfig& cfg, int pivot,
             const Trees& trees)
      : RunBase(net, obj, oracle, cfg, pivot, trees), up_(trees.up), down_(trees.down) {
    const auto kids = down_.children();
    workers_.reserve(net.n);
    for (int i = 0; i < net.n; ++i) {
      workers_.push_back(WorkerState(net.n, obj_->dim(), i, cfg.seed));
      workers_[i].unit.worker = i;
      workers_[i].unit.duration = net.h[i];
      for (int c : kids[i]) {
        BcOut edge;
        edge.child = c;
        workers_[i].bc_out.push_back(std::move(edge));
      }
    }
    p0_g_.assign(obj_->dim(), 0.0);
    p0_contrib_ = Bits(net.n);
  }

  RunTrace run() {
    broadcast_current();
    run_loop();
    return take_trace();
  }

 private:
  struct BcOut {
    int child = 0;
    bool in_flight = false;
    long long sent_tag = -1;
    long long pending_tag = -1;
    std::shared_ptr<const Vec> pending_point;
  };

  struct UpMsg {
    long long tag = 0;
    Vec g;
    long long s = 0;
    Bits contrib;
    std::vector<SampleRef> samples;
  };

  struct WorkerState {
    WorkerState(int n, int d, int i, uint64_t seed)
        : acc_g(d, 0.0), acc_contrib(n), scratch(d, 0.0),
          oracle_rng(seed, i, RngPurpose::kOracle),
          jitter_rng(seed, i, RngPurpose::kJitter) {}

    std::shared_ptr<const Vec> point;
    long long point_tag = -1;
    long long k_max = -1;
    Vec acc_g;
    long long acc_s = 0;
    Bits acc_contrib;
    std::vector<SampleRef> acc_samples;
    Vec scratch;
    ComputeUnit unit;
    RngStream oracle_rng;
    RngStream jitter_rng;
    bool up_sending = false;
    std::vector<BcOut> bc_out;
  };

  void broadcast_current() {
    auto point = std::make_shared<const Vec>(current_broadcast_point());
    deliver_point(pivot_, k_, point);
  }

  void reset_acc(WorkerState& w) {
    std::fill(w.acc_g.begin(), w.acc_g.end(), 0.0);
    w.acc_s = 0;
    w.acc_contrib.clear();
    w.acc_samples.clear();
  }

  void deliver_point(int i, long long tag, std::shared_ptr<const Vec> point) {
    WorkerState& w = workers_[i];
    if (tag <= w.point_tag) return;
    w.point = point;
    w.point_tag = tag;
    if (tag > w.k_max) {
      w.k_max = tag;
      reset_acc(w);
    }
    for (size_t edge = 0; edge < w.bc_out.size(); ++edge) {
      BcOut& e = w.bc_out[edge];
      if (e.in_flight) {
        if (tag > e.pending_tag) {
          e.pending_tag = tag;
          e.pending_point = point;
        }
      } else if (tag > e.sent_tag) {
        send_bc(i, edge, tag, point);
      }
    }
    w.unit.interrupt(engine_);
    start_compute(i);
    send_check(i);
  }

  void send_bc(int i, size_t edge, long long tag, std::shared_ptr<const Vec> point) {
    BcOut& e = workers_[i].bc_out[edge];
    e.in_flight = true;
    e.sent_tag = tag;
    const double t = channel(i, e.child).send(engine_, engine_.now());
    const int child = e.child;
    engine_.schedule(t, EventKind::kMessageDelivered, i, child, tag,
                     [this, child, tag, point] { deliver_point(child, tag, point); });
    engine_.schedule(t, EventKind::kSendDone, i, child, tag, [this, i, edge] {
      workers_[i].bc_out[edge].in_flight = false;
      engine_.schedule(engine_.now(), EventKind::kCustom, i, i, -1, [this, i, edge] {
        BcOut& ed = workers_[i].bc_out[edge];
        if (!ed.in_flight && ed.pending_tag > ed.sent_tag) {
          auto p = std::move(ed.pending_point);
          const long long ptag = ed.pending_tag;
          ed.pending_tag = -1;
          send_bc(i, edge, ptag, std::move(p));
        }
      });
    });
  }

  void start_compute(int i) {
    WorkerState& w = workers_[i];
    if (w.point_tag < 0 || w.unit.busy()) return;
    double dur = w.unit.duration;
    if (cfg_.jitter && !is_inf(dur)) dur *= w.jitter_rng.uniform(cfg_.jitter_lo, 1.0);
    w.unit.start(engine_, dur, w.point_tag, [this, i] { compute_done(i); });
  }

  void compute_done(int i) {
    WorkerState& w = workers_[i];
    w.unit.pending = 0;
    const uint64_t counter_before = w.oracle_rng.counter();
    oracle_.sample(*w.point, w.oracle_rng, w.scratch);
    if (w.point_tag == w.k_max) {
      add_into(w.acc_g, w.scratch);
      ++w.acc_s;
      w.acc_contrib.set(i);
      if (cfg_.record_samples) w.acc_samples.push_back({i, counter_before});
    }
    start_compute(i);
    send_check(i);
  }

  // A worker relays whenever it holds gradients and its own uplink is free.
  // Empty accumulators are never shipped: a tag-only message would occupy
  // the line for a full transmission and delay the next loaded one.
  void send_check(int i) {
    WorkerState& w = workers_[i];
    if (w.acc_s == 0) return;
    if (i == pivot_) {
      process0_merge(w.k_max, w.acc_g, w.acc_s, w.acc_contrib, w.acc_samples);
      reset_acc(w);
      return;
    }
    if (up_.next[i] == kNoNext || !up_.reachable[i]) return;
    if (w.up_sending) return;

    auto msg = std::make_shared<UpMsg>();
    msg->tag = w.k_max;
    msg->g = std::move(w.acc_g);
    msg->s = w.acc_s;
    msg->contrib = w.acc_contrib;
    msg->samples = std::move(w.acc_samples);
    w.acc_g.assign(obj_->dim(), 0.0);
    w.acc_s = 0;
    w.acc_contrib.clear();
    w.acc_samples.clear();
    w.up_sending = true;

    const int nx = up_.next[i];
    const double t = channel(i, nx).send(engine_, engine_.now());
    engine_.schedule(t, EventKind::kMessageDelivered, i, nx, msg->tag,
                     [this, nx, msg] { up_delivered(nx, *msg); });
    // The next departure is checked one event later, after every arrival
    // with the same timestamp has been folded in.
    engine_.schedule(t, EventKind::kSendDone, i, nx, msg->tag, [this, i] {
      workers_[i].up_sending = false;
      engine_.schedule(engine_.now(), EventKind::kCustom, i, i, -1,
                       [this, i] { send_check(i); });
    });
  }

  void up_delivered(int j, UpMsg& msg) {
    WorkerState& w = workers_[j];
    if (msg.tag > w.k_max) {
      w.k_max = msg.tag;
      reset_acc(w);
    }
    if (msg.tag == w.k_max) {
      add_into(w.acc_g, msg.g);
      w.acc_s += msg.s;
      w.acc_contrib.merge(msg.contrib);
      if (cfg_.record_samples) {
        w.acc_samples.insert(w.acc_samples.end(), msg.samples.begin(), msg.samples.end());
      }
    }
    send_check(j);
  }

  void process0_merge(long long tag, const Vec& g, long long s, const Bits& contrib,
                      const std::vector<SampleRef>& samples) {
    if (tag != k_ || stopped_) return;
    add_into(p0_g_, g);
    p0_s_ += s;
    p0_contrib_.merge(contrib);
    if (cfg_.record_samples) {
      p0_samples_.insert(p0_samples_.end(), samples.begin(), samples.end());
    }
    if (p0_s_ >= cfg_.S) finish_iteration();
  }

  void finish_iteration() {
    if (cfg_.record_samples) {
      trace_.sample_log.push_back(std::move(p0_samples_));
      trace_.iterates.push_back(current_broadcast_point());
    }
    contributors_union_.merge(p0_contrib_);
    const bool more =
        complete_iteration(p0_g_, p0_s_, p0_s_, p0_contrib_.count(), {}, 0.0);
    std::fill(p0_g_.begin(), p0_g_.end(), 0.0);
    p0_s_ = 0;
    p0_contrib_.clear();
    p0_samples_.clear();
    if (!more) {
      stopped_ = true;
      return;
    }
    broadcast_current();
  }

  const SpanningTree up_;
  const SpanningTree down_;
  std::vector<WorkerState> workers_;
  Vec p0_g_;
  long long p0_s_ = 0;
  Bits p0_contrib_;
  std::vector<SampleRef> p0_samples_;
};

// ---------------------------------------------------------------------------
// Minibatch SGD: one gradient per worker per iteration, partial sums
// combined up the aggregation tree, then the new point goes back down.
// ---------------------------------------------------------------------------
class MinibatchRun : public RunBase {
 public:
  MinibatchRun(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
               const StochasticOracle& oracle, const MethodConfig& cfg, int pivot,
               const Trees& trees)
      : RunBase(net, obj, oracle, cfg, pivot, trees), up_(trees.up), down_(trees.down) {
    for (int i = 0; i < net.n; ++i) {
      if (is_inf(net.h[i])) throw ConfigError("minibatch: worker with infinite h");
      if (!up_.reachable[i] || !down_.reachable[i]) {
        throw ConfigError("minibatch: worker unreachable from the pivot");
      }
    }
    const auto kids = up_.children();
    const auto bc_kids = down_.children();
    workers_.reserve(net.n);
    for (int i = 0; i < net.n; ++i) {
      workers_.push_back(WorkerState(obj_->dim(), i, cfg.seed));
      workers_[i].unit.worker = i;
      workers_[i].unit.duration = net.h[i];
      workers_[i].n_children = static_cast<int>(kids[i].size());
      workers_[i].bc_children = bc_kids[i];
    }
  }

  RunTrace run() {
    broadcast();
    run_loop();
    return take_trace();
  }

 private:
  struct WorkerState {
    WorkerState(int d, int i, uint64_t seed)
        : partial(d, 0.0), scratch(d, 0.0),
          oracle_rng(seed, i, RngPurpose::kOracle),
          jitter_rng(seed, i, RngPurpose::kJitter) {}

    Vec partial;
    Vec scratch;
    bool own_done = false;
    bool sent = false;
    int received = 0;
    int n_children = 0;
    std::vector<int> bc_children;
    ComputeUnit unit;
    RngStream oracle_rng;
    RngStream jitter_rng;
  };

  void broadcast() {
    point_ = std::make_shared<const Vec>(current_broadcast_point());
    deliver_point(pivot_);
  }

  void deliver_point(int i) {
    WorkerState& w = workers_[i];
    w.own_done = false;
    w.sent = false;
    w.received = 0;
    std::fill(w.partial.begin(), w.partial.end(), 0.0);
    auto point = point_;
    for (int c : w.bc_children) {
      const double t = channel(i, c).send(engine_, engine_.now());
      engine_.schedule(t, EventKind::kMessageDelivered, i, c, k_,
                       [this, c] { deliver_point(c); });
    }
    double dur = w.unit.duration;
    if (cfg_.jitter) dur *= w.jitter_rng.uniform(cfg_.jitter_lo, 1.0);
    w.unit.start(engine_, dur, k_, [this, i] { compute_done(i); });
  }

  void compute_done(int i) {
    WorkerState& w = workers_[i];
    w.unit.pending = 0;
    oracle_.sample(*point_, w.oracle_rng, w.scratch);
    add_into(w.partial, w.scratch);
    w.own_done = true;
    try_send(i);
  }

  void up_delivered(int j, const Vec& g) {
    WorkerState& w = workers_[j];
    add_into(w.partial, g);
    ++w.received;
    try_send(j);
  }

  void try_send(int i) {
    WorkerState& w = workers_[i];
    if (w.sent || !w.own_done || w.received < w.n_children) return;
    w.sent = true;
    if (i == pivot_) {
      finish_iteration();
      return;
    }
    const int nx = up_.next[i];
    auto msg = std::make_shared<Vec>(std::move(w.partial));
    w.partial.assign(obj_->dim(), 0.0);
    const double t = channel(i, nx).send(engine_, engine_.now());
    engine_.schedule(t, EventKind::kMessageDelivered, i, nx, k_,
                     [this, nx, msg] { up_delivered(nx, *msg); });
  }

  void finish_iteration() {
    WorkerState& w = workers_[pivot_];
    for (int i = 0; i < net_.n; ++i) contributors_union_.set(i);
    // x <- x - (gamma / n) sum_i g_i, one gradient per worker.
    const bool more = complete_iteration(w.partial, net_.n, net_.n, net_.n, {}, 0.0);
    if (!more) {
      stopped_ = true;
      return;
    }
    broadcast();
  }

  const SpanningTree up_;
  const SpanningTree down_;
  std::vector<WorkerState> workers_;
  std::shared_ptr<const Vec> point_;
};

// ---------------------------------------------------------------------------
// Amelie SGD (and its accelerated variant). Workers accumulate local
// gradients of their own component and keep pushing the harmonic counter
// b_i = sum_children b + 1/s_i toward the pivot (one float per message).
// When n / b >= S / n the pivot collects {(1/s_i) g_i} with an up-tree
// combine and pushes the new point back down.
// ---------------------------------------------------------------------------
class AmelieRun : public RunBase {
 public:
  AmelieRun(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
            const StochasticOracle& oracle, const MethodConfig& cfg, int pivot,
            const Trees& trees)
      : RunBase(net, obj, oracle, cfg, pivot, trees), up_(trees.up), down_(trees.down) {
    for (int i = 0; i < net.n; ++i) {
      if (is_inf(net.h[i])) throw ConfigError("amelie: worker with infinite h");
      if (!up_.reachable[i] || !down_.reachable[i]) {
        throw ConfigError("amelie: worker unreachable from the pivot");
      }
    }
    const auto kids = up_.children();
    const auto bc_kids = down_.children();
    workers_.reserve(net.n);
    for (int i = 0; i < net.n; ++i) {
      workers_.push_back(WorkerState(obj_->dim(), i, cfg.seed));
      workers_[i].unit.worker = i;
      workers_[i].unit.duration = net.h[i];
      workers_[i].children = kids[i];
      workers_[i].bc_children = bc_kids[i];
    }
  }

  RunTrace run() {
    broadcast();
    run_loop();
    return take_trace();
  }

 private:
  enum class Phase { kComputing, kContributed };

  struct ContribMsg {
    long long tag = 0;
    Vec sum;                  // sum of (1/s_i) g_i over the subtree
    double harmonic = 0.0;    // sum of 1/s_i
    long long grads = 0;      // sum of s_i
    std::vector<std::pair<int, long long>> counts;
  };

  struct WorkerState {
    WorkerState(int d, int i, uint64_t seed)
        : g(d, 0.0), scratch(d, 0.0),
          oracle_rng(seed, i, RngPurpose::kOracle),
          jitter_rng(seed, i, RngPurpose::kJitter),
          contribution(d, 0.0) {}

    long long tag = -1;
    Phase phase = Phase::kComputing;
    long long s = 0;
    Vec g;
    Vec scratch;
    ComputeUnit unit;
    RngStream oracle_rng;
    RngStream jitter_rng;

    std::vector<int> children;
    std::vector<int> bc_children;
    std::vector<double> b_child;   // aligned with children, starts at +inf
    bool counter_sending = false;
    bool counter_dirty = false;
    double b_last_sent = -1.0;

    // Collect phase.
    bool frozen = false;
    Vec contribution;
    double harmonic_part = 0.0;
    long long grads_part = 0;
    std::vector<std::pair<int, long long>> counts_part;
    int contrib_received = 0;
    bool contrib_sent = false;
  };

  void broadcast() {
    point_ = std::make_shared<const Vec>(current_broadcast_point());
    collect_started_ = false;
    deliver_point(pivot_, k_);
  }

  void deliver_point(int i, long long tag) {
    WorkerState& w = workers_[i];
    if (tag != k_ || tag <= w.tag) return;
    w.tag = tag;
    w.phase = Phase::kComputing;
    w.s = 0;
    std::fill(w.g.begin(), w.g.end(), 0.0);
    w.b_child.assign(w.children.size(), kInf);
    w.counter_dirty = true;
    w.b_last_sent = -1.0;
    w.frozen = false;
    w.contrib_received = 0;
    w.contrib_sent = false;
    for (int c : w.bc_children) {
      const double t = channel(i, c).send(engine_, engine_.now());
      engine_.schedule(t, EventKind::kMessageDelivered, i, c, tag,
                       [this, c, tag] { deliver_point(c, tag); });
    }
    w.unit.interrupt(engine_);
    start_compute(i);
    counter_check(i);
  }

  void start_compute(int i) {
    WorkerState& w = workers_[i];
    if (w.phase != Phase::kComputing || w.unit.busy()) return;
    double dur = w.unit.duration;
    if (cfg_.jitter) dur *= w.jitter_rng.uniform(cfg_.jitter_lo, 1.0);
    w.unit.start(engine_, dur, w.tag, [this, i] { compute_done(i); });
  }

  void compute_done(int i) {
    WorkerState& w = workers_[i];
    w.unit.pending = 0;
    if (w.phase != Phase::kComputing) return;
    oracle_.component_sample(i, *point_, w.oracle_rng, w.scratch);
    add_into(w.g, w.scratch);
    ++w.s;
    w.counter_dirty = true;
    start_compute(i);
    counter_check(i);
  }

  void counter_check(int i) {
    WorkerState& w = workers_[i];
    if (w.phase != Phase::kComputing || !w.counter_dirty) return;
    double b = inv0(static_cast<double>(w.s));
    if (w.s == 0) b = kInf;
    for (double bc : w.b_child) b += bc;
    if (b == w.b_last_sent) {
      w.counter_dirty = false;
      return;
    }
    if (i == pivot_) {
      w.b_last_sent = b;
      w.counter_dirty = false;
      process0_counter(w.tag, b);
      return;
    }
    if (is_inf(b)) {
      // The parent already assumes an infinite counter for silent children.
      w.b_last_sent = b;
      w.counter_dirty = false;
      return;
    }
    if (w.counter_sending) return;
    w.counter_sending = true;
    w.b_last_sent = b;
    w.counter_dirty = false;
    const int nx = up_.next[i];
    const long long tag = w.tag;
    const double t = channel(i, nx).send(engine_, engine_.now());
    engine_.schedule(t, EventKind::kMessageDelivered, i, nx, tag,
                     [this, i, nx, tag, b] { counter_delivered(nx, i, tag, b); });
    engine_.schedule(t, EventKind::kSendDone, i, nx, tag, [this, i] {
      workers_[i].counter_sending = false;
      engine_.schedule(engine_.now(), EventKind::kCustom, i, i, -1,
                       [this, i] { counter_check(i); });
    });
  }

  void counter_delivered(int j, int from, long long tag, double b) {
    WorkerState& w = workers_[j];
    if (tag != w.tag || w.phase != Phase::kComputing) return;
    for (size_t c = 0; c < w.children.size(); ++c) {
      if (w.children[c] == from) {
        if (w.b_child[c] != b) {
          w.b_child[c] = b;
          w.counter_dirty = true;
        }
        break;
      }
    }
    counter_check(j);
  }

  void process0_counter(long long tag, double b) {
    if (tag != k_ || collect_started_ || stopped_) return;
    const double n = static_cast<double>(net_.n);
    if (b <= n * n / static_cast<double>(cfg_.S)) {
      collect_started_ = true;
      handle_collect(pivot_, k_);
    }
  }

  void handle_collect(int i, long long tag) {
    WorkerState& w = workers_[i];
    if (tag != w.tag || w.phase != Phase::kComputing) return;
    w.phase = Phase::kContributed;
    for (int c : w.bc_children) {
      const double t = channel(i, c).send(engine_, engine_.now());
      engine_.schedule(t, EventKind::kMessageDelivered, i, c, tag,
                       [this, c, tag] { handle_collect(c, tag); });
    }
    w.unit.interrupt(engine_);
    // Freeze the local average; s >= 1 is implied by the trigger condition.
    w.frozen = true;
    const double inv_s = 1.0 / static_cast<double>(w.s);
    for (size_t q = 0; q < w.contribution.size(); ++q) w.contribution[q] = inv_s * w.g[q];
    w.harmonic_part = inv_s;
    w.grads_part = w.s;
    w.counts_part.assign(1, {i, w.s});
    try_contribute(i);
  }

  void contribution_delivered(int j, const ContribMsg& msg) {
    WorkerState& w = workers_[j];
    if (msg.tag != w.tag) return;
    add_into(w.contribution, msg.sum);
    w.harmonic_part += msg.harmonic;
    w.grads_part += msg.grads;
    w.counts_part.insert(w.counts_part.end(), msg.counts.begin(), msg.counts.end());
    ++w.contrib_received;
    try_contribute(j);
  }

  void try_contribute(int i) {
    WorkerState& w = workers_[i];
    if (!w.frozen || w.contrib_sent) return;
    if (w.contrib_received < static_cast<int>(w.children.size())) return;
    w.contrib_sent = true;
    if (i == pivot_) {
      finish_iteration(w);
      return;
    }
    auto msg = std::make_shared<ContribMsg>();
    msg->tag = w.tag;
    msg->sum = std::move(w.contribution);
    w.contribution.assign(obj_->dim(), 0.0);
    msg->harmonic = w.harmonic_part;
    msg->grads = w.grads_part;
    msg->counts = std::move(w.counts_part);
    const int nx = up_.next[i];
    const double t = channel(i, nx).send(engine_, engine_.now());
    engine_.schedule(t, EventKind::kMessageDelivered, i, nx, msg->tag,
                     [this, nx, msg] { contribution_delivered(nx, *msg); });
  }

  void finish_iteration(WorkerState& pw) {
    Vec g(obj_->dim(), 0.0);
    add_scaled(g, pw.contribution, 1.0 / static_cast<double>(net_.n));
    std::sort(pw.counts_part.begin(), pw.counts_part.end());
    std::vector<long long> s_i(net_.n, 0);
    for (const auto& [worker, count] : pw.counts_part) s_i[worker] = count;
    for (int i = 0; i < net_.n; ++i) contributors_union_.set(i);
    // g is already the weighted mean, so the update divisor is 1.
    const bool more =
        complete_iteration(g, 1, pw.grads_part, net_.n, s_i, pw.harmonic_part);
    if (!more) {
      stopped_ = true;
      return;
    }
    broadcast();
  }

  const SpanningTree up_;
  const SpanningTree down_;
  std::vector<WorkerState> workers_;
  std::shared_ptr<const Vec> point_;
  bool collect_started_ = false;
};

}  // namespace

RunTrace run_fragile(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                     const StochasticOracle& oracle, const MethodConfig& cfg) {
  net.validate();
  validate_config(cfg);
  const TauMatrix tau = all_pairs_shortest(net);
  const int pivot = resolve_pivot(net, tau, cfg);
  if (net.n > 1) {
    bool any = false;
    for (int i = 0; i < net.n && !any; ++i) {
      if (i != pivot && !is_inf(tau(i, pivot))) any = true;
    }
    if (!any && is_inf(net.h[pivot])) {
      throw ConfigError("fragile: pivot unreachable and unable to compute");
    }
  }
  const Trees trees = make_trees(net, tau, pivot, cfg);
  FragileRun run(net, std::move(obj), oracle, cfg, pivot, trees);
  return run.run();
}

RunTrace run_minibatch(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                       const StochasticOracle& oracle, const MethodConfig& cfg) {
  net.validate();
  validate_config(cfg);
  const TauMatrix tau = all_pairs_shortest(net);
  const int pivot = resolve_pivot(net, tau, cfg);
  const Trees trees = make_trees(net, tau, pivot, cfg);
  MinibatchRun run(net, std::move(obj), oracle, cfg, pivot, trees);
  return run.run();
}

RunTrace run_amelie(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                    const StochasticOracle& oracle, const MethodConfig& cfg) {
  net.validate();
  validate_config(cfg);
  if (obj->components() != 1 && obj->components() != net.n) {
    throw ConfigError("amelie: problem components must match the worker count");
  }
  const TauMatrix tau = all_pairs_shortest(net);
  const int pivot = resolve_pivot(net, tau, cfg);
  const Trees trees = make_trees(net, tau, pivot, cfg);
  AmelieRun run(net, std::move(obj), oracle, cfg, pivot, trees);
  return run.run();
}

RunTrace run_method(const NetworkSpec& net, std::shared_ptr<const Objective> obj,
                    const StochasticOracle& oracle, const MethodConfig& cfg) {
  switch (cfg.method) {
    case Method::kFragile:
    case Method::kAccelFragile:
      return run_fragile(net, std::move(obj), oracle, cfg);
    case Method::kMinibatch:
      return run_minibatch(net, std::move(obj), oracle, cfg);
    case Method::kAmelie:
    case Method::kAccelAmelie:
      return run_amelie(net, std::move(obj), oracle, cfg);
  }
  throw ConfigError("unknown method");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string trace_to_csv(const RunTrace& trace) {
  std::ostringstream out;
  out << "k,t_start,t_end,s_k,grad_norm_sq,f_value,n_contributors,messages\n";
  for (const auto& r : trace.rows) {
    out << r.k << ',' << fmt_double(r.t_start) << ',' << fmt_double(r.t_end) << ','
        << r.s_k << ',' << fmt_double(r.grad_norm_sq) << ',' << fmt_double(r.f_value)
        << ',' << r.n_contributors << ',' << r.messages << '\n';
  }
  return out.str();
}

}  // namespace decsim
