#include "decsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "decsim/config.hpp"
#include "decsim/engine.hpp"
#include "decsim/equilibrium.hpp"
#include "decsim/lowerbound.hpp"
#include "decsim/methods.hpp"

namespace decsim::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

json finite_or_string(double v) {
  if (is_inf(v)) return json("inf");
  return json(v);
}

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

int thread_pool_size() {
  if (const char* env = std::getenv("DECSIM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs tasks [0, count) on the pool; each task must touch only its own slot.
void run_parallel(int count, const std::function<void(int)>& task) {
  const int threads = std::min(thread_pool_size(), count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<int> one_based(const std::vector<int>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(i + 1);
  return out;
}

json prediction_to_json(const Prediction& p) {
  json j;
  j["iterations"] = finite_or_string(p.iterations);
  j["per_iteration"] = finite_or_string(p.per_iteration);
  j["seconds"] = finite_or_string(p.seconds);
  if (p.batch > 0.0) j["S"] = p.batch;
  if (p.pivot != kNoNext) j["pivot"] = p.pivot + 1;
  j["up_to_universal_constant"] = p.up_to_universal_constant;
  return j;
}

json closed_form_report(const ExperimentConfig& cfg, const NetworkSpec& net,
                        const ProblemConstants& c) {
  const std::string kind = cfg.network_kind();
  const double s = c.sigma2 / c.eps;
  json out;
  if (kind == "line") {
    const auto& nj = cfg.raw().at("network");
    if (!nj.at("h").is_number()) return out;
    const ClosedForm cf = line_closed_form(net.n, nj.at("h").get<double>(),
                                           nj.at("rho").get<double>(), s);
    out["topology"] = "line";
    out["regime"] = regime_name(cf.regime);
    out["per_iteration"] = finite_or_string(cf.per_iteration);
  } else if (kind == "mesh" || kind == "torus") {
    const auto& nj = cfg.raw().at("network");
    const auto dims = nj.at("dims").get<std::vector<int>>();
    bool square = true;
    for (int d : dims) square = square && d == dims[0];
    if (!square || !nj.at("h").is_number()) return out;
    const ClosedForm cf = mesh_closed_form(static_cast<int>(dims.size()), dims[0],
                                           nj.at("h").get<double>(),
                                           nj.at("rho").get<double>(), s);
    out["topology"] = kind;
    out["regime"] = regime_name(cf.regime);
    out["per_iteration"] = finite_or_string(cf.per_iteration);
  } else if (kind == "star") {
    const auto& nj = cfg.raw().at("network");
    std::vector<double> to, from, h;
    for (const auto& v : nj.at("rho_to_center")) to.push_back(v.get<double>());
    for (const auto& v : nj.at("rho_from_center")) from.push_back(v.get<double>());
    for (const auto& v : nj.at("h")) h.push_back(v.get<double>());
    const StarClosedForm cf = star_closed_form(to, from, h, s);
    out["topology"] = "star";
    out["strategy"] = cf.strategy;
    out["per_iteration"] = finite_or_string(cf.per_iteration);
  }
  return out;
}

int cmd_predict(const ExperimentConfig& cfg) {
  const NetworkSpec net = cfg.network();
  const TauMatrix tau = all_pairs_shortest(net);
  const ProblemConstants c = cfg.constants();

  json report;
  const Prediction fragile = predict_fragile(net, tau, c, true);
  const PivotChoice choice = select_pivot(net, tau, fragile.batch, true);
  report["pivot"] = choice.pivot + 1;
  report["roundtrip"] = true;
  report["equilibrium"] = {
      {"t_star", finite_or_string(choice.result.value)},
      {"k_star", choice.result.k_star},
      {"participating", one_based(choice.result.participating)},
  };
  json methods;
  methods["fragile"] = prediction_to_json(fragile);
  methods["minibatch"] = prediction_to_json(predict_minibatch(net, tau, c, false));
  methods["minibatch_hetero"] = prediction_to_json(predict_minibatch(net, tau, c, true));
  methods["amelie"] = prediction_to_json(predict_amelie(net, tau, c));
  if (c.M > 0.0 && c.R > 0.0) {
    methods["convex_nonsmooth"] = prediction_to_json(
        predict_convex(c, net, tau, ConvexSmoothness::kNonsmooth, false));
    methods["convex_nonsmooth_hetero"] = prediction_to_json(
        predict_convex(c, net, tau, ConvexSmoothness::kNonsmooth, true));
  }
  if (c.R > 0.0) {
    methods["convex_accel"] = prediction_to_json(
        predict_convex(c, net, tau, ConvexSmoothness::kSmoothAccelerated, false));
    methods["convex_accel_hetero"] = prediction_to_json(
        predict_convex(c, net, tau, ConvexSmoothness::kSmoothAccelerated, true));
  }
  report["methods"] = methods;
  const json cf = closed_form_report(cfg, net, c);
  if (!cf.is_null() && !cf.empty()) report["closed_form"] = cf;

  const fs::path dir = cfg.output_dir();
  fs::create_directories(dir);
  const std::string text = report.dump(2) + "\n";
  write_file_atomic(dir / "predict.json", text);
  std::cout << text;
  return 0;
}

struct RunSpec {
  ExperimentConfig cfg;       // with sweep overrides applied
  std::vector<std::string> axis_labels;  // "axis=value" pieces
  int method_index = 0;
  uint64_t seed = 0;
};

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '/' || c == ' ' || c == ',') c = '_';
  }
  return s;
}

std::string run_name(const RunSpec& rs, const std::string& method) {
  std::string name = "trace_" + method;
  for (const auto& label : rs.axis_labels) name += "_" + sanitize(label);
  name += "_seed" + std::to_string(rs.seed) + ".csv";
  return name;
}

struct RunOutcome {
  std::string method;
  std::string file;
  RunTrace trace;
};

// Expands sweep axes x methods x seeds into isolated run specs.
std::vector<RunSpec> expand_runs(const ExperimentConfig& base) {
  const auto axes = base.sweep_axes();
  std::vector<ExperimentConfig> points;
  std::vector<std::vector<std::string>> labels;
  points.push_back(base);
  labels.push_back({});
  for (const auto& axis : axes) {
    std::vector<ExperimentConfig> grown;
    std::vector<std::vector<std::string>> grown_labels;
    for (size_t i = 0; i < points.size(); ++i) {
      for (const auto& value : axis.values) {
        ExperimentConfig next = points[i];
        next.apply_json_override(axis.path, value);
        auto lab = labels[i];
        lab.push_back(axis.path + "=" + (value.is_string() ? value.get<std::string>() : value.dump()));
        grown.push_back(std::move(next));
        grown_labels.push_back(std::move(lab));
      }
    }
    points = std::move(grown);
    labels = std::move(grown_labels);
  }

  std::vector<RunSpec> runs;
  for (size_t pt = 0; pt < points.size(); ++pt) {
    const NetworkSpec net = points[pt].network();
    const auto methods = points[pt].methods(net);
    std::vector<uint64_t> seeds = points[pt].seeds();
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      const std::vector<uint64_t> run_seeds =
          seeds.empty() ? std::vector<uint64_t>{methods[mi].seed} : seeds;
      for (uint64_t seed : run_seeds) {
        runs.push_back(RunSpec{points[pt], labels[pt], static_cast<int>(mi), seed});
      }
    }
  }
  return runs;
}

RunOutcome execute_run(const RunSpec& rs, const fs::path& dir, bool event_log) {
  const NetworkSpec net = rs.cfg.network();
  auto obj = rs.cfg.objective();
  auto oracle = rs.cfg.oracle(obj);
  const auto methods = rs.cfg.methods(net);
  MethodConfig mc = methods[rs.method_index];
  mc.seed = rs.seed;

  RunOutcome out;
  out.method = method_name(mc.method);
  // Disambiguate configs that list the same method more than once.
  int same_name = 0;
  for (const auto& other : methods) same_name += method_name(other.method) == out.method;
  out.file = run_name(rs, same_name > 1
                              ? out.method + "_m" + std::to_string(rs.method_index)
                              : out.method);

  std::shared_ptr<std::ostringstream> log;
  if (event_log) {
    log = std::make_shared<std::ostringstream>();
    *log << "time,seq,kind,src,dst,iteration\n";
    mc.event_log = [log](const EventLogRow& row) {
      *log << fmt_double(row.time) << ',' << row.seq << ','
           << event_kind_name(row.kind) << ',' << row.src + 1 << ','
           << row.dst + 1 << ',' << row.iteration << '\n';
    };
  }

  out.trace = run_method(net, obj, *oracle, mc);
  write_file_atomic(dir / out.file, trace_to_csv(out.trace));
  if (event_log) {
    write_file_atomic(dir / ("events_" + out.file), log->str());
  }
  return out;
}

int cmd_simulate(const ExperimentConfig& cfg, bool event_log) {
  const fs::path dir = cfg.output_dir();
  fs::create_directories(dir);
  const auto runs = expand_runs(cfg);
  if (runs.empty()) throw ConfigError("simulate: nothing to run");
  std::vector<RunOutcome> outcomes(runs.size());
  run_parallel(static_cast<int>(runs.size()),
               [&](int i) { outcomes[i] = execute_run(runs[i], dir, event_log); });
  for (const auto& oc : outcomes) {
    std::cout << oc.file << ": " << oc.trace.rows.size() << " iterations, t_end="
              << fmt_short(oc.trace.total_time) << ", stop=" << oc.trace.stop_reason
              << "\n";
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir();
  fs::create_directories(dir);
  const auto runs = expand_runs(cfg);
  if (runs.empty()) throw ConfigError("sweep: nothing to run");
  std::vector<RunOutcome> outcomes(runs.size());
  run_parallel(static_cast<int>(runs.size()),
               [&](int i) { outcomes[i] = execute_run(runs[i], dir, false); });

  // Aggregated CSV: one keyed row per run.
  const auto axes = cfg.sweep_axes();
  std::ostringstream agg;
  agg << "method,seed";
  for (const auto& axis : axes) agg << ',' << axis.path;
  agg << ",pivot,iterations,total_time,final_grad_norm_sq,final_f_value,"
         "time_to_target,gradients,messages,contributors,trace_file,rank\n";

  // Rank within each method by final gradient norm; keep the top 3 traces.
  std::vector<double> final_g(outcomes.size());
  for (size_t i = 0; i < outcomes.size(); ++i) {
    final_g[i] = outcomes[i].trace.rows.empty()
                     ? kInf
                     : outcomes[i].trace.rows.back().grad_norm_sq;
  }
  std::vector<int> rank(outcomes.size(), 0);
  std::vector<size_t> order(outcomes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (outcomes[a].method != outcomes[b].method) return outcomes[a].method < outcomes[b].method;
    return final_g[a] < final_g[b];
  });
  std::string cur_method;
  int pos = 0;
  for (size_t idx : order) {
    if (outcomes[idx].method != cur_method) {
      cur_method = outcomes[idx].method;
      pos = 0;
    }
    rank[idx] = ++pos;
  }
  for (size_t i = 0; i < outcomes.size(); ++i) {
    if (rank[i] > 3) fs::remove(dir / outcomes[i].file);
  }

  for (size_t i = 0; i < outcomes.size(); ++i) {
    const auto& oc = outcomes[i];
    const auto& rs = runs[i];
    agg << oc.method << ',' << rs.seed;
    for (size_t a = 0; a < axes.size(); ++a) {
      const std::string& label = rs.axis_labels[a];
      agg << ',' << label.substr(label.find('=') + 1);
    }
    const auto& tr = oc.trace;
    agg << ',' << tr.pivot + 1 << ',' << tr.rows.size() << ','
        << fmt_double(tr.total_time) << ',' << fmt_double(final_g[i]) << ','
        << fmt_double(tr.rows.empty() ? 0.0 : tr.rows.back().f_value) << ','
        << (is_inf(tr.time_to_target) ? "inf" : fmt_double(tr.time_to_target)) << ','
        << tr.total_gradients_used << ',' << tr.total_messages << ','
        << tr.contributors_union.size() << ','
        << (rank[i] <= 3 ? oc.file : std::string("-")) << ',' << rank[i] << '\n';
  }
  write_file_atomic(dir / "sweep.csv", agg.str());
  std::cout << "sweep.csv: " << outcomes.size() << " runs\n";
  return 0;
}

int cmd_lowerbound(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir();
  fs::create_directories(dir);
  NetworkSpec net;
  const bool have_net = cfg.has_network();
  if (have_net) net = cfg.network();
  const auto job = cfg.lowerbound(have_net ? &net : nullptr);

  const LemmaThreshold th = lemma_threshold(job.params);
  std::ostringstream csv;
  csv << "sample_index,y_T\n";
  std::vector<double> samples(job.num_samples);
  run_parallel(job.num_samples, [&](int i) {
    samples[i] = sample_level_time(job.params, job.seed + static_cast<uint64_t>(i));
  });
  int hits = 0;
  for (int i = 0; i < job.num_samples; ++i) {
    csv << i << ',' << fmt_double(samples[i]) << '\n';
    if (samples[i] <= th.t) ++hits;
  }
  write_file_atomic(dir / "lowerbound_samples.csv", csv.str());

  json summary;
  summary["threshold"] = th.t;
  summary["empirical_fraction"] = static_cast<double>(hits) / job.num_samples;
  summary["lemma_f1_ok"] = check_lemma_f1(job.params);
  const std::string text = summary.dump(2) + "\n";
  write_file_atomic(dir / "lowerbound_summary.json", text);
  std::cout << text;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"discrete-event simulator and analytical toolkit for "
               "asynchronous decentralized SGD over weighted digraphs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool event_log = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--set", overrides, "override config entries, path=value");
  };

  CLI::App* predict = app.add_subcommand("predict", "analytical time predictions");
  add_common(predict);
  CLI::App* simulate = app.add_subcommand("simulate", "run simulations, emit trace CSVs");
  add_common(simulate);
  simulate->add_flag("--trace", event_log, "also emit per-run event logs");
  CLI::App* lower = app.add_subcommand("lowerbound", "level-game sampling and thresholds");
  add_common(lower);
  CLI::App* sweep = app.add_subcommand("sweep", "grid sweep with aggregated CSV");
  add_common(sweep);
  CLI::App* validate = app.add_subcommand("validate-config", "validate a config and exit");
  add_common(validate);

  std::vector<const char*> argv;
  argv.push_back("decsim");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    for (const auto& ov : overrides) {
      const auto eq = ov.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects path=value");
      cfg.apply_override(ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (validate->parsed()) {
      std::cout << "ok\n";
      return 0;
    }
    if (predict->parsed()) return cmd_predict(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg, event_log);
    if (lower->parsed()) return cmd_lowerbound(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SimDiagnostic& e) {
    std::cerr << "runtime diagnostic: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace decsim::cli
