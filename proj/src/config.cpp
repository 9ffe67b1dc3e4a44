#include "decsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace decsim {

using nlohmann::json;

namespace {

double real_or_inf(const json& v, const std::string& what) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") return kInf;
    throw ConfigError(what + ": expected a number or \"inf\"");
  }
  if (!v.is_number()) throw ConfigError(what + ": expected a number or \"inf\"");
  return v.get<double>();
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) { ok = true; break; }
    }
    if (!ok) throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig cfg;
  try {
    cfg.raw_ = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void ExperimentConfig::validate() const {
  check_keys(raw_, "config",
             {"network", "problem", "constants", "methods", "seeds", "sweep",
              "lowerbound", "output_dir"});
  if (raw_.contains("network")) network();
  if (raw_.contains("problem")) objective();
  if (raw_.contains("constants")) constants();
  if (raw_.contains("methods")) {
    if (!raw_.at("methods").is_array()) throw ConfigError("methods: expected an array");
    if (raw_.contains("network")) methods(network());
  }
  if (raw_.contains("seeds")) seeds();
  if (raw_.contains("sweep")) sweep_axes();
  if (raw_.contains("lowerbound")) {
    if (raw_.contains("network")) {
      const NetworkSpec net = network();
      lowerbound(&net);
    } else {
      lowerbound(nullptr);
    }
  }
}

NetworkSpec ExperimentConfig::network() const {
  if (!raw_.contains("network")) throw ConfigError("config: missing network");
  return network_from_json_text(raw_.at("network").dump());
}

std::string ExperimentConfig::network_kind() const {
  if (!raw_.contains("network")) return "";
  const auto& n = raw_.at("network");
  if (n.is_object() && n.contains("kind")) return n.at("kind").get<std::string>();
  return "";
}

std::shared_ptr<Objective> ExperimentConfig::objective() const {
  if (!raw_.contains("problem")) throw ConfigError("config: missing problem");
  const json& p = raw_.at("problem");
  check_keys(p, "problem", {"problem", "d", "oracle", "p", "sigma2", "n", "gen_seed"});
  const std::string name = p.at("problem").get<std::string>();
  const int d = p.at("d").get<int>();
  if (name == "quadratic_chain") return make_quadratic_chain(d);
  if (name == "hetero_quadratic") {
    const int n = p.at("n").get<int>();
    const uint64_t gen_seed = p.value("gen_seed", 0);
    return make_hetero_quadratic(n, d, gen_seed);
  }
  throw ConfigError("problem: unknown problem \"" + name + "\"");
}

std::unique_ptr<StochasticOracle> ExperimentConfig::oracle(
    std::shared_ptr<Objective> obj) const {
  const json& p = raw_.at("problem");
  const std::string name = p.value("oracle", "gaussian");
  if (name == "prog_bernoulli") {
    if (!p.contains("p")) throw ConfigError("problem: prog_bernoulli needs p");
    return prog_bernoulli_oracle(obj, p.at("p").get<double>());
  }
  if (name == "gaussian") {
    return gaussian_oracle(obj, p.value("sigma2", 0.0));
  }
  throw ConfigError("problem: unknown oracle \"" + name + "\"");
}

ProblemConstants ExperimentConfig::constants() const {
  ProblemConstants c;
  if (!raw_.contains("constants")) return c;
  const json& j = raw_.at("constants");
  check_keys(j, "constants", {"L", "Delta", "eps", "sigma2", "M", "R"});
  c.L = j.value("L", 1.0);
  c.Delta = j.value("Delta", 1.0);
  c.eps = j.value("eps", 1.0);
  c.sigma2 = j.value("sigma2", 0.0);
  c.M = j.value("M", 0.0);
  c.R = j.value("R", 0.0);
  return c;
}

std::vector<MethodConfig> ExperimentConfig::methods(const NetworkSpec& net) const {
  if (!raw_.contains("methods")) throw ConfigError("config: missing methods");
  const ProblemConstants c = constants();
  std::vector<MethodConfig> out;
  for (const json& m : raw_.at("methods")) {
    check_keys(m, "method",
               {"method", "gamma", "stepsize_rule", "S", "K", "pivot",
                "roundtrip_pivot", "seed", "jitter", "jitter_lo", "grad_at",
                "time_horizon", "target_grad_norm_sq", "event_cap", "tree_next",
                "tree_bc_next"});
    MethodConfig cfg;
    const std::string name = m.at("method").get<std::string>();
    const auto method = method_from_name(name);
    if (!method) throw ConfigError("method: unknown method \"" + name + "\"");
    cfg.method = *method;

    const bool hetero = cfg.method == Method::kAmelie || cfg.method == Method::kAccelAmelie;
    if (m.contains("S")) {
      cfg.S = m.at("S").get<long long>();
    } else {
      cfg.S = static_cast<long long>(hetero ? amelie_batch(c, net.n) : fragile_batch(c));
    }
    if (m.contains("K")) {
      cfg.K = m.at("K").get<long long>();
    } else {
      cfg.K = static_cast<long long>(std::ceil(nonconvex_iterations(c)));
    }

    if (m.contains("gamma")) {
      cfg.gamma = m.at("gamma").get<double>();
    } else if (m.contains("stepsize_rule")) {
      const std::string rule = m.at("stepsize_rule").get<std::string>();
      StepsizeRule r;
      if (rule == "nonconvex") r = StepsizeRule::kNonconvex;
      else if (rule == "convex_nonsmooth") r = StepsizeRule::kConvexNonsmooth;
      else if (rule == "convex_accel") r = StepsizeRule::kConvexAccel;
      else if (rule == "heterogeneous") r = StepsizeRule::kHeterogeneous;
      else throw ConfigError("method: unknown stepsize_rule \"" + rule + "\"");
      cfg.gamma = stepsize_for(r, c, static_cast<double>(cfg.S),
                               static_cast<double>(cfg.K));
    } else {
      throw ConfigError("method: needs gamma or stepsize_rule");
    }

    if (m.contains("pivot")) {
      const auto& pv = m.at("pivot");
      if (pv.is_string()) {
        if (pv.get<std::string>() != "auto") throw ConfigError("method: pivot must be \"auto\" or 1-based index");
        cfg.pivot = -1;
      } else {
        cfg.pivot = pv.get<int>() - 1;  // CLI is 1-based
        if (cfg.pivot < 0 || cfg.pivot >= net.n) throw ConfigError("method: pivot out of range");
      }
    }
    cfg.roundtrip_pivot = m.value("roundtrip_pivot", true);
    cfg.seed = m.value("seed", 0);
    cfg.jitter = m.value("jitter", false);
    cfg.jitter_lo = m.value("jitter_lo", 0.5);
    if (m.contains("grad_at")) {
      const std::string at = m.at("grad_at").get<std::string>();
      if (at == "y") cfg.grad_at_extrapolated = true;
      else if (at == "x") cfg.grad_at_extrapolated = false;
      else throw ConfigError("method: grad_at must be \"y\" or \"x\"");
    }
    if (m.contains("time_horizon")) cfg.time_horizon = real_or_inf(m.at("time_horizon"), "time_horizon");
    cfg.target_grad_norm_sq = m.value("target_grad_norm_sq", 0.0);
    if (m.contains("event_cap")) cfg.event_cap = m.at("event_cap").get<uint64_t>();
    // Explicit trees: 1-based worker indices, 0 for the terminal.
    for (const char* key : {"tree_next", "tree_bc_next"}) {
      if (!m.contains(key)) continue;
      std::vector<int> next;
      for (const auto& v : m.at(key)) {
        const int w = v.get<int>();
        if (w < 0 || w > net.n) throw ConfigError("method: tree index out of range");
        next.push_back(w - 1 >= 0 ? w - 1 : kNoNext);
      }
      if (std::string(key) == "tree_next") cfg.tree_next = std::move(next);
      else cfg.tree_bc_next = std::move(next);
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

std::vector<uint64_t> ExperimentConfig::seeds() const {
  std::vector<uint64_t> out;
  if (!raw_.contains("seeds")) return out;
  for (const auto& v : raw_.at("seeds")) out.push_back(v.get<uint64_t>());
  return out;
}

ExperimentConfig::LowerBoundJob ExperimentConfig::lowerbound(const NetworkSpec* net) const {
  if (!raw_.contains("lowerbound")) throw ConfigError("config: missing lowerbound");
  const json& j = raw_.at("lowerbound");
  check_keys(j, "lowerbound", {"n", "h", "tau", "use_network", "p", "T", "num_samples", "seed"});
  LowerBoundJob job;
  if (j.value("use_network", false)) {
    if (net == nullptr) throw ConfigError("lowerbound: use_network without a network");
    job.params.n = net->n;
    job.params.h = net->h;
    job.params.tau = all_pairs_shortest(*net).tau;
  } else {
    job.params.n = j.at("n").get<int>();
    job.params.h.clear();
    for (const auto& v : j.at("h")) job.params.h.push_back(real_or_inf(v, "lowerbound h"));
    for (const auto& row : j.at("tau")) {
      std::vector<double> r;
      for (const auto& v : row) r.push_back(real_or_inf(v, "lowerbound tau"));
      job.params.tau.push_back(std::move(r));
    }
  }
  job.params.p = j.at("p").get<double>();
  job.params.levels = j.at("T").get<int>();
  job.num_samples = j.value("num_samples", 10000);
  job.seed = j.value("seed", 0);
  job.params.validate();
  return job;
}

std::string ExperimentConfig::output_dir() const {
  return raw_.value("output_dir", "out");
}

std::vector<ExperimentConfig::SweepAxis> ExperimentConfig::sweep_axes() const {
  std::vector<SweepAxis> out;
  if (!raw_.contains("sweep")) return out;
  const json& j = raw_.at("sweep");
  if (!j.is_object()) throw ConfigError("sweep: expected an object of axis -> values");
  for (const auto& item : j.items()) {
    if (!item.value().is_array() || item.value().empty()) {
      throw ConfigError("sweep: axis \"" + item.key() + "\" needs a nonempty value list");
    }
    SweepAxis axis;
    axis.path = item.key();
    for (const auto& v : item.value()) axis.values.push_back(v);
    out.push_back(std::move(axis));
  }
  std::sort(out.begin(), out.end(),
            [](const SweepAxis& a, const SweepAxis& b) { return a.path < b.path; });
  return out;
}

namespace {

void apply_path(json& node, const std::vector<std::string>& segs, size_t at,
                const json& value) {
  if (at == segs.size()) {
    node = value;
    return;
  }
  const std::string& seg = segs[at];
  if (node.is_array()) {
    // Numeric segment addresses one element, otherwise fan out.
    const bool numeric = !seg.empty() && seg.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) {
      const size_t i = std::stoul(seg);
      if (i >= node.size()) throw ConfigError("override: array index out of range: " + seg);
      apply_path(node[i], segs, at + 1, value);
    } else {
      for (auto& el : node) apply_path(el.is_object() ? el[seg] : el, segs, at + 1, value);
    }
    return;
  }
  if (!node.is_object()) throw ConfigError("override: path does not address an object");
  apply_path(node[seg], segs, at, value);
}

}  // namespace

void ExperimentConfig::apply_json_override(const std::string& path, const json& value) {
  std::vector<std::string> segs;
  std::string cur;
  for (char ch : path) {
    if (ch == '.') {
      segs.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  segs.push_back(cur);

  json* node = &raw_;
  for (size_t i = 0; i < segs.size(); ++i) {
    const std::string& seg = segs[i];
    const bool last = i + 1 == segs.size();
    if (node->is_array()) {
      const bool numeric =
          !seg.empty() && seg.find_first_not_of("0123456789") == std::string::npos;
      if (numeric) {
        const size_t idx = std::stoul(seg);
        if (idx >= node->size()) throw ConfigError("override: index out of range in " + path);
        node = &(*node)[idx];
        if (last) { *node = value; validate(); return; }
        continue;
      }
      // Fan out over elements for a field segment.
      for (auto& el : *node) {
        if (!el.is_object()) throw ConfigError("override: cannot descend into " + path);
        if (last) {
          el[seg] = value;
        } else {
          json* sub = &el[seg];
          std::vector<std::string> rest(segs.begin() + i + 1, segs.end());
          apply_path(*sub, rest, 0, value);
        }
      }
      validate();
      return;
    }
    if (!node->is_object()) throw ConfigError("override: cannot descend into " + path);
    if (last) {
      (*node)[seg] = value;
      validate();
      return;
    }
    node = &(*node)[seg];
  }
  validate();
}

void ExperimentConfig::apply_override(const std::string& path, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;  // plain string
  }
  apply_json_override(path, v);
}

}  // namespace decsim
