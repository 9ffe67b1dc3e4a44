#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "decsim/equilibrium.hpp"
#include "decsim/lowerbound.hpp"
#include "decsim/methods.hpp"
#include "decsim/problems.hpp"
#include "decsim/topology.hpp"

namespace decsim {

// Experiment manifest: a JSON document validated up front (unknown keys are
// rejected everywhere). Sweeps and --set overrides rewrite the document and
// re-derive the typed pieces, so inspection helpers work off the raw JSON.
class ExperimentConfig {
 public:
  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  const nlohmann::json& raw() const { return raw_; }

  bool has_network() const { return raw_.contains("network"); }
  NetworkSpec network() const;
  // "line" / "mesh" / "torus" / "star" / "" (explicit matrix).
  std::string network_kind() const;

  bool has_problem() const { return raw_.contains("problem"); }
  std::shared_ptr<Objective> objective() const;
  std::unique_ptr<StochasticOracle> oracle(std::shared_ptr<Objective> obj) const;

  ProblemConstants constants() const;

  std::vector<MethodConfig> methods(const NetworkSpec& net) const;
  std::vector<uint64_t> seeds() const;

  bool has_lowerbound() const { return raw_.contains("lowerbound"); }
  struct LowerBoundJob {
    LevelGameParams params;
    int num_samples = 10000;
    uint64_t seed = 0;
  };
  LowerBoundJob lowerbound(const NetworkSpec* net) const;

  std::string output_dir() const;

  // Sweep axes: dotted config paths mapped to value lists, e.g.
  // {"network.rho": [0.1, 1, 10]}. Axis names sorted for determinism.
  struct SweepAxis {
    std::string path;
    std::vector<nlohmann::json> values;
  };
  std::vector<SweepAxis> sweep_axes() const;

  // Applies one "path=value" override (the --set syntax); value parsed as
  // JSON when possible, else taken as a string. A path segment addressing
  // an array without an index applies to every element.
  void apply_override(const std::string& path, const std::string& value);
  void apply_json_override(const std::string& path, const nlohmann::json& value);

 private:
  void validate() const;
  nlohmann::json raw_;
};

}  // namespace decsim
