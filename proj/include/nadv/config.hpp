#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nadv/costs.hpp"
#include "nadv/data.hpp"
#include "nadv/generators.hpp"
#include "nadv/oracle.hpp"
#include "nadv/training.hpp"

namespace nadv {

enum class DatasetSource { synthetic, csv };
enum class OracleKind { knn, linear };

struct RunConfig {
  std::uint64_t seed = 0;
  bool seed_explicit = false;  // run.seed was given in the config text
  std::string output_dir = "results";
  int workers = 1;

  DatasetSource source = DatasetSource::synthetic;
  SyntheticSpec synthetic{2000, 10, {0, 1, 2}, 1.0, 0.5, 0};
  std::string csv_path;
  std::string schema_path;
  std::string label_column = "label";

  SplitFractions split{0.2, 0.4, 0.4};

  TrainConfig model = TrainConfig::mlp_defaults();
  // Attack settings of the robust arm; its base is always the model section.
  AdvTrainConfig adversarial{TrainConfig::mlp_defaults(), 0.2, 7, 0.05};
  // Used by the accuracy experiment, which studies logistic regression.
  TrainConfig logistic = TrainConfig::logistic_defaults();

  OracleKind oracle_kind = OracleKind::knn;
  int oracle_k = kDefaultOracleNeighbors;
  // Names of the discriminative features; empty = schema/synthetic default.
  std::vector<std::string> oracle_features;
  bool oracle_relabel = true;

  std::vector<Method> methods = all_methods();
  int target = 1;
  std::vector<GeneratorConfig> generators;  // one per Method, indexed by enum value

  CostKind cost_kind = CostKind::l2;
  // unit | squared_gradient | inverse_squared | optimal (weighted_quadratic only)
  std::string cost_weights = "unit";
  NormP cost_p = NormP::two;
  PdiscParams pdisc;

  int r_max = 5;
  int max_factuals = 200;
  double flip_fraction = 0.25;

  SyntheticSpec theorem_spec{100, 10, {0, 1, 2}, 1.0, 5.0, 0};
  NormP theorem_p = NormP::two;
  int theorem_trials = 500;
  int theorem_random_weightings = 100;

  RunConfig();

  const GeneratorConfig& generator(Method m) const { return generators[static_cast<std::size_t>(m)]; }
  GeneratorConfig& generator(Method m) { return generators[static_cast<std::size_t>(m)]; }

  // Throws ConfigError naming the offending key.
  void validate() const;

  // Fully resolved "section.key" = value pairs in a fixed order; parsing them
  // back reproduces this configuration.
  std::vector<std::pair<std::string, std::string>> echo() const;
  std::string to_ini() const;

  static RunConfig parse(const std::string& ini_text);
  static RunConfig load(const std::string& path);
};

// Reads a feature schema file: one [feature.<name>] section per raw feature
// with keys kind, categories, actionable, discriminative.
FeatureSchema load_schema(const std::string& path);
FeatureSchema parse_schema(const std::string& ini_text);
std::string schema_to_ini(const FeatureSchema& schema);

}  // namespace nadv
