#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nadv/config.hpp"
#include "nadv/evaluation.hpp"
#include "nadv/lineartheory.hpp"

namespace nadv {

enum class ExperimentKind { method_comparison, cost_comparison, accuracy, adv_training, theorem };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

// Seed streams derived from RunConfig::seed.
namespace streams {
inline constexpr std::uint64_t dataset = 1;
inline constexpr std::uint64_t split = 2;
inline constexpr std::uint64_t flip = 3;
inline constexpr std::uint64_t model = 4;
inline constexpr std::uint64_t generator = 5;
inline constexpr std::uint64_t theorem = 6;
}  // namespace streams

// Everything upstream of model training: processed splits, the simulated
// ground truth and the relabeled train/test sets.
struct PreparedData {
  LabeledDataset expert;
  LabeledDataset train;
  LabeledDataset test;
  std::vector<Index> disc_indices;  // in processed feature space
  Oracle oracle;
  std::optional<Vector> true_beta;  // synthetic sources only
};

PreparedData prepare_data(const RunConfig& config);

ScoringModel train_model(const RunConfig& config, const LabeledDataset& train, bool adversarial);

// Test rows whose model label differs from the target, in row order, capped
// at max_factuals.
std::vector<Index> select_factuals(const ScoringModel& model, const LabeledDataset& test, int target,
                                   int max_factuals);

// Coefficient estimate feeding the weighted cost functions. Logistic models
// use their weights with Fisher-information standard errors; MLPs use the
// mean absolute input gradient over the factuals, without standard errors.
struct CoefficientEstimate {
  Vector beta_hat;
  Vector standard_errors;
  bool has_standard_errors = false;
};

CoefficientEstimate estimate_coefficients(const ScoringModel& model, const LabeledDataset& train,
                                          const Matrix& factuals);

// weighting: unit | squared_gradient | inverse_squared | optimal.
CostFunction make_cost(CostKind kind, const std::string& weighting, const CoefficientEstimate& estimate, NormP p,
                       PdiscParams pdisc);

struct FactualResult {
  Index row = 0;
  std::optional<RecourseOutput> output;
  std::optional<RetryTrace> trace;
  std::string error;
};

// Generates and traces recourse for every factual row of `test`, fanning out
// over `workers` threads and merging in row order.
std::vector<FactualResult> run_factuals(const RunConfig& config, const ScoringModel& model, const Oracle& oracle,
                                        const LabeledDataset& test, const std::vector<Index>& rows,
                                        const CostFunction& cost, const GeneratorConfig& generator,
                                        const GenerationContext& context);

MethodSummary summarize(const std::vector<FactualResult>& results, std::string arm, std::string method,
                        std::string cost);

struct ArmSummary {
  std::string arm;
  double test_accuracy = 0.0;
  double oracle_agreement = 0.0;  // model vs oracle on the test split
  Index train_rows = 0;
  Index factuals = 0;
};

struct ExperimentReport {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ArmSummary> arms;
  std::vector<MethodSummary> summaries;
  std::optional<TheoremReport> theorem;
};

ExperimentReport run_experiment(ExperimentKind kind, const RunConfig& config);

}  // namespace nadv
