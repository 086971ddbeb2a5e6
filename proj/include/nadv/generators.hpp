#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nadv/costs.hpp"
#include "nadv/data.hpp"
#include "nadv/models.hpp"

namespace nadv {

enum class Method { scfe, dice, ar, cw, deepfool, pgd };

Method parse_method(const std::string& name);
std::string to_string(Method method);
const std::vector<Method>& all_methods();

struct GeneratorConfig {
  Method method = Method::scfe;
  double learning_rate = 0.1;
  int max_iterations = 100;
  double lambda = 0.1;
  int target = 1;
  // Logit margin SCFE and DiCE aim for on the target side of the boundary.
  double target_score = 0.5;
  double cw_c = 1.0;
  double deepfool_overshoot = 0.02;
  double pgd_epsilon = 2.0;
  double pgd_step_size = 0.1;
  int dice_num_cfs = 2;
  double dice_diversity_weight = 0.5;
  double dice_init_scale = 0.01;
  int ar_grid_bins = 10;
  int ar_max_changed = 2;
  std::uint64_t seed = 0;

  // Per-method hyperparameter defaults.
  static GeneratorConfig defaults(Method method);
  void validate() const;
};

// Per-feature box and action set shared by all factuals of a run.
struct GenerationContext {
  Vector lower;
  Vector upper;
  std::vector<bool> actionable;

  // Observed min/max of the training split; actionable flags from the schema.
  static GenerationContext from_dataset(const LabeledDataset& train);
  static GenerationContext unbounded(Index k);
};

struct RecourseOutput {
  Vector x_prime;
  Vector delta;
  bool converged = false;
  int iterations_used = 0;
  double cost_value = 0.0;
  Method method = Method::scfe;
};

struct DiceResult {
  std::vector<RecourseOutput> candidates;
  std::size_t selected = 0;
};

RecourseOutput scfe(const ScoringModel& model, const Vector& x, const CostFunction& cost,
                    const GeneratorConfig& config, const GenerationContext& context);
DiceResult dice(const ScoringModel& model, const Vector& x, const CostFunction& cost, const GeneratorConfig& config,
                const GenerationContext& context);
RecourseOutput ar_discrete(const ScoringModel& model, const Vector& x, const CostFunction& cost,
                           const GeneratorConfig& config, const GenerationContext& context);
RecourseOutput cw(const ScoringModel& model, const Vector& x, const CostFunction& cost, const GeneratorConfig& config,
                  const GenerationContext& context);
RecourseOutput deepfool(const ScoringModel& model, const Vector& x, const GeneratorConfig& config,
                        const GenerationContext& context);
RecourseOutput pgd(const ScoringModel& model, const Vector& x, const CostFunction& cost, const GeneratorConfig& config,
                   const GenerationContext& context);

// Dispatches on config.method; DiCE returns its sampled candidate.
RecourseOutput generate(const ScoringModel& model, const Vector& x, const CostFunction& cost,
                        const GeneratorConfig& config, const GenerationContext& context);

}  // namespace nadv
