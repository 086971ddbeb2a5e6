#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nadv/generators.hpp"
#include "nadv/models.hpp"
#include "nadv/oracle.hpp"

namespace nadv {

inline constexpr int kDefaultRetries = 5;
inline constexpr double kRetryGrowth = 1.1;

struct RetryStep {
  Vector x_prime;
  bool model_flipped = false;
  bool oracle_flipped = false;

  bool non_adversarial() const { return model_flipped && oracle_flipped; }
};

struct RetryTrace {
  Vector factual;
  Vector delta;
  std::vector<RetryStep> steps;  // r = 0..r_max
  std::optional<int> first_nonadv_r;
  int oracle_queries = 0;
  bool degenerate = false;  // delta == 0

  int r_max() const { return static_cast<int>(steps.size()) - 1; }
};

// 1.1^r, computed the same way for every caller.
double retry_scale(int r);

// Evaluates model and oracle at x + 1.1^r * delta for r = 0..r_max.
RetryTrace retry_trace(const ScoringModel& model, const Oracle& oracle, const Vector& x, const Vector& delta,
                       int r_max, int target = 1);

// Metrics of one (arm, method, cost) cell. Shares, retries and costs are
// computed over converged outputs only; failures to ever become
// non-adversarial count as r_max + 1 retries.
struct MethodSummary {
  std::string arm;
  std::string method;
  std::string cost;
  int r_max = 0;
  std::vector<double> share;  // cumulative non-adversarial share per r
  double mean_retries = 0.0;
  double validity_rate = 0.0;    // model flip at r = 0 over all evaluated outputs
  double model_flip_rate = 0.0;  // model flip at r = 0 over converged outputs
  double mean_l1 = 0.0;
  double mean_l2 = 0.0;
  int outputs = 0;     // generator outputs evaluated
  int converged = 0;   // of which converged
  int failures = 0;    // converged but never non-adversarial within r_max
  int degenerate = 0;  // zero-delta outputs
  int errors = 0;      // factuals whose generation raised (excluded); set by the runner
  long long oracle_queries = 0;
};

// traces[i] must belong to outputs[i]. Throws ContractError on empty or
// misaligned input. When nothing converged the means are NaN.
MethodSummary aggregate(const std::vector<RetryTrace>& traces, const std::vector<RecourseOutput>& outputs);

}  // namespace nadv
