#include "nadv/evaluation.hpp"

#include <cmath>
#include <limits>

namespace nadv {

double retry_scale(int r) { return std::pow(kRetryGrowth, r); }

RetryTrace retry_trace(const ScoringModel& model, const Oracle& oracle, const Vector& x, const Vector& delta,
                       int r_max, int target) {
  require(r_max >= 0, "retry_trace: r_max must be >= 0");
  require(x.size() == delta.size(), "retry_trace: dimension mismatch");
  require(delta.allFinite(), "retry_trace: delta must be finite");
  RetryTrace trace;
  trace.factual = x;
  trace.delta = delta;
  trace.degenerate = delta.isZero(0.0);
  trace.steps.reserve(static_cast<std::size_t>(r_max) + 1);
  for (int r = 0; r <= r_max; ++r) {
    RetryStep step;
    step.x_prime = x + retry_scale(r) * delta;
    step.model_flipped = model.predict(step.x_prime).label == target;
    step.oracle_flipped = oracle_query(oracle, step.x_prime) == target;
    ++trace.oracle_queries;
    if (trace.degenerate) step.model_flipped = step.oracle_flipped = false;
    if (!trace.first_nonadv_r && step.non_adversarial()) trace.first_nonadv_r = r;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

MethodSummary aggregate(const std::vector<RetryTrace>& traces, const std::vector<RecourseOutput>& outputs) {
  require(!traces.empty(), "aggregate: no traces");
  require(traces.size() == outputs.size(), "aggregate: traces and outputs are not aligned");
  const int r_max = traces.front().r_max();
  for (const auto& t : traces) require(t.r_max() == r_max, "aggregate: traces disagree on r_max");

  MethodSummary s;
  s.r_max = r_max;
  s.share.assign(static_cast<std::size_t>(r_max) + 1, 0.0);
  s.outputs = static_cast<int>(outputs.size());
  double retries = 0.0, l1 = 0.0, l2 = 0.0;
  int valid = 0, flipped_converged = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const RetryTrace& t = traces[i];
    s.oracle_queries += t.oracle_queries;
    s.degenerate += t.degenerate ? 1 : 0;
    valid += t.steps.front().model_flipped ? 1 : 0;
    if (!outputs[i].converged) continue;
    ++s.converged;
    flipped_converged += t.steps.front().model_flipped ? 1 : 0;
    l1 += t.delta.lpNorm<1>();
    l2 += t.delta.norm();
    if (t.first_nonadv_r) {
      retries += *t.first_nonadv_r;
      for (int r = *t.first_nonadv_r; r <= r_max; ++r) s.share[static_cast<std::size_t>(r)] += 1.0;
    } else {
      retries += r_max + 1;
      ++s.failures;
    }
  }
  s.validity_rate = static_cast<double>(valid) / static_cast<double>(s.outputs);
  if (s.converged == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean_retries = s.model_flip_rate = s.mean_l1 = s.mean_l2 = nan;
    return s;
  }
  const double c = s.converged;
  for (double& v : s.share) v /= c;
  s.mean_retries = retries / c;
  s.model_flip_rate = flipped_converged / c;
  s.mean_l1 = l1 / c;
  s.mean_l2 = l2 / c;
  return s;
}

}  // namespace nadv
