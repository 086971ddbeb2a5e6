#pragma once

#include <cstdint>
#include <vector>

#include "nadv/costs.hpp"
#include "nadv/data.hpp"

namespace nadv {

// Minimum-cost delta under d(delta) = delta^T S delta moving a linear score
// beta^T x + bias exactly onto target_score: delta = c S^{-1} beta with
// c = (target - f(x)) / (beta^T S^{-1} beta).
Vector analytical_recourse(const Vector& beta_hat, double bias, const Vector& x, double target_score,
                           const WeightVector& weights);

struct NadvConfig {
  NormP p = NormP::two;
  std::vector<Index> disc_indices;

  void validate() const;
};

struct NadvValue {
  double value = 0.0;
  bool degenerate = false;  // delta was zero
};

// Mass of delta on discriminative coordinates relative to its p-norm.
NadvValue nadv(const Vector& delta, const NadvConfig& config);

struct TheoremReport {
  NormP p = NormP::two;
  double expected_nadv_optimal = 0.0;
  double expected_nadv_identity = 0.0;
  std::vector<double> expected_nadv_random;
  double random_p95 = 0.0;  // 0 when there are no random weightings
  // NADV_1 of the same recourse vectors: the share of l1 mass on F_disc.
  double disc_share_optimal = 0.0;
  double disc_share_identity = 0.0;
  double mean_coefficient_snr = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

// Monte-Carlo estimate of E[NADV_p] for the optimal, identity and random
// log-uniform diagonal weightings over repeatedly resampled synthetic data.
TheoremReport verify_theorem1(const SyntheticSpec& spec, NormP p, const PdiscParams& params, int trials,
                              int num_random_weightings, std::uint64_t seed);

// Linear-interpolated percentile (q in [0, 100]) of a non-empty sample.
double percentile(std::vector<double> values, double q);

}  // namespace nadv
