#include "nadv/lineartheory.hpp"

#include <algorithm>
#include <limits>

#include "nadv/models.hpp"

namespace nadv {

Vector analytical_recourse(const Vector& beta_hat, double bias, const Vector& x, double target_score,
                           const WeightVector& weights) {
  require(beta_hat.size() == x.size() && weights.size() == x.size(), "analytical_recourse: dimension mismatch");
  const Vector direction = weights.inverse().cwiseProduct(beta_hat);
  const double denom = beta_hat.dot(direction);
  if (!(denom > 0.0)) throw ContractError("analytical_recourse: beta^T S^-1 beta must be > 0");
  const double current = beta_hat.dot(x) + bias;
  return ((target_score - current) / denom) * direction;
}

void NadvConfig::validate() const {
  if (disc_indices.empty()) throw ConfigError("NADV needs a non-empty discriminative set");
}

NadvValue nadv(const Vector& delta, const NadvConfig& config) {
  config.validate();
  double disc = 0.0;
  for (Index i : config.disc_indices) {
    require(i >= 0 && i < delta.size(), "NADV: disc index out of range");
    disc += std::abs(delta[i]);
  }
  double norm = 0.0;
  switch (config.p) {
    case NormP::one:
      norm = delta.lpNorm<1>();
      break;
    case NormP::two:
      norm = delta.norm();
      break;
    case NormP::inf:
      norm = delta.lpNorm<Eigen::Infinity>();
      break;
  }
  if (norm == 0.0) return {0.0, true};
  return {disc / norm, false};
}

double percentile(std::vector<double> values, double q) {
  require(!values.empty(), "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

TheoremReport verify_theorem1(const SyntheticSpec& spec, NormP p, const PdiscParams& params, int trials,
                              int num_random_weightings, std::uint64_t seed) {
  spec.validate();
  params.validate();
  if (trials < 100) throw ConfigError("theorem.trials must be >= 100");
  if (num_random_weightings < 0) throw ConfigError("theorem.random_weightings must be >= 0");
  if (spec.disc_indices.empty()) throw ConfigError("theorem needs a non-empty discriminative set");

  // Random comparison weightings are drawn once and shared by every trial.
  Rng weight_rng(derive_seed(seed, 0x5eed));
  std::uniform_real_distribution<double> log_weight(std::log(1e-2), std::log(1e2));
  std::vector<WeightVector> random_weights;
  for (int r = 0; r < num_random_weightings; ++r) {
    Vector w(spec.k);
    for (Index i = 0; i < spec.k; ++i) w[i] = std::exp(log_weight(weight_rng));
    random_weights.emplace_back(std::move(w));
  }

  const NadvConfig measure{p, spec.disc_indices};
  const NadvConfig share{NormP::one, spec.disc_indices};
  TheoremReport report;
  report.p = p;
  report.trials = trials;
  report.seed = seed;
  report.expected_nadv_random.assign(random_weights.size(), 0.0);
  const WeightVector identity = WeightVector::ones(spec.k);
  double snr_total = 0.0;

  for (int t = 0; t < trials; ++t) {
    SyntheticSpec trial_spec = spec;
    trial_spec.seed = derive_seed(seed, static_cast<std::uint64_t>(t) + 1);
    const SyntheticData data = generate_synthetic(trial_spec);
    OlsFit fit = fit_ols(data.dataset.X, data.response);

    if (spec.sigma == 0.0) {
      // Exact interpolation leaves round-off on zero coefficients.
      const double scale = fit.beta_hat.lpNorm<Eigen::Infinity>();
      for (Index i = 0; i < spec.k; ++i)
        if (std::abs(fit.beta_hat[i]) <= 1e-9 * scale) fit.beta_hat[i] = 0.0;
    }
    for (Index i = 0; i < spec.k; ++i)
      fit.standard_errors[i] = std::max(fit.standard_errors[i], std::numeric_limits<double>::min());
    for (Index d : spec.disc_indices) snr_total += std::abs(fit.beta_hat[d]) / fit.standard_errors[d];

    const Vector& beta = data.true_beta;
    const Vector factual = -2.0 * beta / beta.norm();
    auto evaluate = [&](const WeightVector& w, const NadvConfig& cfg) {
      return nadv(analytical_recourse(fit.beta_hat, 0.0, factual, 0.0, w), cfg).value;
    };

    const WeightVector optimal = optimal_weights(fit.beta_hat, fit.standard_errors, p, params);
    report.expected_nadv_optimal += evaluate(optimal, measure);
    report.expected_nadv_identity += evaluate(identity, measure);
    report.disc_share_optimal += evaluate(optimal, share);
    report.disc_share_identity += evaluate(identity, share);
    for (std::size_t r = 0; r < random_weights.size(); ++r)
      report.expected_nadv_random[r] += evaluate(random_weights[r], measure);
  }

  const double n = static_cast<double>(trials);
  report.expected_nadv_optimal /= n;
  report.expected_nadv_identity /= n;
  report.disc_share_optimal /= n;
  report.disc_share_identity /= n;
  for (double& v : report.expected_nadv_random) v /= n;
  report.mean_coefficient_snr = snr_total / (n * static_cast<double>(spec.disc_indices.size()));
  if (!report.expected_nadv_random.empty()) report.random_p95 = percentile(report.expected_nadv_random, 95.0);
  return report;
}

}  // namespace nadv
