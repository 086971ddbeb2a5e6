#include "nadv/costs.hpp"

#include <limits>

namespace nadv {

WeightVector::WeightVector(Vector values) : values_(std::move(values)), infinite_(static_cast<std::size_t>(values_.size()), false) {
  for (Index i = 0; i < values_.size(); ++i)
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
      throw ContractError("cost weights must be finite and > 0; use set_infinite for +inf");
}

WeightVector WeightVector::ones(Index k) { return WeightVector(Vector::Ones(k)); }

void WeightVector::set(Index i, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ContractError("cost weight must be finite and > 0");
  values_[i] = value;
  infinite_[static_cast<std::size_t>(i)] = false;
}

void WeightVector::set_infinite(Index i) {
  values_[i] = 1.0;
  infinite_[static_cast<std::size_t>(i)] = true;
}

Index WeightVector::finite_count() const {
  Index count = 0;
  for (bool inf : infinite_) count += inf ? 0 : 1;
  return count;
}

Vector WeightVector::inverse() const {
  Vector inv(values_.size());
  for (Index i = 0; i < values_.size(); ++i) inv[i] = is_infinite(i) ? 0.0 : 1.0 / values_[i];
  return inv;
}

WeightVector WeightVector::normalized() const {
  double smallest = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < size(); ++i)
    if (!is_infinite(i)) smallest = std::min(smallest, values_[i]);
  if (!std::isfinite(smallest)) throw ContractError("weight vector has no finite coordinate");
  WeightVector out = *this;
  for (Index i = 0; i < size(); ++i)
    if (!is_infinite(i)) out.values_[i] = values_[i] / smallest;
  return out;
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "l1") return CostKind::l1;
  if (name == "l2") return CostKind::l2;
  if (name == "weighted_quadratic") return CostKind::weighted_quadratic;
  throw ConfigError("unknown cost kind '" + name + "' (expected l1, l2 or weighted_quadratic)");
}

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::l1:
      return "l1";
    case CostKind::l2:
      return "l2";
    case CostKind::weighted_quadratic:
      return "weighted_quadratic";
  }
  return "?";
}

CostFunction CostFunction::weighted_quadratic(WeightVector weights) {
  if (weights.size() == 0 || weights.finite_count() == 0)
    throw ContractError("weighted cost needs at least one finite weight");
  return CostFunction(CostKind::weighted_quadratic, std::move(weights));
}

CostValue CostFunction::evaluate(const Vector& x, const Vector& x_prime) const {
  require(x.size() == x_prime.size(), "cost: dimension mismatch");
  const Vector delta = x_prime - x;
  CostValue out;
  switch (kind_) {
    case CostKind::l1:
      out.value = delta.lpNorm<1>();
      out.gradient = delta.array().sign().matrix();
      break;
    case CostKind::l2: {
      out.value = delta.norm();
      out.gradient = out.value > 0.0 ? Vector(delta / out.value) : Vector::Zero(delta.size());
      break;
    }
    case CostKind::weighted_quadratic: {
      require(weights_.size() == delta.size(), "cost: weight dimension mismatch");
      out.gradient = Vector::Zero(delta.size());
      for (Index i = 0; i < delta.size(); ++i) {
        if (weights_.is_infinite(i)) {
          if (delta[i] != 0.0) out.value = std::numeric_limits<double>::infinity();
          continue;
        }
        if (std::isfinite(out.value)) out.value += weights_.value(i) * delta[i] * delta[i];
        out.gradient[i] = 2.0 * weights_.value(i) * delta[i];
      }
      break;
    }
  }
  return out;
}

void PdiscParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("cost.alpha must be > 0");
  if (!(q > 0.0)) throw ConfigError("cost.q must be > 0");
}

double p_disc(double beta_hat, double se, const PdiscParams& params) {
  params.validate();
  double b = std::abs(beta_hat);
  if (params.normalize_by_se) {
    require(se > 0.0, "p_disc: standard error must be > 0 when normalizing");
    b /= se;
  }
  const double z = 2.0 * params.alpha * b - params.alpha * params.alpha + std::log(params.q);
  const double p = sigmoid(z);
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

NormP parse_norm(const std::string& name) {
  if (name == "1") return NormP::one;
  if (name == "2") return NormP::two;
  if (name == "inf" || name == "infinity") return NormP::inf;
  throw ConfigError("unknown norm p '" + name + "' (expected 1, 2 or inf)");
}

std::string to_string(NormP p) {
  switch (p) {
    case NormP::one:
      return "1";
    case NormP::two:
      return "2";
    case NormP::inf:
      return "inf";
  }
  return "?";
}

WeightVector optimal_weights(const Vector& beta_hat, const Vector& se, NormP p, const PdiscParams& params) {
  params.validate();
  require(beta_hat.size() >= 1, "optimal_weights: empty coefficient vector");
  require(!params.normalize_by_se || se.size() == beta_hat.size(), "optimal_weights: se size mismatch");
  if (beta_hat.isZero(0.0)) throw ContractError("optimal_weights: all coefficients are zero");

  const Index k = beta_hat.size();
  auto prob = [&](Index i) { return p_disc(beta_hat[i], params.normalize_by_se ? se[i] : 1.0, params); };
  WeightVector s = WeightVector::ones(k);

  switch (p) {
    case NormP::one: {
      Index best = 0;
      double best_p = -1.0;
      for (Index i = 0; i < k; ++i) {
        if (beta_hat[i] == 0.0) continue;
        const double pi = prob(i);
        if (pi > best_p) {
          best_p = pi;
          best = i;
        }
      }
      for (Index i = 0; i < k; ++i)
        if (i != best) s.set_infinite(i);
      break;
    }
    case NormP::two:
      for (Index i = 0; i < k; ++i) {
        if (beta_hat[i] == 0.0)
          s.set_infinite(i);
        else
          s.set(i, std::abs(beta_hat[i]) / prob(i));
      }
      break;
    case NormP::inf:
      for (Index i = 0; i < k; ++i) {
        if (beta_hat[i] == 0.0)
          s.set_infinite(i);
        else
          s.set(i, std::abs(beta_hat[i]));
      }
      break;
  }
  return s.normalized();
}

BaselineWeighting parse_baseline(const std::string& name) {
  if (name == "unit") return BaselineWeighting::unit;
  if (name == "squared_gradient") return BaselineWeighting::squared_gradient;
  if (name == "inverse_squared") return BaselineWeighting::inverse_squared;
  throw ConfigError("unknown baseline weighting '" + name + "'");
}

std::string to_string(BaselineWeighting kind) {
  switch (kind) {
    case BaselineWeighting::unit:
      return "unit";
    case BaselineWeighting::squared_gradient:
      return "squared_gradient";
    case BaselineWeighting::inverse_squared:
      return "inverse_squared";
  }
  return "?";
}

WeightVector baseline_weights(const Vector& beta_hat, BaselineWeighting kind) {
  // Squared-gradient weights are floored so that s_i > 0 holds for zero coefficients.
  constexpr double kFloor = 1e-12;
  WeightVector s = WeightVector::ones(beta_hat.size());
  for (Index i = 0; i < beta_hat.size(); ++i) {
    const double b2 = beta_hat[i] * beta_hat[i];
    switch (kind) {
      case BaselineWeighting::unit:
        break;
      case BaselineWeighting::squared_gradient:
        s.set(i, std::max(b2, kFloor));
        break;
      case BaselineWeighting::inverse_squared:
        if (b2 == 0.0 || !std::isfinite(1.0 / b2))
          s.set_infinite(i);
        else
          s.set(i, 1.0 / b2);
        break;
    }
  }
  return s;
}

}  // namespace nadv
