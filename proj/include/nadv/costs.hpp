#pragma once

#include <string>
#include <vector>

#include "nadv/common.hpp"

namespace nadv {

// Diagonal cost weights s_i > 0 where a coordinate may instead carry an
// explicit infinite-cost flag (never a float infinity).
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(Vector values);
  static WeightVector ones(Index k);

  Index size() const { return values_.size(); }
  bool is_infinite(Index i) const { return infinite_[static_cast<std::size_t>(i)]; }
  // Finite value; meaningless for infinite coordinates.
  double value(Index i) const { return values_[i]; }
  void set(Index i, double value);
  void set_infinite(Index i);
  Index finite_count() const;

  // S^{-1} with 0 on infinite coordinates.
  Vector inverse() const;
  // Mask of coordinates that must stay fixed.
  std::vector<bool> frozen() const { return infinite_; }
  // Rescales so that the smallest finite weight equals 1.
  WeightVector normalized() const;

 private:
  Vector values_;
  std::vector<bool> infinite_;
};

enum class CostKind { l1, l2, weighted_quadratic };

CostKind parse_cost_kind(const std::string& name);
std::string to_string(CostKind kind);

struct CostValue {
  double value = 0.0;  // +inf when an infinite-cost coordinate moved
  Vector gradient;     // w.r.t. x_prime; zero on infinite-cost coordinates
};

class CostFunction {
 public:
  static CostFunction l1() { return CostFunction(CostKind::l1, {}); }
  static CostFunction l2() { return CostFunction(CostKind::l2, {}); }
  static CostFunction weighted_quadratic(WeightVector weights);

  CostKind kind() const { return kind_; }
  const WeightVector& weights() const { return weights_; }
  bool is_frozen(Index i) const { return kind_ == CostKind::weighted_quadratic && weights_.is_infinite(i); }

  CostValue evaluate(const Vector& x, const Vector& x_prime) const;
  double value(const Vector& x, const Vector& x_prime) const { return evaluate(x, x_prime).value; }

 private:
  CostFunction(CostKind kind, WeightVector weights) : kind_(kind), weights_(std::move(weights)) {}
  CostKind kind_;
  WeightVector weights_;
};

struct PdiscParams {
  double alpha = 1.0;
  double q = 1.0;  // prior odds p(i not disc) / p(i disc)
  bool normalize_by_se = true;

  void validate() const;
};

// sigmoid(2 alpha b - alpha^2 + log q) with b = |beta_hat| / se (or |beta_hat|),
// kept inside the open interval (0, 1).
double p_disc(double beta_hat, double se, const PdiscParams& params);

enum class NormP { one, two, inf };

NormP parse_norm(const std::string& name);
std::string to_string(NormP p);

// Cost weights maximizing the expected NADV_p of linear-model recourse,
// normalized so the smallest finite weight is 1.
WeightVector optimal_weights(const Vector& beta_hat, const Vector& se, NormP p, const PdiscParams& params);

enum class BaselineWeighting { unit, squared_gradient, inverse_squared };

BaselineWeighting parse_baseline(const std::string& name);
std::string to_string(BaselineWeighting kind);

WeightVector baseline_weights(const Vector& beta_hat, BaselineWeighting kind);

}  // namespace nadv
