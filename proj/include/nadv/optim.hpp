#pragma once

#include <memory>
#include <string>

#include "nadv/common.hpp"

namespace nadv {

enum class OptimizerKind { sgd, adam, rmsprop };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

// First-order minimizer over a flat parameter vector. Stateful; one instance
// per optimization run.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(Vector& params, const Vector& grad) = 0;
};

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(Vector& params, const Vector& grad) override { params -= lr_ * grad; }

 private:
  double lr_;
};

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam final : public Optimizer {
 public:
  explicit Adam(AdamParams p) : p_(p) {}
  void step(Vector& params, const Vector& grad) override;
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

 private:
  AdamParams p_;
  Vector m_, v_;
  long t_ = 0;
};

struct RmsPropParams {
  double lr = 1e-2;
  double rho = 0.99;
  double eps = 1e-8;
};

class RmsProp final : public Optimizer {
 public:
  explicit RmsProp(RmsPropParams p) : p_(p) {}
  void step(Vector& params, const Vector& grad) override;
  const Vector& square_average() const { return v_; }

 private:
  RmsPropParams p_;
  Vector v_;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr);

}  // namespace nadv
