#include "nadv/optim.hpp"

namespace nadv {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd, adam or rmsprop)");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd:
      return "sgd";
    case OptimizerKind::adam:
      return "adam";
    case OptimizerKind::rmsprop:
      return "rmsprop";
  }
  return "?";
}

void Adam::step(Vector& params, const Vector& grad) {
  if (m_.size() != params.size()) {
    m_ = Vector::Zero(params.size());
    v_ = Vector::Zero(params.size());
    t_ = 0;
  }
  ++t_;
  m_ = p_.beta1 * m_ + (1.0 - p_.beta1) * grad;
  v_ = p_.beta2 * v_ + (1.0 - p_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
  params.array() -= p_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + p_.eps);
}

void RmsProp::step(Vector& params, const Vector& grad) {
  if (v_.size() != params.size()) v_ = Vector::Zero(params.size());
  v_ = p_.rho * v_ + (1.0 - p_.rho) * grad.cwiseProduct(grad);
  params.array() -= p_.lr * grad.array() / (v_.array().sqrt() + p_.eps);
}

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  switch (kind) {
    case OptimizerKind::sgd:
      return std::make_unique<Sgd>(lr);
    case OptimizerKind::adam:
      return std::make_unique<Adam>(AdamParams{lr});
    case OptimizerKind::rmsprop:
      return std::make_unique<RmsProp>(RmsPropParams{lr});
  }
  throw ConfigError("unknown optimizer");
}

}  // namespace nadv
