#include "nadv/training.hpp"

#include <algorithm>
#include <numeric>

namespace nadv {

namespace {

constexpr std::uint64_t kShuffleStream = 0;
constexpr std::uint64_t kAttackStream = 1;
constexpr std::uint64_t kInitStream = 2;

// Gradient of the weight penalty in parameters() layout (biases excluded).
Vector penalty_gradient(const ScoringModel& model, double coefficient) {
  Vector params = model.parameters();
  if (model.is_linear()) {
    params[params.size() - 1] = 0.0;
    return coefficient * params;
  }
  Index offset = 0;
  for (const auto& layer : model.mlp().layers) {
    offset += layer.weights.size();
    params.segment(offset, layer.bias.size()).setZero();
    offset += layer.bias.size();
  }
  return coefficient * params;
}

double weight_norm_squared(const ScoringModel& model) {
  if (model.is_linear()) return model.linear().weights.squaredNorm();
  double total = 0.0;
  for (const auto& layer : model.mlp().layers) total += layer.weights.squaredNorm();
  return total;
}

Vector cross_entropy_upstream(const Vector& scores, const std::vector<int>& y) {
  Vector up(scores.size());
  for (Index i = 0; i < scores.size(); ++i) up[i] = sigmoid(scores[i]) - y[static_cast<std::size_t>(i)];
  return up;
}

struct Batch {
  Matrix X;
  std::vector<int> y;
};

Batch gather(const LabeledDataset& data, const std::vector<Index>& order, std::size_t begin, std::size_t end) {
  Batch b;
  b.X.resize(static_cast<Index>(end - begin), data.k());
  b.y.resize(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    b.X.row(static_cast<Index>(i - begin)) = data.X.row(order[i]);
    b.y[i - begin] = data.y[static_cast<std::size_t>(order[i])];
  }
  return b;
}

// Shared loop for plain and adversarial training.
ScoringModel run_training(const LabeledDataset& data, const TrainConfig& config, const AdvTrainConfig* adv,
                          std::vector<double>* loss_history) {
  config.validate();
  if (adv) adv->validate();
  data.validate();

  ScoringModel model = initial_model(data.k(), config);
  if (config.epochs == 0) return model;

  const auto n = static_cast<std::size_t>(data.n());
  const std::size_t batch = config.batch_size <= 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(config.batch_size));
  const double penalty = config.l2_penalty / static_cast<double>(n);
  auto optimizer = make_optimizer(config.optimizer, config.learning_rate);
  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  Rng attack_rng(derive_seed(config.seed, kAttackStream));

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Vector params = model.parameters();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (loss_history) loss_history->push_back(training_loss(model, data, config));
    if (batch < n) std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(n, begin + batch);
      Batch b = gather(data, order, begin, end);
      if (adv) b.X = pgd_perturb_batch(model, b.X, b.y, adv->epsilon, adv->inner_steps, adv->inner_step_size, attack_rng);
      const Vector scores = model.scores(b.X);
      const double inv = 1.0 / static_cast<double>(end - begin);
      Vector grad = model.parameter_gradient(b.X, cross_entropy_upstream(scores, b.y)) * inv;
      if (penalty > 0.0) grad += penalty_gradient(model, penalty);
      if (!grad.allFinite())
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + " (non-finite gradient)");
      optimizer->step(params, grad);
      model.set_parameters(params);
    }
    if (!params.allFinite()) throw NumericalError("training diverged at epoch " + std::to_string(epoch));
  }
  if (loss_history) {
    const double final_loss = training_loss(model, data, config);
    if (!std::isfinite(final_loss)) throw NumericalError("training produced a non-finite loss");
    loss_history->push_back(final_loss);
  }
  return model;
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  if (name == "mlp") return ModelKind::mlp;
  if (name == "linear_logistic" || name == "logistic" || name == "linear") return ModelKind::linear_logistic;
  throw ConfigError("unknown model kind '" + name + "' (expected mlp or linear_logistic)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::mlp ? "mlp" : "linear_logistic"; }

TrainConfig TrainConfig::mlp_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::logistic_defaults() {
  TrainConfig c;
  c.model_kind = ModelKind::linear_logistic;
  c.learning_rate = 0.5;
  c.epochs = 5000;
  c.batch_size = 0;
  c.l2_penalty = 1.0;
  c.optimizer = OptimizerKind::sgd;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("model.learning_rate must be > 0");
  if (epochs < 0) throw ConfigError("model.epochs must be >= 0");
  if (batch_size < 0) throw ConfigError("model.batch_size must be >= 0");
  if (!(l2_penalty >= 0.0)) throw ConfigError("model.l2_penalty must be >= 0");
  if (model_kind == ModelKind::mlp)
    for (Index h : hidden)
      if (h < 1) throw ConfigError("model.hidden units must be >= 1");
}

void AdvTrainConfig::validate() const {
  base.validate();
  if (!(epsilon > 0.0)) throw ConfigError("model.adv_epsilon must be > 0");
  if (inner_steps < 1) throw ConfigError("model.adv_inner_steps must be >= 1");
  if (!(inner_step_size > 0.0)) throw ConfigError("model.adv_inner_step_size must be > 0");
}

ScoringModel initial_model(Index input_dim, const TrainConfig& config) {
  require(input_dim >= 1, "model input dimension must be >= 1");
  Rng rng(derive_seed(config.seed, kInitStream));
  auto fill = [&rng](auto& m, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  };
  if (config.model_kind == ModelKind::linear_logistic) {
    LinearModel m;
    m.weights.resize(input_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    fill(m.weights, bound);
    Vector b(1);
    fill(b, bound);
    m.bias = b[0];
    return ScoringModel(std::move(m));
  }
  std::vector<Index> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(2);
  MlpModel m = MlpModel::zeros(sizes);
  for (auto& layer : m.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    fill(layer.weights, bound);
    fill(layer.bias, bound);
  }
  return ScoringModel(std::move(m));
}

double training_loss(const ScoringModel& model, const LabeledDataset& data, const TrainConfig& config) {
  const Vector scores = model.scores(data.X);
  double total = 0.0;
  for (Index i = 0; i < scores.size(); ++i)
    total += Objective::cross_entropy(data.y[static_cast<std::size_t>(i)]).value(scores[i]);
  const double n = static_cast<double>(data.n());
  return total / n + config.l2_penalty / (2.0 * n) * weight_norm_squared(model);
}

ScoringModel train(const LabeledDataset& dataset, const TrainConfig& config, std::vector<double>* loss_history) {
  return run_training(dataset, config, nullptr, loss_history);
}

ScoringModel train_adversarial(const LabeledDataset& dataset, const AdvTrainConfig& config) {
  return run_training(dataset, config.base, &config, nullptr);
}

Matrix pgd_perturb_batch(const ScoringModel& model, const Matrix& X, const std::vector<int>& y, double epsilon,
                         int steps, double step_size, Rng& rng) {
  std::uniform_real_distribution<double> u(-epsilon, epsilon);
  Matrix adv = X;
  for (Index i = 0; i < adv.size(); ++i) adv.data()[i] += u(rng);
  for (int s = 0; s < steps; ++s) {
    const Matrix grad = model.input_gradients(adv, cross_entropy_upstream(model.scores(adv), y));
    adv += step_size * grad.array().sign().matrix();
    adv = adv.array().max(X.array() - epsilon).min(X.array() + epsilon).matrix();
  }
  return adv;
}

double accuracy(const ScoringModel& model, const LabeledDataset& data) {
  const Vector scores = model.scores(data.X);
  Index correct = 0;
  for (Index i = 0; i < scores.size(); ++i)
    correct += (scores[i] > 0.0 ? 1 : 0) == data.y[static_cast<std::size_t>(i)];
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace nadv
