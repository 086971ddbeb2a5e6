#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nadv/data.hpp"
#include "nadv/models.hpp"
#include "nadv/optim.hpp"

namespace nadv {

enum class ModelKind { linear_logistic, mlp };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

struct TrainConfig {
  ModelKind model_kind = ModelKind::mlp;
  double learning_rate = 1e-3;
  int epochs = 1000;
  int batch_size = 32;  // 0 = full batch
  double l2_penalty = 0.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::vector<Index> hidden = kDefaultHiddenUnits;
  std::uint64_t seed = 0;

  // [k, 30, 30, 2] ReLU network, Adam 1e-3, batch 32, 1000 passes.
  static TrainConfig mlp_defaults();
  // Logistic regression, l2 penalty 1, 5000 full-batch steps.
  static TrainConfig logistic_defaults();
  void validate() const;
};

struct AdvTrainConfig {
  TrainConfig base;
  double epsilon = 0.2;
  int inner_steps = 7;
  double inner_step_size = 0.05;  // epsilon / 4

  void validate() const;
};

// Seeded initial model: weights and biases uniform in +-1/sqrt(fan_in).
ScoringModel initial_model(Index input_dim, const TrainConfig& config);

// Mean cross-entropy plus l2_penalty / (2n) * ||weights||^2 (biases unpenalized).
double training_loss(const ScoringModel& model, const LabeledDataset& data, const TrainConfig& config);

// loss_history, when given, receives the full-data loss before every epoch
// and once after the last.
ScoringModel train(const LabeledDataset& dataset, const TrainConfig& config,
                   std::vector<double>* loss_history = nullptr);

// Min-max training: each minibatch is replaced by its PGD cross-entropy
// maximizer inside the epsilon l-infinity ball before the descent step.
ScoringModel train_adversarial(const LabeledDataset& dataset, const AdvTrainConfig& config);

// Inner attack of adversarial training: random start inside the ball, then
// signed-gradient ascent on cross-entropy with projection after each step.
Matrix pgd_perturb_batch(const ScoringModel& model, const Matrix& X, const std::vector<int>& y, double epsilon,
                         int steps, double step_size, Rng& rng);

double accuracy(const ScoringModel& model, const LabeledDataset& data);

}  // namespace nadv
