#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nadv/common.hpp"

namespace nadv {

struct Prediction {
  double score = 0.0;
  double probability = 0.5;
  int label = 0;
};

// Scalar objectives whose input gradient generators need.
struct Objective {
  enum class Kind { score, cross_entropy, squared_score_error };
  Kind kind = Kind::score;
  double target = 0.0;

  static Objective raw_score() { return {Kind::score, 0.0}; }
  static Objective cross_entropy(int label) { return {Kind::cross_entropy, static_cast<double>(label)}; }
  static Objective squared_score_error(double target_score) { return {Kind::squared_score_error, target_score}; }

  double value(double score) const;
  double derivative(double score) const;
};

struct LinearModel {
  Vector weights;
  double bias = 0.0;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
};

// ReLU network with two output logits; score = logit[1] - logit[0].
struct MlpModel {
  std::vector<DenseLayer> layers;

  static MlpModel zeros(const std::vector<Index>& sizes);
  std::vector<Index> sizes() const;
  void validate() const;
};

inline const std::vector<Index> kDefaultHiddenUnits{30, 30};

class ScoringModel {
 public:
  ScoringModel(LinearModel model);
  ScoringModel(MlpModel model);

  bool is_linear() const { return std::holds_alternative<LinearModel>(model_); }
  const LinearModel& linear() const { return std::get<LinearModel>(model_); }
  const MlpModel& mlp() const { return std::get<MlpModel>(model_); }

  Index input_dim() const;
  double score(const Vector& x) const;
  Prediction predict(const Vector& x) const;
  Vector scores(const Matrix& X) const;

  Vector input_gradient(const Vector& x, const Objective& objective) const;

  // Batch backpropagation. Rows of X are samples, upstream[i] = dLoss/dscore_i.
  // Returns gradients summed over the batch, flattened in parameters() order.
  Vector parameter_gradient(const Matrix& X, const Vector& upstream) const;
  // Per-sample input gradients, one row per sample.
  Matrix input_gradients(const Matrix& X, const Vector& upstream) const;

  Index parameter_count() const;
  Vector parameters() const;
  void set_parameters(const Vector& flat);

 private:
  void check_dim(Index k) const;
  std::variant<LinearModel, MlpModel> model_;
};

struct OlsFit {
  Vector beta_hat;
  Vector standard_errors;
  double residual_variance = 0.0;
  bool ridge_applied = false;
};

// Least squares via Cholesky on X^T X; standard errors use the diagonal
// simplification sqrt(sigma_hat^2 / sum_j X_ji^2).
OlsFit fit_ols(const Matrix& X, const Vector& y);

// Versioned key=value text with 17 significant digits per weight.
std::string serialize_model(const ScoringModel& model);
ScoringModel deserialize_model(const std::string& text);
void save_model(const ScoringModel& model, const std::string& path);
ScoringModel load_model(const std::string& path);

}  // namespace nadv
