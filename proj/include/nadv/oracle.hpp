#pragma once

#include <variant>
#include <vector>

#include "nadv/data.hpp"

namespace nadv {

// Simulated expert committee: majority vote of the k nearest expert points,
// measured on the discriminative features only.
class KnnOracle {
 public:
  KnnOracle(Matrix expert_points, std::vector<int> expert_labels, int k, std::vector<Index> disc_indices,
            Index input_dim);

  int query(const Vector& x) const;
  int k() const { return k_; }
  Index input_dim() const { return input_dim_; }
  const std::vector<Index>& disc_indices() const { return disc_; }
  const Matrix& expert_points() const { return points_; }

 private:
  Matrix points_;  // m x |disc|
  std::vector<int> labels_;
  int k_;
  std::vector<Index> disc_;
  Index input_dim_;
};

// Noise-free linear ground truth 1[beta^T x > 0].
class LinearOracle {
 public:
  explicit LinearOracle(Vector true_beta);
  int query(const Vector& x) const;
  const Vector& beta() const { return beta_; }

 private:
  Vector beta_;
};

using Oracle = std::variant<KnnOracle, LinearOracle>;

inline constexpr int kDefaultOracleNeighbors = 5;

KnnOracle build_knn_oracle(const LabeledDataset& expert, const std::vector<Index>& disc_indices,
                           int k = kDefaultOracleNeighbors);

int oracle_query(const Oracle& oracle, const Vector& x);

}  // namespace nadv
