#include "nadv/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace nadv {

KnnOracle::KnnOracle(Matrix expert_points, std::vector<int> expert_labels, int k, std::vector<Index> disc_indices,
                     Index input_dim)
    : points_(std::move(expert_points)),
      labels_(std::move(expert_labels)),
      k_(k),
      disc_(std::move(disc_indices)),
      input_dim_(input_dim) {
  if (k_ < 1) throw ConfigError("oracle k must be >= 1");
  if (k_ % 2 == 0)
    throw ConfigError("oracle k must be odd to avoid tied votes; use k = " + std::to_string(k_ - 1) + " or " +
                      std::to_string(k_ + 1));
  if (points_.rows() == 0) throw ConfigError("oracle expert split is empty");
  if (k_ > points_.rows())
    throw ConfigError("oracle k = " + std::to_string(k_) + " exceeds expert size " + std::to_string(points_.rows()));
  if (disc_.empty()) throw ConfigError("oracle needs at least one discriminative feature");
  require(static_cast<std::size_t>(points_.rows()) == labels_.size(), "expert labels do not match points");
  require(points_.cols() == static_cast<Index>(disc_.size()), "expert points do not match disc features");
}

int KnnOracle::query(const Vector& x) const {
  require(x.size() == input_dim_, "oracle query dimension mismatch");
  Vector projected(static_cast<Index>(disc_.size()));
  for (std::size_t j = 0; j < disc_.size(); ++j) projected[static_cast<Index>(j)] = x[disc_[j]];

  const Vector dist = (points_.rowwise() - projected.transpose()).rowwise().squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(points_.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  // Ties on distance go to the lower expert row index.
  std::partial_sort(order.begin(), order.begin() + k_, order.end(), [&dist](Index a, Index b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  });
  int positives = 0;
  for (int i = 0; i < k_; ++i) positives += labels_[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  return 2 * positives > k_ ? 1 : 0;
}

LinearOracle::LinearOracle(Vector true_beta) : beta_(std::move(true_beta)) {
  if (beta_.size() == 0 || beta_.isZero(0.0)) throw ConfigError("linear oracle needs a nonzero beta");
}

int LinearOracle::query(const Vector& x) const {
  require(x.size() == beta_.size(), "oracle query dimension mismatch");
  return beta_.dot(x) > 0.0 ? 1 : 0;
}

KnnOracle build_knn_oracle(const LabeledDataset& expert, const std::vector<Index>& disc_indices, int k) {
  if (expert.n() == 0) throw ConfigError("oracle expert split is empty");
  for (Index d : disc_indices)
    if (d < 0 || d >= expert.k()) throw ConfigError("oracle disc index out of range");
  Matrix points(expert.n(), static_cast<Index>(disc_indices.size()));
  for (std::size_t j = 0; j < disc_indices.size(); ++j) points.col(static_cast<Index>(j)) = expert.X.col(disc_indices[j]);
  return KnnOracle(std::move(points), expert.y, k, disc_indices, expert.k());
}

int oracle_query(const Oracle& oracle, const Vector& x) {
  return std::visit([&x](const auto& o) { return o.query(x); }, oracle);
}

}  // namespace nadv
