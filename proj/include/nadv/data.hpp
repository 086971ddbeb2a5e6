#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nadv/common.hpp"

namespace nadv {

enum class FeatureKind { continuous, categorical, one_hot };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  // Category tokens of a categorical feature; raw values are stored as codes
  // into this list.
  std::vector<std::string> categories;
  // For one-hot members: the group id and the category this column encodes.
  int group = -1;
  std::string category;
  bool actionable = true;
  bool discriminative = false;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<Feature> features);

  // Plain continuous schema x0..x{k-1}; disc marks discriminative features.
  static FeatureSchema continuous(std::size_t k, const std::vector<Index>& disc);

  std::size_t size() const { return features_.size(); }
  const Feature& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<Feature>& features() const { return features_; }

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<Index> discriminative_indices() const;
  std::vector<Index> actionable_indices() const;
  std::vector<std::string> names() const;
  bool has_categorical() const;

  // Replaces the discriminative flags with exactly the named features.
  void set_discriminative(const std::vector<std::string>& names);

  // Throws ConfigError on duplicate names or malformed one-hot groups.
  void validate() const;

 private:
  std::vector<Feature> features_;
};

struct LabeledDataset {
  Matrix X;
  std::vector<int> y;
  FeatureSchema schema;

  Index n() const { return X.rows(); }
  Index k() const { return X.cols(); }
  LabeledDataset subset(const std::vector<Index>& rows) const;
  // Throws ContractError when shapes or labels are inconsistent.
  void validate() const;
};

// Affine standardization of continuous columns plus the one-hot layout
// produced by preprocess().
class StandardizeTransform {
 public:
  struct Column {
    Index raw_index = 0;
    Index out_index = 0;
    double mean = 0.0;
    double std = 1.0;
    bool constant = false;
  };

  const std::vector<Column>& columns() const { return columns_; }
  const FeatureSchema& raw_schema() const { return raw_schema_; }
  const FeatureSchema& output_schema() const { return out_schema_; }
  // Columns flagged constant on the fit rows (left unscaled).
  std::vector<std::string> constant_features() const;

  LabeledDataset apply(const LabeledDataset& raw) const;
  // Maps processed rows back to raw feature values (categorical codes via the
  // active one-hot member).
  Matrix inverse(const Matrix& processed) const;

 private:
  friend std::pair<LabeledDataset, StandardizeTransform> preprocess(const LabeledDataset&,
                                                                    const std::vector<Index>&);
  struct Category {
    Index raw_index;
    Index first_out;
    Index count;
  };
  std::vector<Column> columns_;
  std::vector<Category> categories_;
  FeatureSchema raw_schema_;
  FeatureSchema out_schema_;
};

struct SyntheticSpec {
  Index n = 1000;
  Index k = 10;
  std::vector<Index> disc_indices{0, 1, 2};
  double alpha = 1.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  LabeledDataset dataset;
  Vector true_beta;
  // beta^T x + noise per row, before thresholding.
  Vector response;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

LabeledDataset load_csv(const std::string& path, const FeatureSchema& schema,
                        const std::string& label_column);

// Standardizes continuous features with statistics of fit_rows and one-hot
// expands categoricals.
std::pair<LabeledDataset, StandardizeTransform> preprocess(const LabeledDataset& dataset,
                                                           const std::vector<Index>& fit_rows);

struct SplitFractions {
  double expert = 0.2;
  double train = 0.6;
  double test = 0.2;
};

struct ThreeWaySplit {
  LabeledDataset expert;
  LabeledDataset train;
  LabeledDataset test;
  std::array<std::vector<Index>, 3> rows;
};

ThreeWaySplit split_three_way(const LabeledDataset& dataset, const SplitFractions& fractions,
                              std::uint64_t seed);

LabeledDataset flip_labels(const LabeledDataset& dataset, double fraction, std::uint64_t seed);

}  // namespace nadv
