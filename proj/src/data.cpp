#include "nadv/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace nadv {

FeatureSchema::FeatureSchema(std::vector<Feature> features) : features_(std::move(features)) {
  validate();
}

FeatureSchema FeatureSchema::continuous(std::size_t k, const std::vector<Index>& disc) {
  std::vector<Feature> features(k);
  for (std::size_t i = 0; i < k; ++i) features[i].name = "x" + std::to_string(i);
  for (Index d : disc) {
    if (d < 0 || static_cast<std::size_t>(d) >= k)
      throw ConfigError("discriminative index " + std::to_string(d) + " out of range");
    features[static_cast<std::size_t>(d)].discriminative = true;
  }
  return FeatureSchema(std::move(features));
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

std::vector<Index> FeatureSchema::discriminative_indices() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].discriminative) out.push_back(static_cast<Index>(i));
  return out;
}

std::vector<Index> FeatureSchema::actionable_indices() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].actionable) out.push_back(static_cast<Index>(i));
  return out;
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

bool FeatureSchema::has_categorical() const {
  return std::any_of(features_.begin(), features_.end(),
                     [](const Feature& f) { return f.kind == FeatureKind::categorical; });
}

void FeatureSchema::set_discriminative(const std::vector<std::string>& names) {
  for (auto& f : features_) f.discriminative = false;
  for (const auto& name : names) {
    bool found = false;
    for (auto& f : features_) {
      // A categorical parent name selects all of its one-hot members.
      const bool member = f.kind == FeatureKind::one_hot &&
                          f.name.size() > name.size() + 1 && f.name.compare(0, name.size(), name) == 0 &&
                          f.name[name.size()] == '=';
      if (f.name == name || member) {
        f.discriminative = true;
        found = true;
      }
    }
    if (!found) throw ConfigError("unknown discriminative feature '" + name + "'");
  }
}

void FeatureSchema::validate() const {
  std::unordered_set<std::string> seen;
  std::set<int> groups;
  for (const auto& f : features_) {
    if (f.name.empty()) throw ConfigError("feature with empty name");
    if (!seen.insert(f.name).second) throw ConfigError("duplicate feature name '" + f.name + "'");
    if (f.kind == FeatureKind::categorical && f.categories.empty())
      throw ConfigError("categorical feature '" + f.name + "' has no categories");
    if (f.kind == FeatureKind::one_hot) {
      if (f.group < 0) throw ConfigError("one-hot member '" + f.name + "' has no group");
      groups.insert(f.group);
    }
  }
  // Members of a group must be contiguous so that each belongs to exactly one block.
  for (int g : groups) {
    std::size_t first = features_.size(), last = 0, count = 0;
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (features_[i].kind == FeatureKind::one_hot && features_[i].group == g) {
        first = std::min(first, i);
        last = i;
        ++count;
      }
    }
    if (last - first + 1 != count)
      throw ConfigError("one-hot group " + std::to_string(g) + " is not contiguous");
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<Index>& rows) const {
  LabeledDataset out;
  out.schema = schema;
  out.X.resize(static_cast<Index>(rows.size()), X.cols());
  out.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Index>(i)) = X.row(rows[i]);
    out.y[i] = y[static_cast<std::size_t>(rows[i])];
  }
  return out;
}

void LabeledDataset::validate() const {
  require(X.rows() >= 1 && X.cols() >= 1, "dataset must have n >= 1 and k >= 1");
  require(static_cast<std::size_t>(X.rows()) == y.size(), "label count does not match rows");
  require(static_cast<std::size_t>(X.cols()) == schema.size(), "schema size does not match columns");
  require(X.allFinite(), "dataset contains non-finite values");
  for (int label : y) require(label == 0 || label == 1, "labels must be 0 or 1");
}

// ---------------------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (n < 1) throw ConfigError("synthetic n must be >= 1");
  if (k < 1) throw ConfigError("synthetic k must be >= 1");
  if (!(alpha > 0)) throw ConfigError("synthetic alpha must be > 0");
  if (!(sigma >= 0)) throw ConfigError("synthetic sigma must be >= 0");
  std::set<Index> unique;
  for (Index d : disc_indices) {
    if (d < 0 || d >= k) throw ConfigError("disc index " + std::to_string(d) + " outside [0, k)");
    if (!unique.insert(d).second) throw ConfigError("duplicate disc index " + std::to_string(d));
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> magnitude(spec.alpha, 2.0 * spec.alpha);
  std::bernoulli_distribution sign(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticData out;
  out.true_beta = Vector::Zero(spec.k);
  std::vector<Index> disc = spec.disc_indices;
  std::sort(disc.begin(), disc.end());
  for (Index d : disc) out.true_beta[d] = (sign(rng) ? 1.0 : -1.0) * magnitude(rng);

  Matrix X(spec.n, spec.k);
  for (Index i = 0; i < spec.n; ++i)
    for (Index j = 0; j < spec.k; ++j) X(i, j) = normal(rng);

  out.response = X * out.true_beta;
  std::vector<int> y(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) {
    // The noise draw is consumed even for sigma = 0 so that streams line up
    // across sigma values.
    out.response[i] += spec.sigma * normal(rng);
    y[static_cast<std::size_t>(i)] = out.response[i] > 0.0 ? 1 : 0;
  }
  out.dataset.X = std::move(X);
  out.dataset.y = std::move(y);
  out.dataset.schema = FeatureSchema::continuous(static_cast<std::size_t>(spec.k), disc);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  in >> out;
  return !in.fail() && in.eof() && std::isfinite(out);
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const FeatureSchema& schema,
                        const std::string& label_column) {
  schema.validate();
  for (const auto& f : schema.features())
    if (f.kind == FeatureKind::one_hot)
      throw ConfigError("raw schema may not contain one-hot members ('" + f.name + "')");

  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);

  // Leading '#' lines (format/version banners) are skipped.
  std::string line;
  std::size_t row_number = 0;
  do {
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty", row_number + 1);
    ++row_number;
    if (row_number == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  } while (!line.empty() && line[0] == '#');
  const auto header = split_csv_line(line);

  std::vector<std::size_t> feature_column(schema.size());
  std::optional<std::size_t> label_index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) {
      label_index = c;
      continue;
    }
    const auto idx = schema.index_of(header[c]);
    if (!idx) throw ParseError("header column '" + header[c] + "' not in schema", row_number, c + 1);
  }
  if (!label_index) throw ParseError("label column '" + label_column + "' missing from header", row_number);
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto it = std::find(header.begin(), header.end(), schema[i].name);
    if (it == header.end()) throw ParseError("schema feature '" + schema[i].name + "' missing from header", row_number);
    feature_column[i] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(row_number) + ": expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       row_number);
    std::vector<double> values(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& token = fields[feature_column[i]];
      const auto& feature = schema[i];
      if (feature.kind == FeatureKind::categorical) {
        const auto it = std::find(feature.categories.begin(), feature.categories.end(), token);
        if (it == feature.categories.end())
          throw ParseError("row " + std::to_string(row_number) + ", column '" + feature.name +
                               "': unknown category '" + token + "'",
                           row_number, feature_column[i] + 1);
        values[i] = static_cast<double>(it - feature.categories.begin());
      } else if (!parse_double(token, values[i])) {
        throw ParseError("row " + std::to_string(row_number) + ", column '" + feature.name +
                             "': non-numeric value '" + token + "'",
                         row_number, feature_column[i] + 1);
      }
    }
    const auto& label = fields[*label_index];
    if (label.empty())
      throw ParseError("row " + std::to_string(row_number) + ": missing label", row_number, *label_index + 1);
    rows.push_back(std::move(values));
    labels.push_back(label);
  }
  if (rows.empty()) throw ParseError("'" + path + "' has no data rows", row_number);

  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() > 2)
    throw ParseError("label column '" + label_column + "' has more than two distinct values", 0);
  // With a single distinct value, "1"/"true" map to 1 and everything else to 0.
  std::string positive;
  if (distinct.size() == 2) {
    positive = *distinct.rbegin();
  } else if (*distinct.begin() == "1" || *distinct.begin() == "true") {
    positive = *distinct.begin();
  }

  LabeledDataset out;
  out.schema = schema;
  out.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(schema.size()));
  out.y.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) out.X(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    out.y[r] = labels[r] == positive ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> StandardizeTransform::constant_features() const {
  std::vector<std::string> out;
  for (const auto& c : columns_)
    if (c.constant) out.push_back(out_schema_[static_cast<std::size_t>(c.out_index)].name);
  return out;
}

LabeledDataset StandardizeTransform::apply(const LabeledDataset& raw) const {
  require(raw.schema.names() == raw_schema_.names(), "dataset schema does not match the fitted transform");
  LabeledDataset out;
  out.schema = out_schema_;
  out.y = raw.y;
  out.X = Matrix::Zero(raw.n(), static_cast<Index>(out_schema_.size()));
  for (const auto& c : columns_) {
    if (c.constant)
      out.X.col(c.out_index) = raw.X.col(c.raw_index);
    else
      out.X.col(c.out_index) = (raw.X.col(c.raw_index).array() - c.mean) / c.std;
  }
  for (const auto& cat : categories_) {
    for (Index r = 0; r < raw.n(); ++r) {
      const double code = raw.X(r, cat.raw_index);
      const auto active = static_cast<Index>(std::llround(code));
      require(active >= 0 && active < cat.count && static_cast<double>(active) == code,
              "invalid category code in row " + std::to_string(r));
      out.X(r, cat.first_out + active) = 1.0;
    }
  }
  return out;
}

Matrix StandardizeTransform::inverse(const Matrix& processed) const {
  require(processed.cols() == static_cast<Index>(out_schema_.size()), "processed width mismatch");
  Matrix raw(processed.rows(), static_cast<Index>(raw_schema_.size()));
  for (const auto& c : columns_) {
    if (c.constant)
      raw.col(c.raw_index) = processed.col(c.out_index);
    else
      raw.col(c.raw_index) = processed.col(c.out_index).array() * c.std + c.mean;
  }
  for (const auto& cat : categories_) {
    for (Index r = 0; r < processed.rows(); ++r) {
      Index best = 0;
      processed.row(r).segment(cat.first_out, cat.count).maxCoeff(&best);
      raw(r, cat.raw_index) = static_cast<double>(best);
    }
  }
  return raw;
}

std::pair<LabeledDataset, StandardizeTransform> preprocess(const LabeledDataset& dataset,
                                                           const std::vector<Index>& fit_rows) {
  if (fit_rows.empty()) throw ConfigError("preprocess needs at least one fit row");
  dataset.validate();

  StandardizeTransform transform;
  transform.raw_schema_ = dataset.schema;
  std::vector<Feature> out_features;
  int group = 0;
  for (std::size_t i = 0; i < dataset.schema.size(); ++i) {
    const auto& f = dataset.schema[i];
    const auto raw_index = static_cast<Index>(i);
    switch (f.kind) {
      case FeatureKind::continuous: {
        StandardizeTransform::Column col;
        col.raw_index = raw_index;
        col.out_index = static_cast<Index>(out_features.size());
        double sum = 0.0;
        for (Index r : fit_rows) sum += dataset.X(r, raw_index);
        col.mean = sum / static_cast<double>(fit_rows.size());
        double ss = 0.0;
        for (Index r : fit_rows) ss += (dataset.X(r, raw_index) - col.mean) * (dataset.X(r, raw_index) - col.mean);
        col.std = std::sqrt(ss / static_cast<double>(fit_rows.size()));
        if (!(col.std > 0.0)) {
          col.constant = true;
          col.mean = 0.0;
          col.std = 1.0;
        }
        transform.columns_.push_back(col);
        out_features.push_back(f);
        break;
      }
      case FeatureKind::categorical: {
        StandardizeTransform::Category cat{raw_index, static_cast<Index>(out_features.size()),
                                           static_cast<Index>(f.categories.size())};
        transform.categories_.push_back(cat);
        for (const auto& value : f.categories) {
          Feature member;
          member.name = f.name + "=" + value;
          member.kind = FeatureKind::one_hot;
          member.group = group;
          member.category = value;
          member.actionable = f.actionable;
          member.discriminative = f.discriminative;
          out_features.push_back(std::move(member));
        }
        ++group;
        break;
      }
      case FeatureKind::one_hot:
        throw ConfigError("preprocess expects a raw schema; '" + f.name + "' is already one-hot");
    }
  }
  transform.out_schema_ = FeatureSchema(std::move(out_features));
  auto processed = transform.apply(dataset);
  return {std::move(processed), std::move(transform)};
}

// ---------------------------------------------------------------------------

ThreeWaySplit split_three_way(const LabeledDataset& dataset, const SplitFractions& fractions,
                              std::uint64_t seed) {
  const double parts[3] = {fractions.expert, fractions.train, fractions.test};
  for (double f : parts)
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");

  const auto n = static_cast<std::size_t>(dataset.n());
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_expert = static_cast<std::size_t>(std::llround(parts[0] * static_cast<double>(n)));
  const auto n_train =
      std::min(n - std::min(n, n_expert), static_cast<std::size_t>(std::llround(parts[1] * static_cast<double>(n))));
  const std::size_t bounds[4] = {0, std::min(n, n_expert), std::min(n, n_expert) + n_train, n};

  ThreeWaySplit out;
  for (int p = 0; p < 3; ++p) {
    if (bounds[p + 1] <= bounds[p]) throw ConfigError("split produces an empty part");
    out.rows[p].assign(order.begin() + static_cast<std::ptrdiff_t>(bounds[p]),
                       order.begin() + static_cast<std::ptrdiff_t>(bounds[p + 1]));
    std::sort(out.rows[p].begin(), out.rows[p].end());
  }
  out.expert = dataset.subset(out.rows[0]);
  out.train = dataset.subset(out.rows[1]);
  out.test = dataset.subset(out.rows[2]);
  return out;
}

LabeledDataset flip_labels(const LabeledDataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ContractError("flip fraction must lie in [0, 1]");
  LabeledDataset out = dataset;
  const auto n = out.y.size();
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < count; ++i) out.y[order[i]] = 1 - out.y[order[i]];
  return out;
}

}  // namespace nadv
