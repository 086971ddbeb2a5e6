#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "nadv/config.hpp"
#include "nadv/data.hpp"

using namespace nadv;
using namespace nadv::testing;

TEST_CASE("synthetic data: beta support, magnitudes and noiseless labels") {
  SyntheticSpec spec{500, 10, {0, 1, 2}, 1.5, 0.0, 7};
  const auto d = generate_synthetic(spec);
  int zeros = 0;
  for (Index i = 0; i < 10; ++i) {
    const bool disc = i <= 2;
    if (!disc) {
      CHECK(d.true_beta[i] == 0.0);
      ++zeros;
    } else {
      CHECK(std::abs(d.true_beta[i]) >= 1.5);
      CHECK(std::abs(d.true_beta[i]) <= 3.0);
    }
  }
  CHECK(zeros == 7);
  for (Index r = 0; r < d.dataset.n(); ++r) {
    const double s = d.true_beta.dot(d.dataset.X.row(r).transpose());
    CHECK(d.dataset.y[static_cast<std::size_t>(r)] == (s > 0.0 ? 1 : 0));
  }
}

TEST_CASE("synthetic data is bit-identical under a fixed seed") {
  SyntheticSpec spec{200, 5, {1}, 1.0, 0.3, 11};
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(a.dataset.X == b.dataset.X);
  CHECK(a.dataset.y == b.dataset.y);
  CHECK(a.true_beta == b.true_beta);
  spec.seed = 12;
  CHECK(generate_synthetic(spec).dataset.X != a.dataset.X);
}

TEST_CASE("synthetic positive rate is balanced for noiseless data") {
  const auto d = generate_synthetic({10000, 6, {0, 1}, 1.0, 0.0, 3});
  const double rate = std::accumulate(d.dataset.y.begin(), d.dataset.y.end(), 0.0) / 10000.0;
  CHECK(rate >= 0.4);
  CHECK(rate <= 0.6);
}

TEST_CASE("invalid synthetic specs are configuration errors") {
  CHECK_THROWS_AS(generate_synthetic({100, 5, {5}, 1.0, 0.0, 0}), ConfigError);
  CHECK_THROWS_AS(generate_synthetic({100, 5, {0}, 0.0, 0.0, 0}), ConfigError);
  CHECK_THROWS_AS(generate_synthetic({100, 5, {0}, 1.0, -1.0, 0}), ConfigError);
}

namespace {

FeatureSchema small_schema() {
  Feature age{"age"};
  Feature color{"color", FeatureKind::categorical, {"red", "green", "blue"}};
  color.actionable = false;
  color.discriminative = true;
  return FeatureSchema({age, color});
}

}  // namespace

TEST_CASE("load_csv parses a well-formed file and coerces labels") {
  const auto dir = scratch_dir("csv_ok");
  const auto path = write_file(dir / "a.csv", "age,color,label\n30,red,good\n41,\"blue\",bad\n25,green,good\n");
  const auto d = load_csv(path, small_schema(), "label");
  CHECK(d.n() == 3);
  CHECK(d.X(1, 0) == 41.0);
  CHECK(d.X(1, 1) == 2.0);
  // "good" > "bad" lexicographically.
  CHECK(d.y == std::vector<int>{1, 0, 1});
}

TEST_CASE("load_csv reports row and column of bad tokens") {
  const auto dir = scratch_dir("csv_bad");
  const auto cat = write_file(dir / "cat.csv", "age,color,label\n30,red,1\n31,purple,0\n");
  try {
    load_csv(cat, small_schema(), "label");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("color") != std::string::npos);
  }
  const auto num = write_file(dir / "num.csv", "age,color,label\nold,red,1\n");
  CHECK_THROWS_AS(load_csv(num, small_schema(), "label"), ParseError);
  const auto missing = write_file(dir / "missing.csv", "age,color,label\n30,red,\n");
  CHECK_THROWS_AS(load_csv(missing, small_schema(), "label"), ParseError);
}

TEST_CASE("German Credit schema has 19 raw features") {
  const auto schema = load_schema(NADV_SOURCE_DIR "/configs/german_schema.ini");
  CHECK(schema.size() == 19);
  CHECK(!schema.index_of("personal_status_sex").has_value());
  CHECK(schema.discriminative_indices().size() == 5);
}

TEST_CASE("preprocess standardizes with fit-row statistics and one-hot expands") {
  LabeledDataset raw;
  raw.schema = small_schema();
  raw.X.resize(4, 2);
  raw.X << 3, 0, 7, 1, 5, 2, 100, 0;
  raw.y = {0, 1, 0, 1};
  // Fit rows {0,1} hold 3 and 7: mean 5, std 2.
  const auto [out, transform] = preprocess(raw, {0, 1});
  CHECK(out.k() == 4);
  CHECK(out.X(1, 0) == doctest::Approx(1.0).epsilon(1e-12));  // (7 - 5) / 2
  for (Index r = 0; r < out.n(); ++r) CHECK(out.X.row(r).tail(3).sum() == 1.0);
  CHECK(out.schema[1].name == "color=red");
  CHECK(out.schema[3].kind == FeatureKind::one_hot);
  CHECK(!out.schema[2].actionable);  // inherited from the parent
  CHECK(out.schema[2].discriminative);
  const Matrix back = transform.inverse(out.X);
  CHECK((back - raw.X).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("preprocess leaves standardized columns unchanged and flags constants") {
  Rng rng(5);
  LabeledDataset raw;
  raw.schema = FeatureSchema::continuous(2, {0});
  raw.X.resize(50, 2);
  raw.X.col(0) = random_vector(50, rng);
  raw.X.col(0).array() -= raw.X.col(0).mean();
  raw.X.col(0) /= std::sqrt(raw.X.col(0).squaredNorm() / 50.0);
  raw.X.col(1).setConstant(3.0);
  raw.y.assign(50, 0);
  std::vector<Index> all(50);
  std::iota(all.begin(), all.end(), Index{0});
  const auto [out, transform] = preprocess(raw, all);
  CHECK((out.X.col(0) - raw.X.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(transform.constant_features() == std::vector<std::string>{"x1"});
  CHECK(out.X.col(1) == raw.X.col(1));
}

TEST_CASE("three-way split: sizes, partition and determinism") {
  const auto d = generate_synthetic({100, 3, {0}, 1.0, 0.0, 1}).dataset;
  const auto s = split_three_way(d, {0.2, 0.6, 0.2}, 9);
  CHECK(s.expert.n() == 20);
  CHECK(s.train.n() == 60);
  CHECK(s.test.n() == 20);
  std::set<Index> all;
  for (const auto& part : s.rows) all.insert(part.begin(), part.end());
  CHECK(all.size() == 100);
  const auto again = split_three_way(d, {0.2, 0.6, 0.2}, 9);
  CHECK(again.rows == s.rows);
  CHECK_THROWS_AS(split_three_way(d, {0.0, 0.8, 0.2}, 9), ConfigError);
  CHECK_THROWS_AS(split_three_way(d, {0.3, 0.3, 0.3}, 9), ConfigError);
}

TEST_CASE("flip_labels flips exactly round(f n) rows") {
  const auto d = generate_synthetic({100, 3, {0}, 1.0, 0.0, 2}).dataset;
  auto count_diff = [&](const LabeledDataset& other) {
    int n = 0;
    for (std::size_t i = 0; i < d.y.size(); ++i) n += d.y[i] != other.y[i];
    return n;
  };
  CHECK(count_diff(flip_labels(d, 0.0, 1)) == 0);
  CHECK(count_diff(flip_labels(d, 1.0, 1)) == 100);
  CHECK(count_diff(flip_labels(d, 0.25, 1)) == 25);
  CHECK(flip_labels(d, 0.25, 1).y == flip_labels(d, 0.25, 1).y);
  CHECK_THROWS(flip_labels(d, 1.5, 1));
}
