#include "doctest.h"
#include "helpers.hpp"
#include "nadv/models.hpp"

using namespace nadv;
using namespace nadv::testing;

TEST_CASE("linear prediction and the strict boundary rule") {
  const auto m = linear_model((Vector(2) << 1, 0).finished(), 0.0);
  const auto p = m.predict((Vector(2) << 2, 5).finished());
  CHECK(p.score == 2.0);
  CHECK(p.label == 1);
  CHECK(m.predict((Vector(2) << 0, 7).finished()).label == 0);
  CHECK_THROWS_AS(m.predict(Vector::Zero(3)), ContractError);
}

TEST_CASE("an all-zero MLP scores zero everywhere") {
  const ScoringModel m(MlpModel::zeros({4, 30, 30, 2}));
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(m.score(random_vector(4, rng, 3.0)) == 0.0);
}

TEST_CASE("labels are exactly 1[score > 0]") {
  Rng rng(2);
  const auto m = random_mlp({5, 8, 2}, rng);
  for (int i = 0; i < 200; ++i) {
    const auto p = m.predict(random_vector(5, rng));
    CHECK(p.label == (p.score > 0.0 ? 1 : 0));
    CHECK(p.probability == doctest::Approx(sigmoid(p.score)));
  }
}

TEST_CASE("input gradients: linear closed form and zero at the squared-error target") {
  const Vector beta = (Vector(3) << 1.5, -2, 0.25).finished();
  const auto m = linear_model(beta, 0.3);
  Rng rng(3);
  const Vector x = random_vector(3, rng);
  CHECK(m.input_gradient(x, Objective::raw_score()) == beta);
  CHECK(m.input_gradient(x, Objective::squared_score_error(m.score(x))).isZero(0.0));
}

TEST_CASE("MLP input gradients match central finite differences") {
  Rng rng(4);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto m = random_mlp({6, 30, 30, 2}, rng);
    const Vector x = random_vector(6, rng);
    for (const Objective obj : {Objective::raw_score(), Objective::cross_entropy(1),
                                Objective::squared_score_error(0.5)}) {
      const Vector g = m.input_gradient(x, obj);
      const Vector fd = finite_difference([&](const Vector& z) { return obj.value(m.score(z)); }, x);
      const double rel = (g - fd).norm() / std::max(1e-8, std::max(g.norm(), fd.norm()));
      CHECK(rel < 1e-4);
      ++checked;
    }
  }
  CHECK(checked == 300);
}

TEST_CASE("parameter gradients match finite differences") {
  Rng rng(5);
  auto m = random_mlp({3, 4, 2}, rng);
  Matrix X(5, 3);
  for (Index r = 0; r < 5; ++r) X.row(r) = random_vector(3, rng).transpose();
  const Vector upstream = random_vector(5, rng);
  const Vector g = m.parameter_gradient(X, upstream);
  const Vector p0 = m.parameters();
  const Vector fd = finite_difference(
      [&](const Vector& p) {
        ScoringModel copy = m;
        copy.set_parameters(p);
        return upstream.dot(copy.scores(X));
      },
      p0, 1e-5);
  CHECK((g - fd).norm() / fd.norm() < 1e-6);
}

TEST_CASE("OLS: exact interpolation, orthonormal design and idempotence") {
  Rng rng(6);
  Matrix X(40, 4);
  for (Index r = 0; r < 40; ++r) X.row(r) = random_vector(4, rng).transpose();
  const Vector beta = (Vector(4) << 1, -2, 0.5, 0).finished();
  const auto fit = fit_ols(X, X * beta);
  CHECK((fit.beta_hat - beta).cwiseAbs().maxCoeff() < 1e-8);
  const auto refit = fit_ols(X, X * fit.beta_hat);
  CHECK((refit.beta_hat - fit.beta_hat).cwiseAbs().maxCoeff() < 1e-8);

  const Eigen::HouseholderQR<Matrix> qr(X);
  const Matrix Q = qr.householderQ() * Matrix::Identity(40, 4);
  const Vector y = random_vector(40, rng);
  CHECK((fit_ols(Q, y).beta_hat - Q.transpose() * y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("OLS coefficient spread matches the diagonal standard error") {
  Rng rng(7);
  const Index n = 200, k = 3;
  Matrix X(n, k);
  for (Index r = 0; r < n; ++r) X.row(r) = random_vector(k, rng).transpose();
  const Vector beta = (Vector(k) << 1, 0, -1).finished();
  const double sigma = 2.0;
  std::vector<Vector> draws;
  for (int t = 0; t < 500; ++t) draws.push_back(fit_ols(X, X * beta + random_vector(n, rng, sigma)).beta_hat);
  for (Index i = 0; i < k; ++i) {
    double mean = 0, var = 0;
    for (const auto& d : draws) mean += d[i] / 500.0;
    for (const auto& d : draws) var += (d[i] - mean) * (d[i] - mean) / 499.0;
    const double expected = sigma / X.col(i).norm();
    CHECK(std::sqrt(var) == doctest::Approx(expected).epsilon(0.15));
  }
}

TEST_CASE("OLS on a rank-deficient design falls back to ridge") {
  Matrix X(10, 2);
  X.col(0).setLinSpaced(10, 1, 10);
  X.col(1) = X.col(0);
  const auto fit = fit_ols(X, X.col(0));
  CHECK(fit.ridge_applied);
  CHECK(fit.beta_hat.allFinite());
}

TEST_CASE("model serialization round-trips bit-exactly") {
  Rng rng(8);
  const auto mlp = random_mlp({3, 5, 2}, rng);
  const auto back = deserialize_model(serialize_model(mlp));
  CHECK(back.parameters() == mlp.parameters());
  CHECK(serialize_model(back) == serialize_model(mlp));
  const auto lin = linear_model((Vector(2) << 0.1, 1.0 / 3.0).finished(), -2.5);
  CHECK(deserialize_model(serialize_model(lin)).parameters() == lin.parameters());
  CHECK_THROWS_AS(deserialize_model("garbage"), ParseError);
}
