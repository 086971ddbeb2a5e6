#include "doctest.h"
#include "helpers.hpp"
#include "nadv/optim.hpp"
#include "nadv/training.hpp"

using namespace nadv;
using namespace nadv::testing;

TEST_CASE("Adam follows its published recurrence on f(x) = x^2") {
  Adam adam(AdamParams{0.1});
  Vector x(1);
  x << 1.0;
  adam.step(x, 2.0 * x);
  CHECK(x[0] == doctest::Approx(0.9000000005).epsilon(1e-12));
  CHECK(adam.first_moment()[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(adam.second_moment()[0] == doctest::Approx(0.004).epsilon(1e-12));
  adam.step(x, 2.0 * x);
  CHECK(x[0] == doctest::Approx(0.8004122286917928).epsilon(1e-12));
  CHECK(adam.first_moment()[0] == doctest::Approx(0.36).epsilon(1e-9));
  CHECK(adam.second_moment()[0] == doctest::Approx(0.007236).epsilon(1e-9));
}

TEST_CASE("RMSProp follows its published recurrence on f(x) = x^2") {
  RmsProp rms(RmsPropParams{0.01});
  Vector x(1);
  x << 1.0;
  rms.step(x, 2.0 * x);
  CHECK(x[0] == doctest::Approx(0.900000005).epsilon(1e-12));
  CHECK(rms.square_average()[0] == doctest::Approx(0.04).epsilon(1e-12));
  rms.step(x, 2.0 * x);
  CHECK(x[0] == doctest::Approx(0.8329179679700331).epsilon(1e-12));
}

TEST_CASE("zero epochs returns the seeded initial model") {
  const auto data = generate_synthetic({50, 4, {0}, 1.0, 0.0, 1}).dataset;
  TrainConfig c = TrainConfig::mlp_defaults();
  c.epochs = 0;
  c.seed = 9;
  CHECK(train(data, c).parameters() == initial_model(4, c).parameters());
}

TEST_CASE("logistic regression separates noiseless synthetic data") {
  const auto data = generate_synthetic({400, 5, {0, 1}, 1.0, 0.0, 2}).dataset;
  TrainConfig c = TrainConfig::logistic_defaults();
  c.epochs = 2000;
  const auto model = train(data, c);
  CHECK(model.is_linear());
  CHECK(accuracy(model, data) >= 0.95);
}

TEST_CASE("training is deterministic under a seed") {
  const auto data = generate_synthetic({100, 4, {0, 1}, 1.0, 0.2, 3}).dataset;
  TrainConfig c = TrainConfig::mlp_defaults();
  c.epochs = 20;
  c.seed = 4;
  CHECK(train(data, c).parameters() == train(data, c).parameters());
}

TEST_CASE("full-batch logistic loss is non-increasing") {
  const auto data = generate_synthetic({200, 4, {0, 1}, 1.0, 0.5, 5}).dataset;
  TrainConfig c = TrainConfig::logistic_defaults();
  c.epochs = 300;
  std::vector<double> history;
  train(data, c, &history);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-12);
}

TEST_CASE("adversarial training with a vanishing ball matches plain training") {
  const auto data = generate_synthetic({100, 4, {0, 1}, 1.0, 0.3, 6}).dataset;
  TrainConfig base = TrainConfig::mlp_defaults();
  base.epochs = 10;
  base.seed = 1;
  AdvTrainConfig adv{base, 1e-9, 7, 1e-9 / 4};
  const Vector plain = train(data, base).parameters();
  const Vector robust = train_adversarial(data, adv).parameters();
  CHECK((plain - robust).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("inner PGD stays inside the epsilon ball") {
  Rng rng(7);
  const auto model = random_mlp({4, 6, 2}, rng);
  Matrix X(16, 4);
  for (Index r = 0; r < 16; ++r) X.row(r) = random_vector(4, rng).transpose();
  std::vector<int> y(16, 1);
  Rng attack(8);
  const Matrix adv = pgd_perturb_batch(model, X, y, 0.2, 7, 0.05, attack);
  CHECK((adv - X).cwiseAbs().maxCoeff() <= 0.2 + 1e-9);
}

TEST_CASE("adversarial training improves robust accuracy") {
  const auto data = generate_synthetic({600, 10, {0, 1, 2}, 1.0, 0.5, 9}).dataset;
  TrainConfig base = TrainConfig::mlp_defaults();
  base.epochs = 100;
  base.seed = 3;
  const auto plain = train(data, base);
  const auto robust = train_adversarial(data, {base, 0.2, 7, 0.05});
  auto robust_accuracy = [&](const ScoringModel& m) {
    Rng rng(10);
    const Matrix adv = pgd_perturb_batch(m, data.X, data.y, 0.2, 10, 0.05, rng);
    LabeledDataset attacked = data;
    attacked.X = adv;
    return accuracy(m, attacked);
  };
  CHECK(robust_accuracy(robust) >= robust_accuracy(plain) + 0.05);
}

TEST_CASE("invalid training configs are rejected") {
  TrainConfig c;
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_optimizer("lbfgs"), ConfigError);
  CHECK_THROWS_AS(parse_model_kind("tree"), ConfigError);
}
