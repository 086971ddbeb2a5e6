#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "nadv/evaluation.hpp"
#include "nadv/experiment.hpp"

using namespace nadv;
using namespace nadv::testing;

namespace {

RetryTrace fake_trace(std::optional<int> first, int r_max, const Vector& delta) {
  RetryTrace t;
  t.factual = Vector::Zero(delta.size());
  t.delta = delta;
  for (int r = 0; r <= r_max; ++r) {
    RetryStep s;
    s.x_prime = t.factual + retry_scale(r) * delta;
    s.model_flipped = true;
    s.oracle_flipped = first && r >= *first;
    t.steps.push_back(s);
  }
  t.first_nonadv_r = first;
  t.oracle_queries = r_max + 1;
  return t;
}

RecourseOutput converged_output(const Vector& delta) {
  RecourseOutput o;
  o.delta = delta;
  o.x_prime = delta;
  o.converged = true;
  return o;
}

RunConfig small_config(std::uint64_t seed) {
  RunConfig c;
  c.seed = seed;
  c.synthetic.n = 400;
  c.model.epochs = 40;
  c.logistic.epochs = 300;
  c.adversarial.inner_steps = 2;
  c.max_factuals = 15;
  c.generator(Method::cw).max_iterations = 100;
  return c;
}

}  // namespace

TEST_CASE("retry points are x + 1.1^r delta") {
  const auto model = linear_model((Vector(2) << 1, 0).finished(), 0.0);
  const Oracle oracle = LinearOracle((Vector(2) << 1, 0).finished());
  const Vector x = (Vector(2) << -1, 0).finished();
  const Vector delta = (Vector(2) << 0.9, 0.3).finished();
  const auto t = retry_trace(model, oracle, x, delta, 5);
  REQUIRE(t.steps.size() == 6);
  CHECK(t.steps[0].x_prime == x + delta);
  CHECK(t.steps[2].x_prime == x + std::pow(1.1, 2) * delta);
  CHECK((t.steps[2].x_prime - (x + 1.21 * delta)).norm() < 1e-12);
  for (int r = 0; r <= 5; ++r) CHECK(t.steps[static_cast<std::size_t>(r)].x_prime == x + std::pow(1.1, r) * delta);
  CHECK(t.oracle_queries == 6);
  // Score -1 + 0.9 * 1.1^r crosses zero at r = 2.
  CHECK(t.first_nonadv_r == 2);
  CHECK(!t.steps[1].model_flipped);
}

TEST_CASE("zero delta yields a degenerate trace without flips") {
  const auto model = linear_model((Vector(1) << 1).finished(), 0.0);
  const Oracle oracle = LinearOracle((Vector(1) << 1).finished());
  const auto t = retry_trace(model, oracle, (Vector(1) << -1).finished(), Vector::Zero(1), 3);
  CHECK(t.degenerate);
  CHECK(!t.first_nonadv_r);
  for (const auto& s : t.steps) CHECK(!s.model_flipped);
}

TEST_CASE("linear retry monotonicity and query accounting") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const Vector beta = random_vector(4, rng);
    const auto model = linear_model(beta, 0.2);
    const Oracle oracle = LinearOracle(beta);
    const Vector x = random_vector(4, rng);
    const Vector delta = random_vector(4, rng);
    // Monotonicity holds for factuals, which start on the negative side.
    if (model.predict(x).label == 1) continue;
    const auto trace = retry_trace(model, oracle, x, delta, 5);
    CHECK(trace.oracle_queries == 6);
    bool seen = false;
    for (const auto& s : trace.steps) {
      if (seen) CHECK(s.model_flipped);
      seen = seen || s.model_flipped;
    }
  }
}

TEST_CASE("aggregate: share curves, failure convention and empty input") {
  const Vector d = Vector::Ones(2);
  const auto all0 = aggregate({fake_trace(0, 5, d), fake_trace(0, 5, d)}, {converged_output(d), converged_output(d)});
  CHECK(all0.share == std::vector<double>(6, 1.0));
  CHECK(all0.mean_retries == 0.0);

  const auto never = aggregate({fake_trace(std::nullopt, 5, d)}, {converged_output(d)});
  CHECK(never.mean_retries == 6.0);
  CHECK(never.failures == 1);

  const auto three = aggregate({fake_trace(3, 5, d)}, {converged_output(d)});
  CHECK(three.share == std::vector<double>{0, 0, 0, 1, 1, 1});
  CHECK(three.mean_l1 == 2.0);
  CHECK(three.mean_l2 == doctest::Approx(std::sqrt(2.0)));

  RecourseOutput failed = converged_output(d);
  failed.converged = false;
  const auto mixed = aggregate({fake_trace(1, 5, d), fake_trace(0, 5, d)}, {converged_output(d), failed});
  CHECK(mixed.converged == 1);
  CHECK(mixed.outputs == 2);
  CHECK(mixed.share[0] == 0.0);
  CHECK(mixed.share[1] == 1.0);

  CHECK_THROWS_AS(aggregate({}, {}), ContractError);
  CHECK_THROWS_AS(aggregate({fake_trace(0, 5, d)}, {}), ContractError);
}

TEST_CASE("accuracy experiment with no label noise gives identical arms") {
  RunConfig c = small_config(3);
  c.flip_fraction = 0.0;
  c.methods = {Method::scfe, Method::deepfool};
  const auto report = run_experiment(ExperimentKind::accuracy, c);
  REQUIRE(report.summaries.size() == 4);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = report.summaries[i];
    const auto& b = report.summaries[i + 2];
    CHECK(a.arm == "clean");
    CHECK(b.arm == "flipped");
    CHECK(a.share == b.share);
    CHECK(a.mean_l1 == b.mean_l1);
    CHECK(a.mean_retries == b.mean_retries);
  }
}

TEST_CASE("method comparison emits six curves over r = 0..5") {
  const auto report = run_experiment(ExperimentKind::method_comparison, small_config(4));
  REQUIRE(report.summaries.size() == 6);
  for (const auto& s : report.summaries) {
    CHECK(s.share.size() == 6);
    for (double v : s.share) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(s.oracle_queries == 6LL * s.outputs);
  }
  CHECK(report.arms.size() == 1);
}

TEST_CASE("cost comparison sweeps the four weightings for four methods") {
  const auto report = run_experiment(ExperimentKind::cost_comparison, small_config(5));
  CHECK(report.summaries.size() == 16);
  std::set<std::string> costs;
  for (const auto& s : report.summaries) costs.insert(s.cost);
  CHECK(costs == std::set<std::string>{"weighted_quadratic:unit", "weighted_quadratic:squared_gradient",
                                       "weighted_quadratic:inverse_squared", "weighted_quadratic:optimal"});
}

TEST_CASE("parallel workers give the same results as a single worker") {
  RunConfig c = small_config(6);
  c.methods = {Method::dice, Method::pgd};
  const auto one = run_experiment(ExperimentKind::method_comparison, c);
  c.workers = 4;
  const auto four = run_experiment(ExperimentKind::method_comparison, c);
  REQUIRE(one.summaries.size() == four.summaries.size());
  for (std::size_t i = 0; i < one.summaries.size(); ++i) {
    CHECK(one.summaries[i].share == four.summaries[i].share);
    CHECK(one.summaries[i].mean_l1 == four.summaries[i].mean_l1);
  }
}

TEST_CASE("unknown experiment kinds are configuration errors") {
  CHECK_THROWS_AS(parse_experiment_kind("sweep"), ConfigError);
  CHECK(to_string(parse_experiment_kind("adv_training")) == "adv_training");
}
