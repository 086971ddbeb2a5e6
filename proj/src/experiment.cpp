#include "nadv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

namespace nadv {

namespace {

std::vector<Index> concat_sorted(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::vector<Index> out(a);
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

void relabel(LabeledDataset& data, const Oracle& oracle) {
  for (Index i = 0; i < data.n(); ++i)
    data.y[static_cast<std::size_t>(i)] = oracle_query(oracle, data.X.row(i).transpose());
}

// Resolves oracle.features against the schema; names must exist.
void apply_disc_names(FeatureSchema& schema, const std::vector<std::string>& names) {
  if (names.empty()) return;
  for (const auto& name : names) {
    bool found = schema.index_of(name).has_value();
    for (const auto& f : schema.features())
      if (f.name.rfind(name + "=", 0) == 0) found = true;
    if (!found) throw ConfigError("oracle.features: unknown feature '" + name + "'");
  }
  schema.set_discriminative(names);
}

template <class F>
void parallel_for(std::size_t n, int workers, F body) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

ArmSummary describe_arm(std::string name, const ScoringModel& model, const PreparedData& data, const LabeledDataset& train,
                        Index factuals) {
  ArmSummary arm;
  arm.arm = std::move(name);
  arm.test_accuracy = accuracy(model, data.test);
  Index agree = 0;
  for (Index i = 0; i < data.test.n(); ++i) {
    const Vector x = data.test.X.row(i).transpose();
    agree += model.predict(x).label == oracle_query(data.oracle, x) ? 1 : 0;
  }
  arm.oracle_agreement = static_cast<double>(agree) / static_cast<double>(data.test.n());
  arm.train_rows = train.n();
  arm.factuals = factuals;
  return arm;
}

Matrix gather_rows(const LabeledDataset& data, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), data.k());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = data.X.row(rows[i]);
  return out;
}

// One arm: evaluates every configured method (or cost sweep) on a trained model.
void evaluate_arm(const RunConfig& config, const std::string& arm_name, const PreparedData& data,
                  const LabeledDataset& train, const ScoringModel& model, bool cost_sweep, ExperimentReport& report) {
  const auto rows = select_factuals(model, data.test, config.target, config.max_factuals);
  report.arms.push_back(describe_arm(arm_name, model, data, train, static_cast<Index>(rows.size())));
  if (rows.empty()) {
    std::cerr << "warning: arm '" << arm_name << "' has no factuals with label != target; nothing to evaluate\n";
    return;
  }
  const GenerationContext context = GenerationContext::from_dataset(train);
  const CoefficientEstimate estimate = estimate_coefficients(model, train, gather_rows(data.test, rows));

  struct Cell {
    Method method;
    CostKind kind;
    std::string weighting;
  };
  std::vector<Cell> cells;
  if (cost_sweep) {
    // DeepFool and AR cannot take arbitrary cost functions.
    for (Method m : config.methods) {
      if (m == Method::deepfool || m == Method::ar) continue;
      for (const char* w : {"unit", "squared_gradient", "inverse_squared", "optimal"})
        cells.push_back({m, CostKind::weighted_quadratic, w});
    }
    if (cells.empty()) throw ConfigError("generator.methods: cost_comparison needs one of scfe, dice, cw, pgd");
  } else {
    for (Method m : config.methods) cells.push_back({m, config.cost_kind, config.cost_weights});
  }

  for (const Cell& cell : cells) {
    const CostFunction cost = make_cost(cell.kind, cell.weighting, estimate, config.cost_p, config.pdisc);
    GeneratorConfig g = config.generator(cell.method);
    g.target = config.target;
    g.seed = derive_seed(derive_seed(config.seed, streams::generator), static_cast<std::uint64_t>(cell.method));
    const auto results = run_factuals(config, model, data.oracle, data.test, rows, cost, g, context);
    std::string cost_label = to_string(cell.kind);
    if (cell.kind == CostKind::weighted_quadratic) cost_label += ":" + cell.weighting;
    report.summaries.push_back(summarize(results, arm_name, to_string(cell.method), cost_label));
  }
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "method_comparison") return ExperimentKind::method_comparison;
  if (name == "cost_comparison") return ExperimentKind::cost_comparison;
  if (name == "accuracy") return ExperimentKind::accuracy;
  if (name == "adv_training") return ExperimentKind::adv_training;
  if (name == "theorem") return ExperimentKind::theorem;
  throw ConfigError("unknown experiment kind '" + name +
                    "' (expected method_comparison, cost_comparison, accuracy, adv_training or theorem)");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::method_comparison:
      return "method_comparison";
    case ExperimentKind::cost_comparison:
      return "cost_comparison";
    case ExperimentKind::accuracy:
      return "accuracy";
    case ExperimentKind::adv_training:
      return "adv_training";
    case ExperimentKind::theorem:
      return "theorem";
  }
  return "?";
}

PreparedData prepare_data(const RunConfig& config) {
  config.validate();
  LabeledDataset raw;
  std::optional<Vector> true_beta;
  if (config.source == DatasetSource::synthetic) {
    SyntheticSpec spec = config.synthetic;
    spec.seed = derive_seed(config.seed, streams::dataset);
    SyntheticData synth = generate_synthetic(spec);
    raw = std::move(synth.dataset);
    true_beta = std::move(synth.true_beta);
  } else {
    raw = load_csv(config.csv_path, load_schema(config.schema_path), config.label_column);
  }
  apply_disc_names(raw.schema, config.oracle_features);

  const ThreeWaySplit split = split_three_way(raw, config.split, derive_seed(config.seed, streams::split));
  LabeledDataset expert = split.expert, train = split.train, test = split.test;
  if (config.source == DatasetSource::csv) {
    const auto [processed, transform] = preprocess(raw, concat_sorted(split.rows[0], split.rows[1]));
    for (const auto& name : transform.constant_features())
      std::cerr << "warning: feature '" << name << "' is constant on the fit rows and left unscaled\n";
    expert = processed.subset(split.rows[0]);
    train = processed.subset(split.rows[1]);
    test = processed.subset(split.rows[2]);
  }
  std::vector<Index> disc = expert.schema.discriminative_indices();
  if (disc.empty()) throw ConfigError("oracle.features: no discriminative features selected");

  Oracle oracle = config.oracle_kind == OracleKind::linear
                      ? Oracle(LinearOracle(*true_beta))
                      : Oracle(build_knn_oracle(expert, disc, config.oracle_k));
  if (config.oracle_relabel) {
    relabel(train, oracle);
    relabel(test, oracle);
  }
  return PreparedData{std::move(expert), std::move(train), std::move(test), std::move(disc), std::move(oracle),
                      std::move(true_beta)};
}

ScoringModel train_model(const RunConfig& config, const LabeledDataset& train, bool adversarial) {
  TrainConfig base = config.model;
  base.seed = derive_seed(config.seed, streams::model);
  if (!adversarial) return nadv::train(train, base);
  AdvTrainConfig adv = config.adversarial;
  adv.base = base;
  return train_adversarial(train, adv);
}

std::vector<Index> select_factuals(const ScoringModel& model, const LabeledDataset& test, int target,
                                   int max_factuals) {
  std::vector<Index> rows;
  const Vector scores = model.scores(test.X);
  for (Index i = 0; i < test.n() && static_cast<int>(rows.size()) < max_factuals; ++i)
    if ((scores[i] > 0.0 ? 1 : 0) != target) rows.push_back(i);
  return rows;
}

CoefficientEstimate estimate_coefficients(const ScoringModel& model, const LabeledDataset& train,
                                          const Matrix& factuals) {
  CoefficientEstimate e;
  if (model.is_linear()) {
    e.beta_hat = model.linear().weights;
    const Vector scores = model.scores(train.X);
    Vector info = Vector::Zero(train.k());
    for (Index i = 0; i < train.n(); ++i) {
      const double p = sigmoid(scores[i]);
      info += p * (1.0 - p) * train.X.row(i).transpose().cwiseAbs2();
    }
    e.standard_errors = info.cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
    e.has_standard_errors = true;
    return e;
  }
  require(factuals.rows() > 0, "estimate_coefficients: no factuals");
  e.beta_hat = model.input_gradients(factuals, Vector::Ones(factuals.rows())).cwiseAbs().colwise().mean().transpose();
  e.standard_errors = Vector::Ones(e.beta_hat.size());
  return e;
}

CostFunction make_cost(CostKind kind, const std::string& weighting, const CoefficientEstimate& estimate, NormP p,
                       PdiscParams pdisc) {
  switch (kind) {
    case CostKind::l1:
      return CostFunction::l1();
    case CostKind::l2:
      return CostFunction::l2();
    case CostKind::weighted_quadratic:
      break;
  }
  if (weighting == "unit") return CostFunction::weighted_quadratic(WeightVector::ones(estimate.beta_hat.size()));
  if (weighting == "optimal") {
    pdisc.normalize_by_se = estimate.has_standard_errors;
    return CostFunction::weighted_quadratic(optimal_weights(estimate.beta_hat, estimate.standard_errors, p, pdisc));
  }
  return CostFunction::weighted_quadratic(baseline_weights(estimate.beta_hat, parse_baseline(weighting)));
}

std::vector<FactualResult> run_factuals(const RunConfig& config, const ScoringModel& model, const Oracle& oracle,
                                        const LabeledDataset& test, const std::vector<Index>& rows,
                                        const CostFunction& cost, const GeneratorConfig& generator,
                                        const GenerationContext& context) {
  std::vector<FactualResult> results(rows.size());
  parallel_for(rows.size(), config.workers, [&](std::size_t i) {
    FactualResult& res = results[i];
    res.row = rows[i];
    const Vector x = test.X.row(rows[i]).transpose();
    GeneratorConfig g = generator;
    g.seed = derive_seed(generator.seed, static_cast<std::uint64_t>(rows[i]));
    try {
      RecourseOutput out = generate(model, x, cost, g, context);
      res.trace = retry_trace(model, oracle, x, out.delta.allFinite() ? out.delta : Vector::Zero(x.size()),
                              config.r_max, config.target);
      res.output = std::move(out);
    } catch (const Error& e) {
      res.error = e.what();
    }
  });
  for (const auto& res : results)
    if (!res.error.empty())
      std::cerr << "warning: " << to_string(generator.method) << " failed on test row " << res.row << ": "
                << res.error << " (excluded)\n";
  return results;
}

MethodSummary summarize(const std::vector<FactualResult>& results, std::string arm, std::string method,
                        std::string cost) {
  std::vector<RetryTrace> traces;
  std::vector<RecourseOutput> outputs;
  int errors = 0;
  for (const auto& r : results) {
    if (!r.output) {
      ++errors;
      continue;
    }
    traces.push_back(*r.trace);
    outputs.push_back(*r.output);
  }
  if (traces.empty()) throw Error(method + ": generation failed on every factual");
  MethodSummary s = aggregate(traces, outputs);
  s.arm = std::move(arm);
  s.method = std::move(method);
  s.cost = std::move(cost);
  s.errors = errors;
  return s;
}

ExperimentReport run_experiment(ExperimentKind kind, const RunConfig& config) {
  config.validate();
  ExperimentReport report;
  report.kind = to_string(kind);
  report.seed = config.seed;
  report.config = config.echo();

  if (kind == ExperimentKind::theorem) {
    SyntheticSpec spec = config.theorem_spec;
    report.theorem = verify_theorem1(spec, config.theorem_p, config.pdisc, config.theorem_trials,
                                     config.theorem_random_weightings, derive_seed(config.seed, streams::theorem));
    return report;
  }

  const PreparedData data = prepare_data(config);
  switch (kind) {
    case ExperimentKind::method_comparison:
    case ExperimentKind::cost_comparison: {
      const ScoringModel model = train_model(config, data.train, false);
      evaluate_arm(config, "base", data, data.train, model, kind == ExperimentKind::cost_comparison, report);
      break;
    }
    case ExperimentKind::accuracy: {
      RunConfig logistic = config;
      logistic.model = config.logistic;
      logistic.model.model_kind = ModelKind::linear_logistic;
      const std::pair<const char*, double> arms[] = {{"clean", 0.0}, {"flipped", config.flip_fraction}};
      for (const auto& [name, fraction] : arms) {
        const LabeledDataset train = flip_labels(data.train, fraction, derive_seed(config.seed, streams::flip));
        const ScoringModel model = train_model(logistic, train, false);
        evaluate_arm(logistic, name, data, train, model, false, report);
      }
      break;
    }
    case ExperimentKind::adv_training: {
      for (bool robust : {false, true}) {
        const ScoringModel model = train_model(config, data.train, robust);
        evaluate_arm(config, robust ? "robust" : "plain", data, data.train, model, false, report);
      }
      break;
    }
    case ExperimentKind::theorem:
      break;
  }
  return report;
}

}  // namespace nadv
