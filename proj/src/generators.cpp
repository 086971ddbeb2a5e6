#include "nadv/generators.hpp"

#include <algorithm>
#include <numeric>

#include "nadv/optim.hpp"

namespace nadv {

namespace {

void check_factual(const ScoringModel& model, const Vector& x, const GeneratorConfig& config,
                   const GenerationContext& context) {
  config.validate();
  require(x.size() == model.input_dim(), "factual dimension does not match the model");
  require(context.lower.size() == x.size() && context.upper.size() == x.size() &&
              context.actionable.size() == static_cast<std::size_t>(x.size()),
          "generation context dimension mismatch");
  if (model.predict(x).label == config.target)
    throw ContractError("factual already has the target label; recourse is undefined");
}

std::vector<bool> frozen_mask(const CostFunction& cost, const GenerationContext& context, Index k) {
  std::vector<bool> frozen(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) frozen[static_cast<std::size_t>(i)] = !context.actionable[static_cast<std::size_t>(i)] || cost.is_frozen(i);
  return frozen;
}

void apply_mask(Vector& g, const std::vector<bool>& frozen) {
  for (Index i = 0; i < g.size(); ++i)
    if (frozen[static_cast<std::size_t>(i)]) g[i] = 0.0;
}

// +1 when the target class needs a larger score.
double direction(const GeneratorConfig& config) { return config.target == 1 ? 1.0 : -1.0; }

RecourseOutput finish(const ScoringModel& model, const Vector& x, const Vector& x_prime, const CostFunction* cost,
                      const GeneratorConfig& config, int iterations) {
  RecourseOutput out;
  out.method = config.method;
  out.delta = x_prime - x;
  out.x_prime = x + out.delta;
  out.converged = out.x_prime.allFinite() && model.predict(out.x_prime).label == config.target;
  out.iterations_used = iterations;
  out.cost_value = cost ? cost->value(x, out.x_prime) : out.delta.norm();
  return out;
}

// Gradient of (h(x') - s)^2 + lambda * d(x, x').
Vector penalized_gradient(const ScoringModel& model, const Vector& x, const Vector& xp, const CostFunction& cost,
                          const GeneratorConfig& config) {
  const double s = direction(config) * config.target_score;
  Vector g = model.input_gradient(xp, Objective::squared_score_error(s));
  if (config.lambda > 0.0) g += config.lambda * cost.evaluate(x, xp).gradient;
  return g;
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "scfe") return Method::scfe;
  if (name == "dice") return Method::dice;
  if (name == "ar") return Method::ar;
  if (name == "cw") return Method::cw;
  if (name == "deepfool") return Method::deepfool;
  if (name == "pgd") return Method::pgd;
  throw ConfigError("unknown generator method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::scfe:
      return "scfe";
    case Method::dice:
      return "dice";
    case Method::ar:
      return "ar";
    case Method::cw:
      return "cw";
    case Method::deepfool:
      return "deepfool";
    case Method::pgd:
      return "pgd";
  }
  return "?";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::scfe, Method::dice, Method::ar,
                                           Method::cw,   Method::pgd,  Method::deepfool};
  return methods;
}

GeneratorConfig GeneratorConfig::defaults(Method method) {
  GeneratorConfig c;
  c.method = method;
  switch (method) {
    case Method::scfe:
    case Method::dice:
    case Method::ar:
      break;
    case Method::cw:
      c.learning_rate = 1e-2;
      c.max_iterations = 1000;
      break;
    case Method::deepfool:
      c.max_iterations = 50;
      break;
    case Method::pgd:
      c.max_iterations = 10;
      break;
  }
  return c;
}

void GeneratorConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("generator learning_rate must be > 0");
  if (max_iterations < 1) throw ConfigError("generator max_iterations must be >= 1");
  if (!(lambda >= 0.0)) throw ConfigError("generator lambda must be >= 0");
  if (target != 0 && target != 1) throw ConfigError("generator target must be 0 or 1");
  if (!(target_score >= 0.0)) throw ConfigError("generator target_score must be >= 0");
  if (!(cw_c > 0.0)) throw ConfigError("generator cw.c must be > 0");
  if (!(deepfool_overshoot >= 0.0)) throw ConfigError("generator deepfool.overshoot must be >= 0");
  if (!(pgd_epsilon > 0.0)) throw ConfigError("generator pgd.epsilon must be > 0");
  if (!(pgd_step_size > 0.0)) throw ConfigError("generator pgd.step_size must be > 0");
  if (dice_num_cfs < 1) throw ConfigError("generator dice.num_cfs must be >= 1");
  if (!(dice_diversity_weight >= 0.0)) throw ConfigError("generator dice.diversity_weight must be >= 0");
  if (ar_grid_bins < 2) throw ConfigError("generator ar.grid_bins must be >= 2");
  if (ar_max_changed < 1 || ar_max_changed > 2) throw ConfigError("generator ar.max_changed must be 1 or 2");
}

GenerationContext GenerationContext::from_dataset(const LabeledDataset& train) {
  require(train.n() >= 1, "generation context needs a non-empty dataset");
  GenerationContext c;
  c.lower = train.X.colwise().minCoeff().transpose();
  c.upper = train.X.colwise().maxCoeff().transpose();
  c.actionable.resize(static_cast<std::size_t>(train.k()));
  for (Index i = 0; i < train.k(); ++i) c.actionable[static_cast<std::size_t>(i)] = train.schema[static_cast<std::size_t>(i)].actionable;
  return c;
}

GenerationContext GenerationContext::unbounded(Index k) {
  GenerationContext c;
  c.lower = Vector::Constant(k, -std::numeric_limits<double>::infinity());
  c.upper = Vector::Constant(k, std::numeric_limits<double>::infinity());
  c.actionable.assign(static_cast<std::size_t>(k), true);
  return c;
}

// ---------------------------------------------------------------------------

RecourseOutput scfe(const ScoringModel& model, const Vector& x, const CostFunction& cost,
                    const GeneratorConfig& config, const GenerationContext& context) {
  check_factual(model, x, config, context);
  const auto frozen = frozen_mask(cost, context, x.size());
  Adam adam(AdamParams{config.learning_rate});
  Vector xp = x;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    Vector g = penalized_gradient(model, x, xp, cost, config);
    apply_mask(g, frozen);
    Vector next = xp;
    adam.step(next, g);
    if (!next.allFinite()) {
      RecourseOutput out = finish(model, x, xp, &cost, config, it);
      out.converged = false;
      return out;
    }
    xp = std::move(next);
  }
  return finish(model, x, xp, &cost, config, it);
}

DiceResult dice(const ScoringModel& model, const Vector& x, const CostFunction& cost, const GeneratorConfig& config,
                const GenerationContext& context) {
  check_factual(model, x, config, context);
  const auto frozen = frozen_mask(cost, context, x.size());
  const auto m = static_cast<std::size_t>(config.dice_num_cfs);
  const Index k = x.size();
  Rng rng(config.seed);
  std::normal_distribution<double> jitter(0.0, config.dice_init_scale);

  // Candidates are stacked into one vector so a single RMSProp state drives
  // the joint objective.
  Vector stacked(static_cast<Index>(m) * k);
  for (std::size_t j = 0; j < m; ++j) {
    Vector start = x;
    for (Index i = 0; i < k; ++i)
      if (!frozen[static_cast<std::size_t>(i)]) start[i] += jitter(rng);
    stacked.segment(static_cast<Index>(j) * k, k) = start;
  }
  const double pair_count = m > 1 ? static_cast<double>(m * (m - 1) / 2) : 1.0;

  RmsProp opt(RmsPropParams{config.learning_rate});
  bool finite = true;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    Vector grad = Vector::Zero(stacked.size());
    for (std::size_t j = 0; j < m; ++j) {
      const Vector xj = stacked.segment(static_cast<Index>(j) * k, k);
      Vector g = penalized_gradient(model, x, xj, cost, config);
      if (config.dice_diversity_weight > 0.0) {
        for (std::size_t l = 0; l < m; ++l) {
          if (l == j) continue;
          const Vector xl = stacked.segment(static_cast<Index>(l) * k, k);
          // d(x_l, x_j) differentiated w.r.t. x_j.
          g -= (config.dice_diversity_weight / pair_count) * cost.evaluate(xl, xj).gradient;
        }
      }
      apply_mask(g, frozen);
      grad.segment(static_cast<Index>(j) * k, k) = g;
    }
    Vector next = stacked;
    opt.step(next, grad);
    if (!next.allFinite()) {
      finite = false;
      break;
    }
    stacked = std::move(next);
  }

  DiceResult result;
  for (std::size_t j = 0; j < m; ++j) {
    RecourseOutput out = finish(model, x, stacked.segment(static_cast<Index>(j) * k, k), &cost, config, it);
    out.method = Method::dice;
    if (!finite) out.converged = false;
    result.candidates.push_back(std::move(out));
  }
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  result.selected = pick(rng);
  return result;
}

RecourseOutput ar_discrete(const ScoringModel& model, const Vector& x, const CostFunction& cost,
                           const GeneratorConfig& config, const GenerationContext& context) {
  check_factual(model, x, config, context);
  const auto frozen = frozen_mask(cost, context, x.size());
  std::vector<Index> features;
  for (Index i = 0; i < x.size(); ++i)
    if (!frozen[static_cast<std::size_t>(i)]) features.push_back(i);
  if (features.empty()) throw ConfigError("AR needs at least one actionable feature");

  // Grid values per feature that differ from the factual.
  std::vector<std::vector<double>> grid(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    const Index i = features[f];
    const double lo = std::min(context.lower[i], x[i]);
    const double hi = std::max(context.upper[i], x[i]);
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("AR needs finite feature ranges");
    for (int b = 0; b < config.ar_grid_bins; ++b) {
      const double v = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(config.ar_grid_bins - 1);
      if (v != x[i]) grid[f].push_back(v);
    }
  }

  struct Action {
    double cost;
    std::size_t order;
    int f1, b1, f2, b2;
  };
  std::vector<Action> actions;
  Vector probe = x;
  auto cost_of = [&](int f1, int b1, int f2, int b2) {
    probe[features[static_cast<std::size_t>(f1)]] = grid[static_cast<std::size_t>(f1)][static_cast<std::size_t>(b1)];
    if (f2 >= 0) probe[features[static_cast<std::size_t>(f2)]] = grid[static_cast<std::size_t>(f2)][static_cast<std::size_t>(b2)];
    const double c = cost.value(x, probe);
    probe[features[static_cast<std::size_t>(f1)]] = x[features[static_cast<std::size_t>(f1)]];
    if (f2 >= 0) probe[features[static_cast<std::size_t>(f2)]] = x[features[static_cast<std::size_t>(f2)]];
    return c;
  };
  const int nf = static_cast<int>(features.size());
  for (int f = 0; f < nf; ++f)
    for (int b = 0; b < static_cast<int>(grid[static_cast<std::size_t>(f)].size()); ++b)
      actions.push_back({cost_of(f, b, -1, -1), actions.size(), f, b, -1, -1});
  if (config.ar_max_changed >= 2) {
    for (int f = 0; f < nf; ++f)
      for (int g = f + 1; g < nf; ++g)
        for (int b = 0; b < static_cast<int>(grid[static_cast<std::size_t>(f)].size()); ++b)
          for (int c = 0; c < static_cast<int>(grid[static_cast<std::size_t>(g)].size()); ++c)
            actions.push_back({cost_of(f, b, g, c), actions.size(), f, b, g, c});
  }
  std::sort(actions.begin(), actions.end(), [](const Action& a, const Action& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.order < b.order);
  });

  // Best-first: the first action (in cost order) that reaches the target is
  // the minimum-cost feasible action on the grid.
  int checked = 0;
  for (const auto& a : actions) {
    ++checked;
    Vector xp = x;
    xp[features[static_cast<std::size_t>(a.f1)]] = grid[static_cast<std::size_t>(a.f1)][static_cast<std::size_t>(a.b1)];
    if (a.f2 >= 0) xp[features[static_cast<std::size_t>(a.f2)]] = grid[static_cast<std::size_t>(a.f2)][static_cast<std::size_t>(a.b2)];
    if (model.predict(xp).label == config.target) return finish(model, x, xp, &cost, config, checked);
  }
  return finish(model, x, x, &cost, config, checked);
}

RecourseOutput cw(const ScoringModel& model, const Vector& x, const CostFunction& cost, const GeneratorConfig& config,
                  const GenerationContext& context) {
  check_factual(model, x, config, context);
  const auto frozen = frozen_mask(cost, context, x.size());
  // The box always contains the factual itself.
  const Vector lower = context.lower.cwiseMin(x);
  const Vector upper = context.upper.cwiseMax(x);
  const double sign = direction(config);

  Adam adam(AdamParams{config.learning_rate});
  Vector xp = x;
  Vector best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int it = 0; it < config.max_iterations; ++it) {
    // Hinge l(x') = max(0, -sign * score): zero exactly when the target side is reached.
    const double s = model.score(xp);
    Vector g = cost.evaluate(x, xp).gradient;
    if (-sign * s >= 0.0) g -= config.cw_c * sign * model.input_gradient(xp, Objective::raw_score());
    apply_mask(g, frozen);
    adam.step(xp, g);
    if (!xp.allFinite()) break;
    xp = xp.cwiseMax(lower).cwiseMin(upper);
    if (model.predict(xp).label == config.target) {
      const double c = cost.value(x, xp);
      if (c < best_cost) {
        best_cost = c;
        best = xp;
      }
    }
  }
  if (best.size() > 0) return finish(model, x, best, &cost, config, config.max_iterations);
  RecourseOutput out = finish(model, x, xp.allFinite() ? xp : x, &cost, config, config.max_iterations);
  out.converged = false;
  return out;
}

RecourseOutput deepfool(const ScoringModel& model, const Vector& x, const GeneratorConfig& config,
                        const GenerationContext& context) {
  check_factual(model, x, config, context);
  std::vector<bool> frozen(context.actionable.size());
  for (std::size_t i = 0; i < frozen.size(); ++i) frozen[i] = !context.actionable[i];
  const double sign = direction(config);
  const double scale = 1.0 + config.deepfool_overshoot;

  Vector total = Vector::Zero(x.size());
  Vector current = x;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const double s = model.score(current);
    Vector g = model.input_gradient(current, Objective::raw_score());
    apply_mask(g, frozen);
    const double norm2 = g.squaredNorm();
    if (!(norm2 > 0.0)) {
      RecourseOutput out = finish(model, x, current, nullptr, config, it);
      out.converged = false;
      return out;
    }
    // Step onto the linearized boundary, moving toward the target class.
    total += (std::abs(s) / norm2) * sign * g;
    current = x + scale * total;
    if (model.predict(current).label == config.target) return finish(model, x, current, nullptr, config, it);
  }
  return finish(model, x, current, nullptr, config, config.max_iterations);
}

RecourseOutput pgd(const ScoringModel& model, const Vector& x, const CostFunction& cost, const GeneratorConfig& config,
                   const GenerationContext& context) {
  check_factual(model, x, config, context);
  const auto frozen = frozen_mask(cost, context, x.size());
  const double eps = config.pgd_epsilon;
  Vector delta = Vector::Zero(x.size());
  for (int it = 0; it < config.max_iterations; ++it) {
    const Vector xp = x + delta;
    // Ascent direction of -CE(target) - lambda * d(x, x').
    Vector g = -model.input_gradient(xp, Objective::cross_entropy(config.target));
    if (config.lambda > 0.0) g -= config.lambda * cost.evaluate(x, xp).gradient;
    apply_mask(g, frozen);
    delta += config.pgd_step_size * g.array().sign().matrix();
    delta = delta.cwiseMax(-eps).cwiseMin(eps);
  }
  return finish(model, x, x + delta, &cost, config, config.max_iterations);
}

RecourseOutput generate(const ScoringModel& model, const Vector& x, const CostFunction& cost,
                        const GeneratorConfig& config, const GenerationContext& context) {
  switch (config.method) {
    case Method::scfe:
      return scfe(model, x, cost, config, context);
    case Method::dice: {
      auto result = dice(model, x, cost, config, context);
      return std::move(result.candidates[result.selected]);
    }
    case Method::ar:
      return ar_discrete(model, x, cost, config, context);
    case Method::cw:
      return cw(model, x, cost, config, context);
    case Method::deepfool:
      return deepfool(model, x, config, context);
    case Method::pgd:
      return pgd(model, x, cost, config, context);
  }
  throw ConfigError("unknown generator method");
}

}  // namespace nadv
