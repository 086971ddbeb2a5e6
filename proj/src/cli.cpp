#include "nadv/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "nadv/plot.hpp"
#include "nadv/report.hpp"

namespace nadv {

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "overrides run.seed (fallback: NONADV_SEED)");
  cmd->add_option("--workers", opts.workers, "parallel factual workers")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opts.out, "output directory (overrides run.output_dir)");
}

// Seed precedence: --seed, then run.seed in the config, then NONADV_SEED.
RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig config = opts.config_path.empty() ? RunConfig() : RunConfig::load(opts.config_path);
  if (opts.seed) {
    config.seed = *opts.seed;
  } else if (!config.seed_explicit) {
    if (const char* env = std::getenv("NONADV_SEED")) {
      const std::string text(env);
      try {
        std::size_t used = 0;
        config.seed = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        throw ConfigError("NONADV_SEED must be a non-negative integer, got '" + text + "'");
      }
    }
  }
  if (opts.workers) config.workers = *opts.workers;
  if (!opts.out.empty()) config.output_dir = opts.out;
  config.validate();
  return config;
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (std::filesystem::path(config.output_dir) / name).string();
}

ScoringModel model_for(const RunConfig& config, const PreparedData& data, const std::string& model_path) {
  if (model_path.empty()) return train_model(config, data.train, false);
  ScoringModel model = load_model(model_path);
  if (model.input_dim() != data.train.k())
    throw ConfigError("model input dimension " + std::to_string(model.input_dim()) + " does not match the dataset (" +
                      std::to_string(data.train.k()) + " features)");
  return model;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  SyntheticSpec spec = config.synthetic;
  spec.seed = derive_seed(config.seed, streams::dataset);
  const SyntheticData synth = generate_synthetic(spec);
  std::string csv = "# nadv-synth v1 seed=" + std::to_string(config.seed) + "\n";
  for (const auto& name : synth.dataset.schema.names()) csv += name + ",";
  csv += "label\n";
  char buf[32];
  for (Index i = 0; i < synth.dataset.n(); ++i) {
    for (Index j = 0; j < synth.dataset.k(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", synth.dataset.X(i, j));
      csv += std::string(buf) + ",";
    }
    csv += std::to_string(synth.dataset.y[static_cast<std::size_t>(i)]) + "\n";
  }
  std::string beta = "# nadv-beta v1\nfeature,beta\n";
  for (Index j = 0; j < synth.true_beta.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", synth.true_beta[j]);
    beta += synth.dataset.schema.names()[static_cast<std::size_t>(j)] + "," + buf + "\n";
  }
  write_text_file(out_path(config, "synthetic.csv"), csv);
  write_text_file(out_path(config, "synthetic_schema.ini"), schema_to_ini(synth.dataset.schema));
  write_text_file(out_path(config, "synthetic_beta.csv"), beta);
  out << out_path(config, "synthetic.csv") << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, bool adversarial, std::ostream& out) {
  const PreparedData data = prepare_data(config);
  const ScoringModel model = train_model(config, data.train, adversarial);
  const std::string path = out_path(config, adversarial ? "model_robust.txt" : "model.txt");
  std::filesystem::create_directories(config.output_dir);
  save_model(model, path);
  out << path << "\n";
  out << "test accuracy " << accuracy(model, data.test) << "\n";
  return kExitOk;
}

int cmd_generate(const RunConfig& config, const std::string& model_path, std::ostream& out) {
  const PreparedData data = prepare_data(config);
  const ScoringModel model = model_for(config, data, model_path);
  const auto rows = select_factuals(model, data.test, config.target, config.max_factuals);
  if (rows.empty()) throw Error("no test factual has model label != generator.target");
  Matrix factuals(static_cast<Index>(rows.size()), data.test.k());
  for (std::size_t i = 0; i < rows.size(); ++i) factuals.row(static_cast<Index>(i)) = data.test.X.row(rows[i]);
  const CostFunction cost = make_cost(config.cost_kind, config.cost_weights,
                                      estimate_coefficients(model, data.train, factuals), config.cost_p, config.pdisc);
  const GenerationContext context = GenerationContext::from_dataset(data.train);
  std::string cost_label = to_string(config.cost_kind);
  if (config.cost_kind == CostKind::weighted_quadratic) cost_label += ":" + config.cost_weights;

  std::vector<RecourseRecord> records;
  for (Method m : config.methods) {
    GeneratorConfig g = config.generator(m);
    g.target = config.target;
    g.seed = derive_seed(derive_seed(config.seed, streams::generator), static_cast<std::uint64_t>(m));
    for (const auto& res : run_factuals(config, model, data.oracle, data.test, rows, cost, g, context))
      if (res.output)
        records.push_back({to_string(m), cost_label, res.row, data.test.X.row(res.row).transpose(), *res.output});
  }
  const std::string path = out_path(config, "recourse.jsonl");
  write_text_file(path, recourse_to_jsonl(records, config.echo(), config.seed));
  out << path << "\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& config, const std::string& recourse_path, const std::string& model_path,
                 std::ostream& out) {
  const auto records = parse_recourse_jsonl(read_text_file(recourse_path));
  if (records.empty()) throw Error("recourse file '" + recourse_path + "' holds no records");
  const PreparedData data = prepare_data(config);
  const ScoringModel model = model_for(config, data, model_path);

  // Groups keep first-appearance order.
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<RetryTrace>, std::vector<RecourseOutput>>> groups;
  for (const auto& r : records) {
    if (r.x.size() != model.input_dim()) throw ParseError("recourse record dimension does not match the model", 0);
    const auto key = std::make_pair(r.method, r.cost);
    if (!groups.count(key)) order.push_back(key);
    auto& g = groups[key];
    g.first.push_back(retry_trace(model, data.oracle, r.x, r.output.delta, config.r_max, config.target));
    g.second.push_back(r.output);
  }
  ExperimentReport report;
  report.kind = "evaluate";
  report.seed = config.seed;
  report.config = config.echo();
  for (const auto& key : order) {
    MethodSummary s = aggregate(groups[key].first, groups[key].second);
    s.arm = "base";
    s.method = key.first;
    s.cost = key.second;
    report.summaries.push_back(std::move(s));
  }
  for (const auto& p : write_report(report, config.output_dir)) out << p << "\n";
  return kExitOk;
}

int cmd_experiment(const RunConfig& config, const std::string& kind, std::ostream& out) {
  const ExperimentReport report = run_experiment(parse_experiment_kind(kind), config);
  for (const auto& p : write_report(report, config.output_dir)) out << p << "\n";
  return kExitOk;
}

}  // namespace


int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nadv: non-adversarial recourse benchmark harness"};
  app.name("nadv");
  app.require_subcommand(1, 1);

  CommonOptions opts;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset, its schema and true coefficients");
  add_common(synth, opts);

  bool adversarial = false;
  auto* train_cmd = app.add_subcommand("train", "train a model and save it");
  add_common(train_cmd, opts);
  train_cmd->add_flag("--adversarial", adversarial, "adversarial training (model.adv_* settings)");

  std::string model_path, methods;
  auto* generate_cmd = app.add_subcommand("generate", "generate recourse for unfavourable test factuals");
  add_common(generate_cmd, opts);
  generate_cmd->add_option("--model", model_path, "saved model (default: train from the config)")
      ->check(CLI::ExistingFile);
  generate_cmd->add_option("--methods", methods, "comma-separated methods (overrides generator.methods)");

  std::string recourse_path;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "retry-evaluate a recourse file against the oracle");
  add_common(evaluate_cmd, opts);
  evaluate_cmd->add_option("--recourse", recourse_path, "recourse.jsonl from `generate`")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--model", model_path, "saved model (default: train from the config)")
      ->check(CLI::ExistingFile);

  std::string kind;
  auto* experiment_cmd = app.add_subcommand("experiment", "run a full experiment and write its report");
  add_common(experiment_cmd, opts);
  experiment_cmd->add_option("--kind", kind, "method_comparison | cost_comparison | accuracy | adv_training | theorem")
      ->required();

  std::string p;
  std::optional<int> trials, random_weightings;
  auto* theorem_cmd = app.add_subcommand("verify-theorem", "Monte-Carlo check of the optimal cost weighting");
  add_common(theorem_cmd, opts);
  theorem_cmd->add_option("--p", p, "norm: 1, 2 or inf (overrides theorem.p)");
  theorem_cmd->add_option("--trials", trials, "overrides theorem.trials");
  theorem_cmd->add_option("--random-weightings", random_weightings, "overrides theorem.random_weightings");

  std::vector<std::string> report_paths;
  std::string plot_out = "plots";
  auto* plot_cmd = app.add_subcommand("plot", "render SVG charts from JSONL reports");
  plot_cmd->add_option("reports", report_paths, "report .jsonl files")->required();
  plot_cmd->add_option("--out", plot_out, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (plot_cmd->parsed()) {
      for (const auto& path : render_plots(report_paths, plot_out)) out << path << "\n";
      return kExitOk;
    }
    RunConfig config = resolve_config(opts);
    if (synth->parsed()) return cmd_synth(config, out);
    if (train_cmd->parsed()) return cmd_train(config, adversarial, out);
    if (generate_cmd->parsed()) {
      if (!methods.empty()) {
        config.methods.clear();
        std::stringstream ss(methods);
        std::string item;
        while (std::getline(ss, item, ',')) config.methods.push_back(parse_method(item));
        config.validate();
      }
      return cmd_generate(config, model_path, out);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(config, recourse_path, model_path, out);
    if (experiment_cmd->parsed()) return cmd_experiment(config, kind, out);
    if (theorem_cmd->parsed()) {
      if (!p.empty()) config.theorem_p = parse_norm(p);
      if (trials) config.theorem_trials = *trials;
      if (random_weightings) config.theorem_random_weightings = *random_weightings;
      config.validate();
      return cmd_experiment(config, "theorem", out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace nadv
