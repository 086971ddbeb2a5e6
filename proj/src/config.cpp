#include "nadv/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace nadv {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value, "a finite number");
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad_value(key, value, "an int");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a non-negative integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::string> to_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Index> to_index_list(const std::string& key, const std::string& value) {
  std::vector<Index> out;
  for (const auto& item : to_list(value)) out.push_back(static_cast<Index>(to_integer(key, item)));
  return out;
}

std::vector<Index> to_hidden(const std::string& key, const std::string& value) {
  auto out = to_index_list(key, value);
  for (Index h : out)
    if (h < 1) bad_value(key, value, "positive layer widths");
  return out;
}

template <class T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + fmt(items[i]);
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

std::string fmt_indices(const std::vector<Index>& v) {
  return join<Index>(v, [](const Index& i) { return std::to_string(i); });
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Key real_key(std::string name, Member member) {
  return {name, [name, member](RunConfig& c, const std::string& v) { member(c) = to_double(name, v); },
          [member](const RunConfig& c) { return fmt_double(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key int_key(std::string name, Member member) {
  return {name, [name, member](RunConfig& c, const std::string& v) { member(c) = to_int(name, v); },
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key index_key(std::string name, Member member) {
  return {name,
          [name, member](RunConfig& c, const std::string& v) { member(c) = static_cast<Index>(to_integer(name, v)); },
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key bool_key(std::string name, Member member) {
  return {name, [name, member](RunConfig& c, const std::string& v) { member(c) = to_bool(name, v); },
          [member](const RunConfig& c) { return fmt_bool(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
Key string_key(std::string name, Member member) {
  return {name, [member](RunConfig& c, const std::string& v) { member(c) = v; },
          [member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); }};
}

// Wraps enum parsers so their ConfigError names the key.
template <class F>
auto keyed(const std::string& name, const std::string& value, F parse) {
  try {
    return parse(value);
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

void add_train_keys(std::vector<Key>& keys, const std::string& section, TrainConfig& (*member)(RunConfig&),
                    bool with_kind) {
  if (with_kind)
    keys.push_back({section + ".kind",
                    [section, member](RunConfig& c, const std::string& v) {
                      member(c).model_kind = keyed(section + ".kind", v, parse_model_kind);
                    },
                    [member](const RunConfig& c) { return to_string(member(const_cast<RunConfig&>(c)).model_kind); }});
  keys.push_back(real_key(section + ".learning_rate", [member](RunConfig& c) -> double& { return member(c).learning_rate; }));
  keys.push_back(int_key(section + ".epochs", [member](RunConfig& c) -> int& { return member(c).epochs; }));
  keys.push_back(int_key(section + ".batch_size", [member](RunConfig& c) -> int& { return member(c).batch_size; }));
  keys.push_back(real_key(section + ".l2_penalty", [member](RunConfig& c) -> double& { return member(c).l2_penalty; }));
  keys.push_back({section + ".optimizer",
                  [section, member](RunConfig& c, const std::string& v) {
                    member(c).optimizer = keyed(section + ".optimizer", v, parse_optimizer);
                  },
                  [member](const RunConfig& c) { return to_string(member(const_cast<RunConfig&>(c)).optimizer); }});
  if (with_kind)
    keys.push_back({section + ".hidden",
                    [section, member](RunConfig& c, const std::string& v) {
                      member(c).hidden = to_hidden(section + ".hidden", v);
                    },
                    [member](const RunConfig& c) { return fmt_indices(member(const_cast<RunConfig&>(c)).hidden); }});
}

std::vector<Key> build_keys() {
  std::vector<Key> k;
  k.push_back({"run.seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("run.seed", v); },
               [](const RunConfig& c) { return std::to_string(c.seed); }});
  k.push_back(string_key("run.output_dir", [](RunConfig& c) -> std::string& { return c.output_dir; }));
  k.push_back(int_key("run.workers", [](RunConfig& c) -> int& { return c.workers; }));

  k.push_back({"dataset.source",
               [](RunConfig& c, const std::string& v) {
                 if (v == "synthetic")
                   c.source = DatasetSource::synthetic;
                 else if (v == "csv")
                   c.source = DatasetSource::csv;
                 else
                   bad_value("dataset.source", v, "synthetic or csv");
               },
               [](const RunConfig& c) { return std::string(c.source == DatasetSource::csv ? "csv" : "synthetic"); }});
  k.push_back(index_key("dataset.n", [](RunConfig& c) -> Index& { return c.synthetic.n; }));
  k.push_back(index_key("dataset.k", [](RunConfig& c) -> Index& { return c.synthetic.k; }));
  k.push_back({"dataset.disc_indices",
               [](RunConfig& c, const std::string& v) { c.synthetic.disc_indices = to_index_list("dataset.disc_indices", v); },
               [](const RunConfig& c) { return fmt_indices(c.synthetic.disc_indices); }});
  k.push_back(real_key("dataset.alpha", [](RunConfig& c) -> double& { return c.synthetic.alpha; }));
  k.push_back(real_key("dataset.sigma", [](RunConfig& c) -> double& { return c.synthetic.sigma; }));
  k.push_back(string_key("dataset.csv_path", [](RunConfig& c) -> std::string& { return c.csv_path; }));
  k.push_back(string_key("dataset.schema_path", [](RunConfig& c) -> std::string& { return c.schema_path; }));
  k.push_back(string_key("dataset.label_column", [](RunConfig& c) -> std::string& { return c.label_column; }));

  k.push_back(real_key("split.expert", [](RunConfig& c) -> double& { return c.split.expert; }));
  k.push_back(real_key("split.train", [](RunConfig& c) -> double& { return c.split.train; }));
  k.push_back(real_key("split.test", [](RunConfig& c) -> double& { return c.split.test; }));

  add_train_keys(k, "model", [](RunConfig& c) -> TrainConfig& { return c.model; }, true);
  k.push_back(real_key("model.adv_epsilon", [](RunConfig& c) -> double& { return c.adversarial.epsilon; }));
  k.push_back(int_key("model.adv_inner_steps", [](RunConfig& c) -> int& { return c.adversarial.inner_steps; }));
  k.push_back(real_key("model.adv_inner_step_size", [](RunConfig& c) -> double& { return c.adversarial.inner_step_size; }));
  add_train_keys(k, "logistic", [](RunConfig& c) -> TrainConfig& { return c.logistic; }, false);

  k.push_back({"oracle.kind",
               [](RunConfig& c, const std::string& v) {
                 if (v == "knn")
                   c.oracle_kind = OracleKind::knn;
                 else if (v == "linear")
                   c.oracle_kind = OracleKind::linear;
                 else
                   bad_value("oracle.kind", v, "knn or linear");
               },
               [](const RunConfig& c) { return std::string(c.oracle_kind == OracleKind::knn ? "knn" : "linear"); }});
  k.push_back(int_key("oracle.k", [](RunConfig& c) -> int& { return c.oracle_k; }));
  k.push_back({"oracle.features", [](RunConfig& c, const std::string& v) { c.oracle_features = to_list(v); },
               [](const RunConfig& c) {
                 return join<std::string>(c.oracle_features, [](const std::string& s) { return s; });
               }});
  k.push_back(bool_key("oracle.relabel", [](RunConfig& c) -> bool& { return c.oracle_relabel; }));

  k.push_back({"generator.methods",
               [](RunConfig& c, const std::string& v) {
                 c.methods.clear();
                 for (const auto& name : to_list(v)) c.methods.push_back(keyed("generator.methods", name, parse_method));
               },
               [](const RunConfig& c) {
                 return join<Method>(c.methods, [](const Method& m) { return to_string(m); });
               }});
  k.push_back(int_key("generator.target", [](RunConfig& c) -> int& { return c.target; }));
  for (Method m : {Method::scfe, Method::dice, Method::ar, Method::cw, Method::deepfool, Method::pgd}) {
    const std::string p = "generator." + to_string(m) + ".";
    auto g = [m](RunConfig& c) -> GeneratorConfig& { return c.generator(m); };
    k.push_back(real_key(p + "learning_rate", [g](RunConfig& c) -> double& { return g(c).learning_rate; }));
    k.push_back(int_key(p + "max_iterations", [g](RunConfig& c) -> int& { return g(c).max_iterations; }));
    k.push_back(real_key(p + "lambda", [g](RunConfig& c) -> double& { return g(c).lambda; }));
    switch (m) {
      case Method::scfe:
        k.push_back(real_key(p + "target_score", [g](RunConfig& c) -> double& { return g(c).target_score; }));
        break;
      case Method::dice:
        k.push_back(real_key(p + "target_score", [g](RunConfig& c) -> double& { return g(c).target_score; }));
        k.push_back(int_key(p + "num_cfs", [g](RunConfig& c) -> int& { return g(c).dice_num_cfs; }));
        k.push_back(real_key(p + "diversity_weight", [g](RunConfig& c) -> double& { return g(c).dice_diversity_weight; }));
        k.push_back(real_key(p + "init_scale", [g](RunConfig& c) -> double& { return g(c).dice_init_scale; }));
        break;
      case Method::ar:
        k.push_back(int_key(p + "grid_bins", [g](RunConfig& c) -> int& { return g(c).ar_grid_bins; }));
        k.push_back(int_key(p + "max_changed", [g](RunConfig& c) -> int& { return g(c).ar_max_changed; }));
        break;
      case Method::cw:
        k.push_back(real_key(p + "c", [g](RunConfig& c) -> double& { return g(c).cw_c; }));
        break;
      case Method::deepfool:
        k.push_back(real_key(p + "overshoot", [g](RunConfig& c) -> double& { return g(c).deepfool_overshoot; }));
        break;
      case Method::pgd:
        k.push_back(real_key(p + "epsilon", [g](RunConfig& c) -> double& { return g(c).pgd_epsilon; }));
        k.push_back(real_key(p + "step_size", [g](RunConfig& c) -> double& { return g(c).pgd_step_size; }));
        break;
    }
  }

  k.push_back({"cost.kind", [](RunConfig& c, const std::string& v) { c.cost_kind = keyed("cost.kind", v, parse_cost_kind); },
               [](const RunConfig& c) { return to_string(c.cost_kind); }});
  k.push_back(string_key("cost.weights", [](RunConfig& c) -> std::string& { return c.cost_weights; }));
  k.push_back({"cost.p", [](RunConfig& c, const std::string& v) { c.cost_p = keyed("cost.p", v, parse_norm); },
               [](const RunConfig& c) { return to_string(c.cost_p); }});
  k.push_back(real_key("cost.alpha", [](RunConfig& c) -> double& { return c.pdisc.alpha; }));
  k.push_back(real_key("cost.q", [](RunConfig& c) -> double& { return c.pdisc.q; }));

  k.push_back(int_key("evaluation.r_max", [](RunConfig& c) -> int& { return c.r_max; }));
  k.push_back(int_key("evaluation.max_factuals", [](RunConfig& c) -> int& { return c.max_factuals; }));
  k.push_back(real_key("evaluation.flip_fraction", [](RunConfig& c) -> double& { return c.flip_fraction; }));

  k.push_back(index_key("theorem.n", [](RunConfig& c) -> Index& { return c.theorem_spec.n; }));
  k.push_back(index_key("theorem.k", [](RunConfig& c) -> Index& { return c.theorem_spec.k; }));
  k.push_back({"theorem.disc_indices",
               [](RunConfig& c, const std::string& v) {
                 c.theorem_spec.disc_indices = to_index_list("theorem.disc_indices", v);
               },
               [](const RunConfig& c) { return fmt_indices(c.theorem_spec.disc_indices); }});
  k.push_back(real_key("theorem.alpha", [](RunConfig& c) -> double& { return c.theorem_spec.alpha; }));
  k.push_back(real_key("theorem.sigma", [](RunConfig& c) -> double& { return c.theorem_spec.sigma; }));
  k.push_back({"theorem.p", [](RunConfig& c, const std::string& v) { c.theorem_p = keyed("theorem.p", v, parse_norm); },
               [](const RunConfig& c) { return to_string(c.theorem_p); }});
  k.push_back(int_key("theorem.trials", [](RunConfig& c) -> int& { return c.theorem_trials; }));
  k.push_back(int_key("theorem.random_weightings", [](RunConfig& c) -> int& { return c.theorem_random_weightings; }));
  return k;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = build_keys();
  return table;
}

pt::ptree read_ini(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  return tree;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunConfig::RunConfig() {
  for (Method m : {Method::scfe, Method::dice, Method::ar, Method::cw, Method::deepfool, Method::pgd})
    generators.push_back(GeneratorConfig::defaults(m));
}

void RunConfig::validate() const {
  if (workers < 1) throw ConfigError("run.workers must be >= 1");
  if (source == DatasetSource::synthetic) {
    synthetic.validate();
  } else {
    if (csv_path.empty()) throw ConfigError("dataset.csv_path is required when dataset.source = csv");
    if (schema_path.empty()) throw ConfigError("dataset.schema_path is required when dataset.source = csv");
    if (oracle_kind == OracleKind::linear) throw ConfigError("oracle.kind = linear needs dataset.source = synthetic");
  }
  for (auto [name, v] : {std::pair{"split.expert", split.expert}, {"split.train", split.train}, {"split.test", split.test}})
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must be in (0, 1)");
  if (std::abs(split.expert + split.train + split.test - 1.0) > 1e-9)
    throw ConfigError("split.expert + split.train + split.test must equal 1");
  model.validate();
  adversarial.validate();
  logistic.validate();
  if (oracle_k < 1 || oracle_k % 2 == 0) throw ConfigError("oracle.k must be a positive odd integer");
  if (methods.empty()) throw ConfigError("generator.methods must name at least one method");
  if (target != 0 && target != 1) throw ConfigError("generator.target must be 0 or 1");
  for (const auto& g : generators) {
    try {
      g.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("generator." + to_string(g.method) + ": " + e.what());
    }
  }
  if (cost_weights != "unit" && cost_weights != "squared_gradient" && cost_weights != "inverse_squared" &&
      cost_weights != "optimal")
    throw ConfigError("cost.weights must be unit, squared_gradient, inverse_squared or optimal");
  if (cost_weights != "unit" && cost_kind != CostKind::weighted_quadratic)
    throw ConfigError("cost.weights = " + cost_weights + " requires cost.kind = weighted_quadratic");
  pdisc.validate();
  if (r_max < 0) throw ConfigError("evaluation.r_max must be >= 0");
  if (max_factuals < 1) throw ConfigError("evaluation.max_factuals must be >= 1");
  if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) throw ConfigError("evaluation.flip_fraction must be in [0, 1]");
  try {
    theorem_spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("theorem: ") + e.what());
  }
  if (theorem_trials < 1) throw ConfigError("theorem.trials must be >= 1");
  if (theorem_random_weightings < 0) throw ConfigError("theorem.random_weightings must be >= 0");
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& key : keys()) out.emplace_back(key.name, key.get(*this));
  return out;
}

std::string RunConfig::to_ini() const {
  std::string out = "# nadv-config v1\n";
  std::string section;
  for (const auto& [name, value] : echo()) {
    const auto dot = name.find('.');
    const std::string s = name.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + s + "]\n";
      section = s;
    }
    out += name.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

RunConfig RunConfig::parse(const std::string& ini_text) {
  const pt::ptree tree = read_ini(ini_text);
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("unknown config key '" + section + "' (keys must sit inside a [section])");
    for (const auto& [name, node] : body) {
      const std::string full = section + "." + name;
      const Key* key = nullptr;
      for (const auto& candidate : keys())
        if (candidate.name == full) key = &candidate;
      if (!key) throw ConfigError("unknown config key '" + full + "'");
      key->set(config, trim(node.data()));
      if (full == "run.seed") config.seed_explicit = true;
    }
  }
  for (auto& g : config.generators) g.target = config.target;
  config.validate();
  return config;
}

RunConfig RunConfig::load(const std::string& path) { return parse(read_file(path)); }

FeatureSchema parse_schema(const std::string& ini_text) {
  const pt::ptree tree = read_ini(ini_text);
  std::vector<Feature> features;
  const std::string prefix = "feature.";
  for (const auto& [section, body] : tree) {
    if (section.rfind(prefix, 0) != 0 || section.size() == prefix.size())
      throw ConfigError("schema: unexpected section '" + section + "' (expected [feature.<name>])");
    Feature f;
    f.name = section.substr(prefix.size());
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const std::string value = trim(node.data());
      if (name == "kind") {
        if (value == "continuous")
          f.kind = FeatureKind::continuous;
        else if (value == "categorical")
          f.kind = FeatureKind::categorical;
        else
          bad_value(key, value, "continuous or categorical");
      } else if (name == "categories") {
        f.categories = to_list(value);
      } else if (name == "actionable") {
        f.actionable = to_bool(key, value);
      } else if (name == "discriminative") {
        f.discriminative = to_bool(key, value);
      } else {
        throw ConfigError("unknown schema key '" + key + "'");
      }
    }
    if (f.kind == FeatureKind::categorical && f.categories.empty())
      throw ConfigError("schema: " + section + ".categories is required for categorical features");
    features.push_back(std::move(f));
  }
  if (features.empty()) throw ConfigError("schema declares no features");
  FeatureSchema schema(std::move(features));
  schema.validate();
  return schema;
}

FeatureSchema load_schema(const std::string& path) { return parse_schema(read_file(path)); }

std::string schema_to_ini(const FeatureSchema& schema) {
  std::string out = "# nadv-schema v1\n";
  for (const auto& f : schema.features()) {
    require(f.kind != FeatureKind::one_hot, "schema_to_ini: expects a raw schema");
    out += "\n[feature." + f.name + "]\n";
    out += std::string("kind = ") + (f.kind == FeatureKind::categorical ? "categorical" : "continuous") + "\n";
    if (f.kind == FeatureKind::categorical)
      out += "categories = " + join<std::string>(f.categories, [](const std::string& c) { return c; }) + "\n";
    out += "actionable = " + fmt_bool(f.actionable) + "\n";
    out += "discriminative = " + fmt_bool(f.discriminative) + "\n";
  }
  return out;
}

}  // namespace nadv
