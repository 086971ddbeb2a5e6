#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nadv/cli.hpp"
#include "nadv/plot.hpp"
#include "nadv/report.hpp"

using namespace nadv;
using namespace nadv::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallRun =
    "[run]\nseed = 5\n"
    "[dataset]\nn = 300\n"
    "[model]\nepochs = 30\n"
    "[generator]\nmethods = scfe,deepfool,ar\n"
    "[evaluation]\nmax_factuals = 10\n";

ExperimentReport one_method_report(double share) {
  ExperimentReport r;
  r.kind = "method_comparison";
  r.seed = 1;
  r.config = RunConfig().echo();
  MethodSummary s;
  s.arm = "base";
  s.method = "scfe";
  s.cost = "l2";
  s.r_max = 5;
  s.share.assign(6, share);
  s.outputs = s.converged = 4;
  r.summaries.push_back(s);
  return r;
}

}  // namespace

TEST_CASE("config: defaults, overrides and echo round trip") {
  const auto c = RunConfig::parse(
      "# comment\n[run]\nseed = 42\n[dataset]\nn = 123\nsigma = 0.25\n[generator]\nmethods = pgd, ar\n"
      "pgd.epsilon = 1.5\n[cost]\nkind = weighted_quadratic\nweights = optimal\np = inf\n");
  CHECK(c.seed == 42);
  CHECK(c.seed_explicit);
  CHECK(c.synthetic.n == 123);
  CHECK(c.synthetic.sigma == 0.25);
  CHECK(c.methods == std::vector<Method>{Method::pgd, Method::ar});
  CHECK(c.generator(Method::pgd).pgd_epsilon == 1.5);
  CHECK(c.cost_p == NormP::inf);
  const auto again = RunConfig::parse(c.to_ini());
  CHECK(again.echo() == c.echo());
  CHECK(!RunConfig::parse("").seed_explicit);
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      RunConfig::parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[model]\nbogus = 1\n").find("model.bogus") != std::string::npos);
  CHECK(message("[dataset]\nn = many\n").find("dataset.n") != std::string::npos);
  CHECK(message("[oracle]\nk = 4\n").find("oracle.k") != std::string::npos);
  CHECK(message("[generator]\nmethods = scfe,magic\n").find("generator.methods") != std::string::npos);
  CHECK(message("[split]\nexpert = 0.5\n").find("split") != std::string::npos);
  CHECK(message("[cost]\nweights = optimal\n").find("cost.weights") != std::string::npos);
  CHECK(message("[run]\nseed = 1\nseed = 2\n").find("duplicate") != std::string::npos);
}

TEST_CASE("schema files round-trip") {
  const auto schema = load_schema(NADV_SOURCE_DIR "/configs/german_schema.ini");
  const auto again = parse_schema(schema_to_ini(schema));
  CHECK(again.names() == schema.names());
  CHECK(again.discriminative_indices() == schema.discriminative_indices());
  CHECK_THROWS_AS(parse_schema("[feature.a]\nkind = ordinal\n"), ConfigError);
  CHECK_THROWS_AS(parse_schema("[feature.a]\nkind = categorical\n"), ConfigError);
}

TEST_CASE("reports round-trip through JSONL") {
  ExperimentReport r = one_method_report(0.5);
  r.summaries[0].mean_retries = std::numeric_limits<double>::quiet_NaN();
  r.arms.push_back({"base", 0.9, 0.8, 100, 4});
  const auto text = report_to_jsonl(r);
  const auto back = parse_report_jsonl(text);
  CHECK(back.kind == r.kind);
  CHECK(back.config == r.config);
  CHECK(back.summaries[0].share == r.summaries[0].share);
  CHECK(std::isnan(back.summaries[0].mean_retries));
  CHECK(report_to_jsonl(back) == text);
  CHECK(report_to_csv(r).rfind("# nadv-report-csv v1", 0) == 0);
}

TEST_CASE("malformed and empty reports are rejected") {
  CHECK_THROWS_AS(parse_report_jsonl(""), Error);
  CHECK_THROWS_AS(parse_report_jsonl("{not json}\n"), ParseError);
  CHECK_THROWS_AS(parse_report_jsonl("{\"record\":\"summary\"}\n"), ParseError);
  auto text = report_to_jsonl(one_method_report(1.0));
  text.erase(text.rfind("{\"record\":\"share\""));
  CHECK_THROWS_AS(parse_report_jsonl(text), ParseError);
  ExperimentReport empty = one_method_report(1.0);
  empty.summaries.clear();
  CHECK_THROWS_AS(parse_report_jsonl(report_to_jsonl(empty)), Error);
  CHECK_THROWS_AS(render_svg(empty), Error);
}

TEST_CASE("constant share 1 plots as a horizontal line at 1") {
  const PlotGeometry g;
  const std::string svg = render_svg(one_method_report(1.0), g);
  const auto start = svg.find("points=\"");
  REQUIRE(start != std::string::npos);
  const std::string points = svg.substr(start + 8, svg.find('"', start + 8) - start - 8);
  std::istringstream in(points);
  std::string pair;
  int n = 0;
  char y_expected[32];
  std::snprintf(y_expected, sizeof y_expected, "%.2f", g.y_of(1.0));
  while (in >> pair) {
    CHECK(pair.substr(pair.find(',') + 1) == y_expected);
    ++n;
  }
  CHECK(n == 6);
  CHECK(render_svg(one_method_report(1.0)) == svg);
}

TEST_CASE("dispatch: usage errors exit 2, config errors exit 1") {
  auto r = run({"frobnicate"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"experiment", "--kind", "accuracy", "--bogus"}).code == kExitUsage);

  const auto dir = scratch_dir("cli_cfg");
  const auto bad = write_file(dir / "bad.ini", "[model]\nlearning_rate = -1\n");
  r = run({"experiment", "--kind", "method_comparison", "--config", bad});
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find("model.learning_rate") != std::string::npos);
  const auto unknown = write_file(dir / "unknown.ini", "[evaluation]\nretries = 3\n");
  r = run({"experiment", "--kind", "method_comparison", "--config", unknown});
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find("evaluation.retries") != std::string::npos);
  CHECK(run({"experiment", "--kind", "nope"}).code == kExitFailure);
}

TEST_CASE("dispatch: experiment, plot and determinism") {
  const auto dir = scratch_dir("cli_run");
  const auto cfg = write_file(dir / "run.ini", kSmallRun);
  const std::string out_a = (dir / "a").string(), out_b = (dir / "b").string();
  REQUIRE(run({"experiment", "--kind", "method_comparison", "--config", cfg, "--out", out_a}).code == 0);
  REQUIRE(run({"experiment", "--kind", "method_comparison", "--config", cfg, "--out", out_b, "--workers", "3"}).code ==
          0);
  const auto a = read_text_file(out_a + "/method_comparison.jsonl");
  const auto b = read_text_file(out_b + "/method_comparison.jsonl");
  // Reports differ only in the echoed output directory and worker count.
  CHECK(parse_report_jsonl(a).summaries.size() == 3);
  CHECK(report_to_csv(parse_report_jsonl(a)) == report_to_csv(parse_report_jsonl(b)));

  const std::string plots = (dir / "plots").string();
  REQUIRE(run({"plot", out_a + "/method_comparison.jsonl", "--out", plots}).code == 0);
  const auto svg1 = read_text_file(plots + "/method_comparison.svg");
  REQUIRE(run({"plot", out_a + "/method_comparison.jsonl", "--out", plots}).code == 0);
  CHECK(read_text_file(plots + "/method_comparison.svg") == svg1);

  const auto broken = write_file(dir / "broken.jsonl", "{\"record\":\"header\"\n");
  CHECK(run({"plot", broken, "--out", plots}).code == kExitFailure);
  const auto empty = write_file(dir / "empty.jsonl", "");
  CHECK(run({"plot", empty, "--out", plots}).code == kExitFailure);
}

TEST_CASE("dispatch: synth, train, generate and evaluate chain") {
  const auto dir = scratch_dir("cli_chain");
  const auto cfg = write_file(dir / "run.ini", kSmallRun);
  const std::string out = (dir / "out").string();
  REQUIRE(run({"synth", "--config", cfg, "--out", out}).code == 0);
  const auto schema = load_schema(out + "/synthetic_schema.ini");
  const auto data = load_csv(out + "/synthetic.csv", schema, "label");
  CHECK(data.n() == 300);
  CHECK(schema.discriminative_indices() == std::vector<Index>{0, 1, 2});

  REQUIRE(run({"train", "--config", cfg, "--out", out}).code == 0);
  REQUIRE(run({"generate", "--config", cfg, "--out", out, "--model", out + "/model.txt"}).code == 0);
  const auto records = parse_recourse_jsonl(read_text_file(out + "/recourse.jsonl"));
  CHECK(!records.empty());
  REQUIRE(run({"evaluate", "--config", cfg, "--out", out, "--model", out + "/model.txt", "--recourse",
               out + "/recourse.jsonl"})
              .code == 0);
  const auto report = read_report(out + "/evaluate.jsonl");
  CHECK(report.summaries.size() == 3);

  // Evaluating the generated file reproduces the experiment runner's numbers.
  REQUIRE(run({"experiment", "--kind", "method_comparison", "--config", cfg, "--out", out}).code == 0);
  const auto experiment = read_report(out + "/method_comparison.jsonl");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(report.summaries[i].share == experiment.summaries[i].share);
    CHECK(report.summaries[i].mean_l1 == experiment.summaries[i].mean_l1);
  }
}

TEST_CASE("dispatch: verify-theorem and the NONADV_SEED fallback") {
  const auto dir = scratch_dir("cli_theorem");
  const std::string out = (dir / "t").string();
  REQUIRE(run({"verify-theorem", "--p", "2", "--trials", "100", "--random-weightings", "5", "--out", out}).code == 0);
  const auto report = read_report(out + "/theorem.jsonl");
  REQUIRE(report.theorem);
  CHECK(report.theorem->trials == 100);
  CHECK(report.theorem->expected_nadv_random.size() == 5);

  ::setenv("NONADV_SEED", "77", 1);
  REQUIRE(run({"verify-theorem", "--trials", "100", "--random-weightings", "0", "--out", out}).code == 0);
  CHECK(read_report(out + "/theorem.jsonl").seed == 77);
  REQUIRE(run({"verify-theorem", "--trials", "100", "--random-weightings", "0", "--seed", "3", "--out", out}).code ==
          0);
  CHECK(read_report(out + "/theorem.jsonl").seed == 3);
  ::setenv("NONADV_SEED", "x", 1);
  CHECK(run({"verify-theorem", "--trials", "100", "--out", out}).code == kExitFailure);
  ::unsetenv("NONADV_SEED");
  CHECK(run({"verify-theorem", "--p", "7", "--out", out}).code == kExitFailure);
}
