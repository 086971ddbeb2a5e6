#include "nadv/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace nadv {

namespace {

using json = nlohmann::ordered_json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double as_double(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector json_vector(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j.at(i).get<double>();
  return v;
}

json config_json(const std::vector<std::pair<std::string, std::string>>& config) {
  json out = json::object();
  for (const auto& [k, v] : config) out[k] = v;
  return out;
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void check_header(const json& j, const std::string& format) {
  if (j.value("record", "") != "header" || j.value("format", "") != format)
    throw ParseError("first record must be a " + format + " header", 1, 0);
  if (j.value("version", 0) != kReportVersion)
    throw ParseError("unsupported " + format + " version " + std::to_string(j.value("version", 0)), 1, 0);
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_no, 0);
    }
    if (!out.back().is_object()) throw ParseError("record is not an object", line_no, 0);
  }
  return out;
}

}  // namespace

std::string report_to_jsonl(const ExperimentReport& report) {
  std::string out;
  auto emit = [&out](const json& j) { out += j.dump() + "\n"; };
  json header;
  header["record"] = "header";
  header["format"] = "nadv-report";
  header["version"] = kReportVersion;
  header["kind"] = report.kind;
  header["seed"] = report.seed;
  header["config"] = config_json(report.config);
  emit(header);
  for (const auto& a : report.arms) {
    json j;
    j["record"] = "arm";
    j["arm"] = a.arm;
    j["test_accuracy"] = number(a.test_accuracy);
    j["oracle_agreement"] = number(a.oracle_agreement);
    j["train_rows"] = a.train_rows;
    j["factuals"] = a.factuals;
    emit(j);
  }
  for (const auto& s : report.summaries) {
    json j;
    j["record"] = "summary";
    j["arm"] = s.arm;
    j["method"] = s.method;
    j["cost"] = s.cost;
    j["r_max"] = s.r_max;
    j["mean_retries"] = number(s.mean_retries);
    j["validity_rate"] = number(s.validity_rate);
    j["model_flip_rate"] = number(s.model_flip_rate);
    j["mean_l1"] = number(s.mean_l1);
    j["mean_l2"] = number(s.mean_l2);
    j["outputs"] = s.outputs;
    j["converged"] = s.converged;
    j["failures"] = s.failures;
    j["degenerate"] = s.degenerate;
    j["errors"] = s.errors;
    j["oracle_queries"] = s.oracle_queries;
    emit(j);
    for (std::size_t r = 0; r < s.share.size(); ++r) {
      json sh;
      sh["record"] = "share";
      sh["arm"] = s.arm;
      sh["method"] = s.method;
      sh["cost"] = s.cost;
      sh["r"] = r;
      sh["share"] = number(s.share[r]);
      emit(sh);
    }
  }
  if (report.theorem) {
    const TheoremReport& t = *report.theorem;
    json j;
    j["record"] = "theorem";
    j["p"] = to_string(t.p);
    j["trials"] = t.trials;
    j["seed"] = t.seed;
    j["expected_nadv_optimal"] = number(t.expected_nadv_optimal);
    j["expected_nadv_identity"] = number(t.expected_nadv_identity);
    j["random_p95"] = number(t.random_p95);
    j["disc_share_optimal"] = number(t.disc_share_optimal);
    j["disc_share_identity"] = number(t.disc_share_identity);
    j["mean_coefficient_snr"] = number(t.mean_coefficient_snr);
    json random = json::array();
    for (double v : t.expected_nadv_random) random.push_back(number(v));
    j["expected_nadv_random"] = random;
    emit(j);
  }
  return out;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "# nadv-report-csv v" + std::to_string(kReportVersion) + " kind=" + report.kind +
                    " seed=" + std::to_string(report.seed) + "\n";
  if (report.theorem) {
    const TheoremReport& t = *report.theorem;
    out += "weighting,expected_nadv\n";
    out += "optimal," + csv_double(t.expected_nadv_optimal) + "\n";
    out += "identity," + csv_double(t.expected_nadv_identity) + "\n";
    for (std::size_t i = 0; i < t.expected_nadv_random.size(); ++i)
      out += "random_" + std::to_string(i) + "," + csv_double(t.expected_nadv_random[i]) + "\n";
    return out;
  }
  out +=
      "arm,method,cost,r,share,mean_retries,validity_rate,model_flip_rate,mean_l1,mean_l2,outputs,converged,"
      "failures,degenerate,errors,oracle_queries\n";
  for (const auto& s : report.summaries)
    for (std::size_t r = 0; r < s.share.size(); ++r)
      out += csv_field(s.arm) + "," + csv_field(s.method) + "," + csv_field(s.cost) + "," + std::to_string(r) + "," +
             csv_double(s.share[r]) + "," + csv_double(s.mean_retries) + "," + csv_double(s.validity_rate) + "," +
             csv_double(s.model_flip_rate) + "," + csv_double(s.mean_l1) + "," + csv_double(s.mean_l2) + "," +
             std::to_string(s.outputs) + "," + std::to_string(s.converged) + "," + std::to_string(s.failures) + "," +
             std::to_string(s.degenerate) + "," + std::to_string(s.errors) + "," +
             std::to_string(s.oracle_queries) + "\n";
  return out;
}

ExperimentReport parse_report_jsonl(const std::string& text) {
  const auto records = parse_lines(text);
  if (records.empty()) throw Error("report is empty");
  check_header(records.front(), "nadv-report");
  ExperimentReport report;
  try {
    report.kind = records.front().at("kind").get<std::string>();
    report.seed = records.front().at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : records.front().at("config").items()) report.config.emplace_back(k, v.get<std::string>());
    for (std::size_t i = 1; i < records.size(); ++i) {
      const json& j = records[i];
      const std::string type = j.at("record").get<std::string>();
      if (type == "arm") {
        ArmSummary a;
        a.arm = j.at("arm").get<std::string>();
        a.test_accuracy = as_double(j.at("test_accuracy"));
        a.oracle_agreement = as_double(j.at("oracle_agreement"));
        a.train_rows = j.at("train_rows").get<Index>();
        a.factuals = j.at("factuals").get<Index>();
        report.arms.push_back(a);
      } else if (type == "summary") {
        MethodSummary s;
        s.arm = j.at("arm").get<std::string>();
        s.method = j.at("method").get<std::string>();
        s.cost = j.at("cost").get<std::string>();
        s.r_max = j.at("r_max").get<int>();
        if (s.r_max < 0) throw ParseError("negative r_max", i + 1, 0);
        s.mean_retries = as_double(j.at("mean_retries"));
        s.validity_rate = as_double(j.at("validity_rate"));
        s.model_flip_rate = as_double(j.at("model_flip_rate"));
        s.mean_l1 = as_double(j.at("mean_l1"));
        s.mean_l2 = as_double(j.at("mean_l2"));
        s.outputs = j.at("outputs").get<int>();
        s.converged = j.at("converged").get<int>();
        s.failures = j.at("failures").get<int>();
        s.degenerate = j.at("degenerate").get<int>();
        s.errors = j.at("errors").get<int>();
        s.oracle_queries = j.at("oracle_queries").get<long long>();
        report.summaries.push_back(s);
      } else if (type == "share") {
        if (report.summaries.empty()) throw ParseError("share record before any summary", i + 1, 0);
        MethodSummary& s = report.summaries.back();
        if (j.at("arm") != s.arm || j.at("method") != s.method || j.at("cost") != s.cost)
          throw ParseError("share record does not follow its summary", i + 1, 0);
        if (j.at("r").get<std::size_t>() != s.share.size()) throw ParseError("share records out of order", i + 1, 0);
        s.share.push_back(as_double(j.at("share")));
      } else if (type == "theorem") {
        TheoremReport t;
        t.p = parse_norm(j.at("p").get<std::string>());
        t.trials = j.at("trials").get<int>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.expected_nadv_optimal = as_double(j.at("expected_nadv_optimal"));
        t.expected_nadv_identity = as_double(j.at("expected_nadv_identity"));
        t.random_p95 = as_double(j.at("random_p95"));
        t.disc_share_optimal = as_double(j.at("disc_share_optimal"));
        t.disc_share_identity = as_double(j.at("disc_share_identity"));
        t.mean_coefficient_snr = as_double(j.at("mean_coefficient_snr"));
        for (const auto& v : j.at("expected_nadv_random")) t.expected_nadv_random.push_back(as_double(v));
        report.theorem = t;
      } else {
        throw ParseError("unknown record type '" + type + "'", i + 1, 0);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0, 0);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0, 0);
  }
  for (const auto& s : report.summaries)
    if (s.share.size() != static_cast<std::size_t>(s.r_max) + 1)
      throw ParseError("summary " + s.method + " has " + std::to_string(s.share.size()) + " share records, expected " +
                           std::to_string(s.r_max + 1),
                       0, 0);
  if (report.summaries.empty() && !report.theorem) throw Error("report contains no results");
  return report;
}

ExperimentReport read_report(const std::string& path) { return parse_report_jsonl(read_text_file(path)); }

std::vector<std::string> write_report(const ExperimentReport& report, const std::string& dir) {
  const std::string base = (std::filesystem::path(dir) / report.kind).string();
  write_text_file(base + ".jsonl", report_to_jsonl(report));
  write_text_file(base + ".csv", report_to_csv(report));
  return {base + ".jsonl", base + ".csv"};
}

std::string recourse_to_jsonl(const std::vector<RecourseRecord>& records,
                              const std::vector<std::pair<std::string, std::string>>& config, std::uint64_t seed) {
  json header;
  header["record"] = "header";
  header["format"] = "nadv-recourse";
  header["version"] = kReportVersion;
  header["seed"] = seed;
  header["config"] = config_json(config);
  std::string out = header.dump() + "\n";
  for (const auto& r : records) {
    json j;
    j["record"] = "recourse";
    j["method"] = r.method;
    j["cost"] = r.cost;
    j["row"] = r.row;
    j["converged"] = r.output.converged;
    j["iterations"] = r.output.iterations_used;
    j["cost_value"] = number(r.output.cost_value);
    j["x"] = vector_json(r.x);
    j["delta"] = vector_json(r.output.delta);
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<RecourseRecord> parse_recourse_jsonl(const std::string& text) {
  const auto records = parse_lines(text);
  if (records.empty()) throw Error("recourse file is empty");
  check_header(records.front(), "nadv-recourse");
  std::vector<RecourseRecord> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const json& j = records[i];
    try {
      if (j.at("record") != "recourse") throw ParseError("expected a recourse record", i + 1, 0);
      RecourseRecord r;
      r.method = j.at("method").get<std::string>();
      r.cost = j.at("cost").get<std::string>();
      r.row = j.at("row").get<Index>();
      r.x = json_vector(j.at("x"));
      r.output.delta = json_vector(j.at("delta"));
      if (r.x.size() != r.output.delta.size()) throw ParseError("x and delta differ in length", i + 1, 0);
      r.output.x_prime = r.x + r.output.delta;
      r.output.converged = j.at("converged").get<bool>();
      r.output.iterations_used = j.at("iterations").get<int>();
      r.output.cost_value = as_double(j.at("cost_value"));
      r.output.method = parse_method(r.method);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed recourse record: ") + e.what(), i + 1, 0);
    }
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace nadv
