#pragma once

#include <string>
#include <vector>

#include "nadv/experiment.hpp"

namespace nadv {

inline constexpr int kReportVersion = 1;

// Newline-delimited JSON records in a fixed field order:
//   header  {record, format, version, kind, seed, config{...}}
//   arm     {record, arm, test_accuracy, oracle_agreement, train_rows, factuals}
//   summary {record, arm, method, cost, r_max, mean_retries, validity_rate,
//            model_flip_rate, mean_l1, mean_l2, outputs, converged, failures,
//            degenerate, errors, oracle_queries}
//   share   {record, arm, method, cost, r, share}
//   theorem {record, p, trials, seed, expected_nadv_optimal,
//            expected_nadv_identity, random_p95, disc_share_optimal,
//            disc_share_identity, mean_coefficient_snr, expected_nadv_random[]}
// NaN means (nothing converged) are written as null.
std::string report_to_jsonl(const ExperimentReport& report);
// Flat table with a version line; one row per (arm, method, cost, r), or one
// row per weighting for theorem reports.
std::string report_to_csv(const ExperimentReport& report);

// Throws ParseError on malformed input and Error on an empty report.
ExperimentReport parse_report_jsonl(const std::string& text);
ExperimentReport read_report(const std::string& path);

// Writes <dir>/<kind>.jsonl and <dir>/<kind>.csv; returns both paths.
std::vector<std::string> write_report(const ExperimentReport& report, const std::string& dir);

struct RecourseRecord {
  std::string method;
  std::string cost;
  Index row = 0;
  Vector x;
  RecourseOutput output;
};

std::string recourse_to_jsonl(const std::vector<RecourseRecord>& records,
                              const std::vector<std::pair<std::string, std::string>>& config, std::uint64_t seed);
std::vector<RecourseRecord> parse_recourse_jsonl(const std::string& text);

std::string read_text_file(const std::string& path);
// Creates parent directories as needed.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nadv
