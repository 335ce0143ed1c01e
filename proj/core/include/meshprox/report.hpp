#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meshprox/scenario.hpp"
#include "meshprox/simnet.hpp"

namespace meshprox::report {

struct RunReport {
  std::string scenario_name;
  std::string scenario_hash;
  std::string strategy;
  std::uint64_t seed = 0;
  std::int64_t rounds = 0;
  std::int64_t downloads_ok = 0;
  std::int64_t downloads_aborted = 0;
  std::int64_t switches = 0;
  double avg_download_s = 0.0;
  double median_download_s = 0.0;
  double max_download_s = 0.0;
  double final_system_error_ms = 0.0;
  double median_system_error_ms = 0.0;
  double measured_overhead_bps_per_client = 0.0;
  double model_overhead_bps_per_client = 0.0;
};

// Simulate and summarize. With write_files set, emits metrics.csv,
// metrics.ndjson, download_ecdf.csv, report.json and summary.txt into
// out_dir (created if missing). keep_rounds, when non-null, receives the
// full round stream.
RunReport run_scenario(const simnet::Scenario& scenario, std::uint64_t seed,
                       const std::filesystem::path& out_dir, bool write_files,
                       std::vector<simnet::RoundMetrics>* keep_rounds = nullptr);

std::string format_summary(const RunReport& report);

void save_report(const RunReport& report, const std::filesystem::path& path);
RunReport load_report(const std::filesystem::path& path);

class CompareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Side-by-side table of runs over the same scenario hash; throws
// CompareError when hashes disagree.
std::string compare_reports(const std::vector<RunReport>& reports);

}  // namespace meshprox::report
