#include "meshprox/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "meshprox/metrics_io.hpp"
#include "meshprox/overhead.hpp"
#include "meshprox/stats.hpp"

namespace meshprox::report {

using nlohmann::json;

RunReport run_scenario(const simnet::Scenario& scenario, std::uint64_t seed,
                       const std::filesystem::path& out_dir, bool write_files,
                       std::vector<simnet::RoundMetrics>* keep_rounds) {
  RunReport rep;
  rep.scenario_name = scenario.name;
  rep.scenario_hash = simnet::scenario_hash_hex(scenario);
  rep.strategy = std::string(selection::strategy_name(scenario.strategy));
  rep.seed = seed;

  std::ofstream csv_out;
  std::ofstream ndjson_out;
  std::optional<metrics_io::CsvWriter> csv;
  std::optional<metrics_io::NdjsonWriter> ndjson;
  if (write_files) {
    std::filesystem::create_directories(out_dir);
    csv_out.open(out_dir / "metrics.csv");
    ndjson_out.open(out_dir / "metrics.ndjson");
    csv.emplace(csv_out, scenario.topology.clients, scenario.topology.proxies,
                rep.scenario_hash, seed, rep.strategy);
    ndjson.emplace(ndjson_out);
  }

  std::vector<double> downloads_ms;
  std::vector<double> system_errors;
  std::int64_t overhead_total = 0;
  std::int64_t rounds_seen = 0;

  simnet::MetricsSink sink = [&](const simnet::RoundMetrics& row) {
    ++rounds_seen;
    overhead_total += row.overhead_bytes;
    if (row.system_error_defined) system_errors.push_back(row.system_error_ms);
    for (const auto& [cid, cr] : row.clients) {
      if (cr.status == simnet::ClientRound::Status::kOk ||
          cr.status == simnet::ClientRound::Status::kAborted) {
        downloads_ms.push_back(cr.download_ms);
      }
      if (cr.status == simnet::ClientRound::Status::kOk) {
        ++rep.downloads_ok;
      } else if (cr.status == simnet::ClientRound::Status::kAborted) {
        ++rep.downloads_aborted;
      }
    }
    if (csv) csv->write_row(row);
    if (ndjson) ndjson->write_row(row);
    if (keep_rounds != nullptr) keep_rounds->push_back(row);
  };

  const simnet::SimStats stats = simnet::simulate(scenario, seed, sink);
  rep.rounds = stats.rounds;
  rep.switches = stats.switch_count;

  if (!downloads_ms.empty()) {
    rep.avg_download_s = stats::mean(downloads_ms) / 1000.0;
    rep.median_download_s = stats::median(downloads_ms) / 1000.0;
    rep.max_download_s =
        *std::max_element(downloads_ms.begin(), downloads_ms.end()) / 1000.0;
  }
  if (!system_errors.empty()) {
    rep.final_system_error_ms = system_errors.back();
    rep.median_system_error_ms = stats::median(system_errors);
  }
  const double seconds =
      static_cast<double>(rounds_seen) * scenario.params.round_period_s;
  const auto n_clients = scenario.topology.clients.size();
  if (seconds > 0.0 && n_clients > 0) {
    rep.measured_overhead_bps_per_client =
        static_cast<double>(overhead_total) / seconds /
        static_cast<double>(n_clients);
  }
  rep.model_overhead_bps_per_client = overhead::per_node_rate_bps(
      overhead::params_from_scenario(scenario));

  if (write_files) {
    std::ofstream ecdf_out(out_dir / "download_ecdf.csv");
    metrics_io::write_ecdf(ecdf_out, downloads_ms);
    save_report(rep, out_dir / "report.json");
    std::ofstream summary_out(out_dir / "summary.txt");
    summary_out << format_summary(rep);
  }
  return rep;
}

std::string format_summary(const RunReport& r) {
  std::ostringstream out;
  out << "scenario: " << r.scenario_name << " (hash " << r.scenario_hash
      << ")\n";
  out << "strategy: " << r.strategy << "  seed: " << r.seed << "  rounds: "
      << r.rounds << "\n";
  char line[160];
  std::snprintf(line, sizeof(line),
                "downloads: %lld ok, %lld aborted, %lld switches\n",
                static_cast<long long>(r.downloads_ok),
                static_cast<long long>(r.downloads_aborted),
                static_cast<long long>(r.switches));
  out << line;
  std::snprintf(line, sizeof(line),
                "download latency: avg %.3f s, median %.3f s, max %.3f s\n",
                r.avg_download_s, r.median_download_s, r.max_download_s);
  out << line;
  std::snprintf(line, sizeof(line),
                "coordinate error: median %.3f ms, final %.3f ms\n",
                r.median_system_error_ms, r.final_system_error_ms);
  out << line;
  std::snprintf(line, sizeof(line),
                "overhead per client: measured %.1f B/s, model %.1f B/s\n",
                r.measured_overhead_bps_per_client,
                r.model_overhead_bps_per_client);
  out << line;
  return out.str();
}

void save_report(const RunReport& r, const std::filesystem::path& path) {
  json j;
  j["scenario_name"] = r.scenario_name;
  j["scenario_hash"] = r.scenario_hash;
  j["strategy"] = r.strategy;
  j["seed"] = r.seed;
  j["rounds"] = r.rounds;
  j["downloads_ok"] = r.downloads_ok;
  j["downloads_aborted"] = r.downloads_aborted;
  j["switches"] = r.switches;
  j["avg_download_s"] = r.avg_download_s;
  j["median_download_s"] = r.median_download_s;
  j["max_download_s"] = r.max_download_s;
  j["final_system_error_ms"] = r.final_system_error_ms;
  j["median_system_error_ms"] = r.median_system_error_ms;
  j["measured_overhead_bps_per_client"] = r.measured_overhead_bps_per_client;
  j["model_overhead_bps_per_client"] = r.model_overhead_bps_per_client;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CompareError(path.string() + ": cannot open report");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw CompareError(path.string() + ": " + e.what());
  }
  RunReport r;
  r.scenario_name = j.value("scenario_name", std::string{});
  r.scenario_hash = j.value("scenario_hash", std::string{});
  r.strategy = j.value("strategy", std::string{});
  r.seed = j.value("seed", std::uint64_t{0});
  r.rounds = j.value("rounds", std::int64_t{0});
  r.downloads_ok = j.value("downloads_ok", std::int64_t{0});
  r.downloads_aborted = j.value("downloads_aborted", std::int64_t{0});
  r.switches = j.value("switches", std::int64_t{0});
  r.avg_download_s = j.value("avg_download_s", 0.0);
  r.median_download_s = j.value("median_download_s", 0.0);
  r.max_download_s = j.value("max_download_s", 0.0);
  r.final_system_error_ms = j.value("final_system_error_ms", 0.0);
  r.median_system_error_ms = j.value("median_system_error_ms", 0.0);
  r.measured_overhead_bps_per_client =
      j.value("measured_overhead_bps_per_client", 0.0);
  r.model_overhead_bps_per_client =
      j.value("model_overhead_bps_per_client", 0.0);
  return r;
}

std::string compare_reports(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw CompareError("no reports to compare");
  const std::string& hash = reports.front().scenario_hash;
  for (const RunReport& r : reports) {
    if (r.scenario_hash != hash) {
      throw CompareError("scenario hash mismatch: " + hash + " vs " +
                         r.scenario_hash + " (" + r.strategy + ")");
    }
  }
  std::ostringstream out;
  out << "scenario " << reports.front().scenario_name << " (hash " << hash
      << ")\n";
  char line[200];
  std::snprintf(line, sizeof(line), "%-10s %8s %10s %10s %10s %9s %9s\n",
                "strategy", "seed", "avg_s", "median_s", "max_s", "aborted",
                "switches");
  out << line;
  const RunReport* best = nullptr;
  for (const RunReport& r : reports) {
    std::snprintf(line, sizeof(line),
                  "%-10s %8llu %10.3f %10.3f %10.3f %9lld %9lld\n",
                  r.strategy.c_str(), static_cast<unsigned long long>(r.seed),
                  r.avg_download_s, r.median_download_s, r.max_download_s,
                  static_cast<long long>(r.downloads_aborted),
                  static_cast<long long>(r.switches));
    out << line;
    if (best == nullptr || r.avg_download_s < best->avg_download_s) {
      best = &r;
    }
  }
  out << "best average latency: " << best->strategy << "\n";
  return out.str();
}

}  // namespace meshprox::report
