#include "meshprox/metrics_io.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace meshprox::metrics_io {

namespace {

std::string fmt_ms(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

}  // namespace

CsvWriter::CsvWriter(std::ostream& out, std::vector<NodeId> clients,
                     std::vector<ProxyId> proxies,
                     const std::string& scenario_hash, std::uint64_t seed,
                     const std::string& strategy)
    : out_(out), clients_(std::move(clients)), proxies_(std::move(proxies)) {
  std::sort(clients_.begin(), clients_.end());
  std::sort(proxies_.begin(), proxies_.end());
  out_ << "# scenario_hash=" << scenario_hash << " seed=" << seed
       << " strategy=" << strategy << "\n";
  out_ << header_line(clients_, proxies_) << "\n";
}

std::string CsvWriter::header_line(const std::vector<NodeId>& clients,
                                   const std::vector<ProxyId>& proxies) {
  std::string line = "round,time_s,system_error_ms,system_error_defined,overhead_bytes";
  for (const NodeId& c : clients) {
    line += ",selected_" + c + ",download_ms_" + c + ",status_" + c;
  }
  for (const ProxyId& p : proxies) {
    line += ",estimate_ms_" + p;
  }
  return line;
}

void CsvWriter::write_row(const simnet::RoundMetrics& row) {
  char head[96];
  std::snprintf(head, sizeof(head), "%lld,%.1f,%.3f,%d,%lld",
                static_cast<long long>(row.round), row.time_s,
                row.system_error_ms, row.system_error_defined ? 1 : 0,
                static_cast<long long>(row.overhead_bytes));
  out_ << head;
  for (const NodeId& c : clients_) {
    auto it = row.clients.find(c);
    if (it == row.clients.end()) {
      out_ << ",,-1.000,no_proxy";
      continue;
    }
    const simnet::ClientRound& cr = it->second;
    out_ << ',' << (cr.selected ? *cr.selected : std::string{}) << ','
         << fmt_ms(cr.download_ms) << ',' << simnet::status_name(cr.status);
  }
  for (const ProxyId& p : proxies_) {
    auto it = row.estimate_median_ms.find(p);
    out_ << ',' << fmt_ms(it == row.estimate_median_ms.end() ? -1.0 : it->second);
  }
  out_ << "\n";
}

void NdjsonWriter::write_row(const simnet::RoundMetrics& row) {
  nlohmann::json j;
  j["round"] = row.round;
  j["time_s"] = row.time_s;
  j["system_error_ms"] = row.system_error_ms;
  j["system_error_defined"] = row.system_error_defined;
  j["overhead_bytes"] = row.overhead_bytes;
  nlohmann::json clients;
  for (const auto& [cid, cr] : row.clients) {
    nlohmann::json c;
    if (cr.selected.has_value()) {
      c["selected"] = *cr.selected;
    } else {
      c["selected"] = nullptr;
    }
    c["download_ms"] = cr.download_ms;
    c["status"] = simnet::status_name(cr.status);
    c["published_ms"] = cr.published_ms;
    clients[cid] = std::move(c);
  }
  j["clients"] = std::move(clients);
  j["estimate_median_ms"] = row.estimate_median_ms;
  out_ << j.dump() << "\n";
}

void write_ecdf(std::ostream& out, std::vector<double> samples) {
  out << "value,fraction\n";
  if (samples.empty()) return;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f,%.6f", samples[i],
                  (static_cast<double>(i) + 1.0) / n);
    out << buf << "\n";
  }
}

}  // namespace meshprox::metrics_io
