#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "meshprox/ids.hpp"
#include "meshprox/simnet.hpp"

namespace meshprox::metrics_io {

// Fixed-schema CSV emitter. One comment line of run identity, one header
// line, then one row per round. Columns fan out per client and per proxy in
// sorted id order so runs over the same topology line up column for column.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<NodeId> clients,
            std::vector<ProxyId> proxies, const std::string& scenario_hash,
            std::uint64_t seed, const std::string& strategy);

  void write_row(const simnet::RoundMetrics& row);

  static std::string header_line(const std::vector<NodeId>& clients,
                                 const std::vector<ProxyId>& proxies);

 private:
  std::ostream& out_;
  std::vector<NodeId> clients_;
  std::vector<ProxyId> proxies_;
};

// One JSON object per line carrying the full round record, including the
// per-client published estimates that the CSV leaves out.
class NdjsonWriter {
 public:
  explicit NdjsonWriter(std::ostream& out) : out_(out) {}
  void write_row(const simnet::RoundMetrics& row);

 private:
  std::ostream& out_;
};

// Empirical CDF as "value,fraction" rows over the sorted samples.
void write_ecdf(std::ostream& out, std::vector<double> samples);

}  // namespace meshprox::metrics_io
