#include "meshprox/overhead.hpp"

#include <algorithm>
#include <cmath>

namespace meshprox::overhead {

double data_rate_bps(const OverheadParams& p) {
  const double payload = static_cast<double>(p.report_entries) * p.entry_bytes +
                         static_cast<double>(p.coord_entries) * p.entry_bytes +
                         p.header_bytes;
  return payload / p.round_period_s;
}

double total_rate_bps(const OverheadParams& p) {
  const double ping = 2.0 * p.ping_bytes * p.round_pings / p.round_period_s;
  return (ping + data_rate_bps(p)) * static_cast<double>(p.nodes);
}

double per_node_rate_bps(const OverheadParams& p) {
  if (p.nodes <= 0) return 0.0;
  return total_rate_bps(p) / static_cast<double>(p.nodes);
}

double probe_rate_bps(int proxies, int payload_bytes, double timeout_s) {
  if (timeout_s <= 0.0) return 0.0;
  return static_cast<double>(proxies) * payload_bytes / timeout_s;
}

OverheadParams params_from_scenario(const simnet::Scenario& scenario) {
  OverheadParams p;
  const auto& v = scenario.params.vivaldi;
  const int capacity = v.proxy_capacity();
  const int clients = static_cast<int>(scenario.topology.clients.size());
  const int proxies = static_cast<int>(scenario.topology.proxies.size());
  p.nodes = clients;
  p.coord_entries = 1 + std::min(capacity, std::max(clients - 1, 0));
  p.report_entries = std::min(capacity, proxies);
  p.round_period_s = scenario.params.round_period_s;
  // Each round a client runs one ping exchange against a neighbor and one
  // against a proxy.
  p.round_pings = 2 * v.pings_per_round;
  p.ping_bytes = static_cast<double>(scenario.params.ping_bytes);
  return p;
}

double measured_rate_bps_per_client(std::span<const simnet::RoundMetrics> rounds,
                                    double round_period_s, int clients) {
  if (rounds.empty() || round_period_s <= 0.0 || clients <= 0) return 0.0;
  double total = 0.0;
  for (const auto& r : rounds) {
    total += static_cast<double>(r.overhead_bytes);
  }
  const double seconds = static_cast<double>(rounds.size()) * round_period_s;
  return total / seconds / static_cast<double>(clients);
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
  LinearFit fit;
  const std::size_t n = std::min(xs.size(), ys.size());
  if (n < 2) return fit;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    const double ss_res = syy - fit.slope * sxy;
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

}  // namespace meshprox::overhead
