#include "meshprox/dissemination.hpp"

#include <algorithm>
#include <cmath>

#include "meshprox/rng.hpp"

namespace meshprox::dissemination {

std::size_t GossipPayload::serialized_size(const WireModel& wire) const {
  // The sender's coordinate and its piggybacked proxy RTT share one entry.
  const std::size_t entries =
      1 + load_reports.size() + neighbor_digest.size();
  return static_cast<std::size_t>(wire.header_bytes) +
         entries * static_cast<std::size_t>(wire.entry_bytes);
}

bool report_dominates(const proxy_load::ProxyEstimate& a,
                      const proxy_load::ProxyEstimate& b) {
  if (a.round != b.round) return a.round > b.round;
  return a.origin < b.origin;
}

ReportTable merge_reports(ReportTable local,
                          std::span<const proxy_load::ProxyEstimate> incoming) {
  for (const auto& report : incoming) {
    auto it = local.find(report.proxy);
    if (it == local.end()) {
      local.emplace(report.proxy, report);
    } else if (report_dominates(report, it->second)) {
      it->second = report;
    }
  }
  return local;
}

std::vector<proxy_load::ProxyEstimate> select_reports(const ReportTable& table,
                                                      std::size_t limit) {
  std::vector<proxy_load::ProxyEstimate> out;
  out.reserve(table.size());
  for (const auto& [id, est] : table) out.push_back(est);
  std::sort(out.begin(), out.end(),
            [](const proxy_load::ProxyEstimate& a,
               const proxy_load::ProxyEstimate& b) {
              if (a.round != b.round) return a.round > b.round;
              if (a.origin != b.origin) return a.origin < b.origin;
              return a.proxy < b.proxy;
            });
  if (out.size() > limit) out.resize(limit);
  return out;
}

double personalized_timeout(double proxy_distance_ms, int peers_closer,
                            double m1_s_per_ms, double m2_s, double base_s) {
  const double t = m1_s_per_ms * proxy_distance_ms +
                   m2_s * static_cast<double>(peers_closer) + base_s;
  return std::max(t, base_s);
}

int spread_rounds(int n) {
  if (n <= 1) return 0;
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));
}

int simulate_push_pull_spread(int n, std::mt19937_64& rng) {
  if (n <= 1) return 0;
  std::vector<char> informed(static_cast<std::size_t>(n), 0);
  informed[0] = 1;
  int count = 1;
  int rounds = 0;
  while (count < n) {
    ++rounds;
    std::vector<char> next = informed;
    for (int i = 0; i < n; ++i) {
      std::size_t pick = uniform_index(rng, static_cast<std::size_t>(n - 1));
      const int partner =
          static_cast<int>(pick) >= i ? static_cast<int>(pick) + 1
                                      : static_cast<int>(pick);
      if (informed[static_cast<std::size_t>(i)] ||
          informed[static_cast<std::size_t>(partner)]) {
        next[static_cast<std::size_t>(i)] = 1;
        next[static_cast<std::size_t>(partner)] = 1;
      }
    }
    informed = std::move(next);
    count = static_cast<int>(std::count(informed.begin(), informed.end(), 1));
  }
  return rounds;
}

void RecoveryManager::arm(const ProxyId& proxy, double now_s,
                          double timeout_s) {
  timers_.try_emplace(proxy, RecoveryTimer{proxy, timeout_s, now_s});
}

void RecoveryManager::disarm(const ProxyId& proxy) {
  timers_.erase(proxy);
}

bool RecoveryManager::armed(const ProxyId& proxy) const {
  return timers_.count(proxy) > 0;
}

std::optional<RecoveryTimer> RecoveryManager::timer(
    const ProxyId& proxy) const {
  auto it = timers_.find(proxy);
  if (it == timers_.end()) return std::nullopt;
  return it->second;
}

std::vector<ProxyId> RecoveryManager::due(double now_s) const {
  std::vector<ProxyId> out;
  for (const auto& [proxy, t] : timers_) {
    if (now_s - t.armed_at_s >= t.timeout_s && !unavailable(proxy, now_s)) {
      out.push_back(proxy);
    }
  }
  return out;
}

void RecoveryManager::mark_probe_issued(const ProxyId& proxy, double now_s,
                                        double timeout_s) {
  timers_[proxy] = RecoveryTimer{proxy, timeout_s, now_s};
}

void RecoveryManager::mark_unavailable(const ProxyId& proxy, double until_s) {
  double& current = unavailable_until_[proxy];
  current = std::max(current, until_s);
}

bool RecoveryManager::unavailable(const ProxyId& proxy, double now_s) const {
  auto it = unavailable_until_.find(proxy);
  return it != unavailable_until_.end() && now_s < it->second;
}

}  // namespace meshprox::dissemination
