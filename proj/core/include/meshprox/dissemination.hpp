#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meshprox/coords.hpp"
#include "meshprox/ids.hpp"
#include "meshprox/proxy_load.hpp"

namespace meshprox::dissemination {

// Accounting model for message sizes: a fixed frame header plus a fixed-size
// entry per carried record (coordinate or load report).
struct WireModel {
  int entry_bytes = 160;
  int header_bytes = 10;
};

// Everything one node hands a peer in a round: its own coordinate entry
// (with the latest proxy RTT riding along), relayed load reports, and the
// coordinate digest for its neighbors.
struct GossipPayload {
  NodeId sender;
  coords::NetworkCoordinate sender_coord;
  std::optional<coords::ProxyRttReport> proxy_rtt;
  std::vector<proxy_load::ProxyEstimate> load_reports;
  std::vector<std::pair<NodeId, coords::NetworkCoordinate>> neighbor_digest;

  std::size_t serialized_size(const WireModel& wire = {}) const;
};

using ReportTable = std::map<ProxyId, proxy_load::ProxyEstimate>;

// True when `a` should replace `b` in a report table: strictly newer origin
// round, or same round from a lower origin id.
bool report_dominates(const proxy_load::ProxyEstimate& a,
                      const proxy_load::ProxyEstimate& b);

ReportTable merge_reports(ReportTable local,
                          std::span<const proxy_load::ProxyEstimate> incoming);

// Keep at most `limit` reports, preferring fresh ones (newer origin round,
// then lower origin id, then proxy id).
std::vector<proxy_load::ProxyEstimate> select_reports(const ReportTable& table,
                                                      std::size_t limit);

// Seconds before a client re-probes a proxy whose estimate went stale.
// Scales with the predicted distance and with how many peers sit closer, so
// far-away clients defer to better-placed ones. Floored at the base term.
double personalized_timeout(double proxy_distance_ms, int peers_closer,
                            double m1_s_per_ms, double m2_s, double base_s);

// Rounds for a rumor to reach n nodes under idealized push-pull exchange.
int spread_rounds(int n);

// Push-pull rumor spread on a complete graph: per round every node exchanges
// with one uniformly chosen peer, informed nodes push, uninformed ones pull.
// Returns the number of rounds until all n nodes are informed.
int simulate_push_pull_spread(int n, std::mt19937_64& rng);

struct RecoveryTimer {
  ProxyId proxy;
  double timeout_s = 0.0;
  double armed_at_s = 0.0;
};

// Per-client re-probe schedule for proxies with stale estimates, plus the
// unavailability window imposed after a failed probe.
class RecoveryManager {
 public:
  // Start (or keep) a timer; re-arming an armed proxy is a no-op so the
  // original deadline stands.
  void arm(const ProxyId& proxy, double now_s, double timeout_s);
  void disarm(const ProxyId& proxy);
  bool armed(const ProxyId& proxy) const;
  std::optional<RecoveryTimer> timer(const ProxyId& proxy) const;

  // Proxies whose timer expired and which are not inside an unavailability
  // window; these should be probed now.
  std::vector<ProxyId> due(double now_s) const;

  // Probe sent: restart the timer for a full period from now.
  void mark_probe_issued(const ProxyId& proxy, double now_s, double timeout_s);

  void mark_unavailable(const ProxyId& proxy, double until_s);
  bool unavailable(const ProxyId& proxy, double now_s) const;

 private:
  std::map<ProxyId, RecoveryTimer> timers_;
  std::map<ProxyId, double> unavailable_until_;
};

}  // namespace meshprox::dissemination
