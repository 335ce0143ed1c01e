#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "meshprox/ids.hpp"

namespace meshprox::proxy_load {

// One completed first-byte observation: wall-clock time from request send to
// first response byte, plus the coordinate-predicted mesh RTT at send time.
struct TtfbSample {
  ProxyId proxy;
  double ttfb_ms = 0.0;
  double mesh_rtt_ms = 0.0;
  std::int64_t round = 0;
};

// Per-proxy smoothed latency record. `ema_ms` is the confirmed chain built
// from completed samples only. While a request sits unanswered past a
// measurement period, penalty ticks accumulate into `ema_pending_ms`, which
// becomes the published value for the duration of the wait; on completion
// the confirmed chain resumes as if the penalties never happened.
struct ProxyEstimate {
  ProxyId proxy;
  double raw_ms = 0.0;
  double ema_ms = 0.0;
  double ema_pending_ms = 0.0;
  double last_ttfb_ms = 0.0;
  NodeId origin;
  std::int64_t round = -1;
  bool seeded = false;
  bool pending_active = false;
};

// Proxy-side latency inferred from one observation: first-byte time minus
// both mesh round trips, floored at zero. A nonzero floor hit usually means
// the coordinates overestimate the path; callers may count it.
double raw_proxy_latency(const TtfbSample& sample,
                         std::int64_t* clamp_count = nullptr);

// Fold a completed raw observation into the confirmed chain. Also clears any
// pending-penalty state: the published value snaps back to the confirmed
// estimate.
ProxyEstimate ema_update(ProxyEstimate est, double raw_ms, double alpha,
                         std::int64_t round);

// One waiting-time penalty step for a request outstanding past a measurement
// period. The elapsed wait always blends into the pending chain; the
// reference worst-wait only ratchets up once the wait exceeds it.
ProxyEstimate penalty_tick(ProxyEstimate est, double waiting_ms, double alpha,
                           std::int64_t round);

// Value this record currently advertises to peers.
double published_estimate(const ProxyEstimate& est);

// All proxy estimates one client maintains from its own requests.
class LoadTracker {
 public:
  explicit LoadTracker(NodeId owner) : owner_(std::move(owner)) {}

  const NodeId& owner() const { return owner_; }

  void on_sample(const TtfbSample& sample, double alpha);
  void on_waiting(const ProxyId& proxy, double waiting_ms, double alpha,
                  std::int64_t round);

  const ProxyEstimate* find(const ProxyId& proxy) const;

  // Point-in-time copies suitable for gossip: `ema_ms` carries the published
  // value and pending flags are cleared.
  std::vector<ProxyEstimate> snapshot() const;

  std::int64_t clamp_count() const { return clamps_; }

 private:
  NodeId owner_;
  std::map<ProxyId, ProxyEstimate> table_;
  std::int64_t clamps_ = 0;
};

}  // namespace meshprox::proxy_load
