#include "meshprox/proxy_load.hpp"

#include <algorithm>

namespace meshprox::proxy_load {

double raw_proxy_latency(const TtfbSample& sample, std::int64_t* clamp_count) {
  const double raw = sample.ttfb_ms - 2.0 * sample.mesh_rtt_ms;
  if (raw < 0.0) {
    if (clamp_count != nullptr) ++*clamp_count;
    return 0.0;
  }
  return raw;
}

ProxyEstimate ema_update(ProxyEstimate est, double raw_ms, double alpha,
                         std::int64_t round) {
  est.raw_ms = raw_ms;
  est.ema_ms = est.seeded ? alpha * raw_ms + (1.0 - alpha) * est.ema_ms
                          : raw_ms;
  est.ema_pending_ms = est.ema_ms;
  est.last_ttfb_ms = raw_ms;
  est.seeded = true;
  est.pending_active = false;
  est.round = round;
  return est;
}

ProxyEstimate penalty_tick(ProxyEstimate est, double waiting_ms, double alpha,
                           std::int64_t round) {
  if (!est.pending_active) {
    est.ema_pending_ms = est.ema_ms;
    est.pending_active = true;
  }
  // The first byte cannot arrive sooner than the wait already endured, so
  // the endured wait ratchets the reference worst case; the pending chain
  // always blends toward that reference.
  if (waiting_ms >= est.last_ttfb_ms) est.last_ttfb_ms = waiting_ms;
  est.ema_pending_ms =
      alpha * est.last_ttfb_ms + (1.0 - alpha) * est.ema_pending_ms;
  est.round = round;
  return est;
}

double published_estimate(const ProxyEstimate& est) {
  return est.pending_active ? est.ema_pending_ms : est.ema_ms;
}

void LoadTracker::on_sample(const TtfbSample& sample, double alpha) {
  const double raw = raw_proxy_latency(sample, &clamps_);
  ProxyEstimate& est = table_[sample.proxy];
  est.proxy = sample.proxy;
  est.origin = owner_;
  est = ema_update(est, raw, alpha, sample.round);
}

void LoadTracker::on_waiting(const ProxyId& proxy, double waiting_ms,
                             double alpha, std::int64_t round) {
  ProxyEstimate& est = table_[proxy];
  est.proxy = proxy;
  est.origin = owner_;
  est = penalty_tick(est, waiting_ms, alpha, round);
}

const ProxyEstimate* LoadTracker::find(const ProxyId& proxy) const {
  auto it = table_.find(proxy);
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<ProxyEstimate> LoadTracker::snapshot() const {
  std::vector<ProxyEstimate> out;
  out.reserve(table_.size());
  for (const auto& [id, est] : table_) {
    ProxyEstimate copy = est;
    copy.ema_ms = published_estimate(est);
    copy.ema_pending_ms = copy.ema_ms;
    copy.pending_active = false;
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace meshprox::proxy_load
