#pragma once

#include <span>
#include <vector>

#include "meshprox/scenario.hpp"
#include "meshprox/simnet.hpp"

namespace meshprox::overhead {

// Inputs to the closed-form traffic model. Defaults describe the reference
// deployment (8 pings against each of two targets per 10 s round, full
// neighbor and proxy tables).
struct OverheadParams {
  int nodes = 1;
  // Coordinate entries per gossip message: the sender plus its digest.
  int coord_entries = 8;
  // Load report entries per gossip message.
  int report_entries = 8;
  double round_period_s = 10.0;
  // Echo round trips per round across both ping targets.
  int round_pings = 16;
  // Fractional, because the reference deployment's ping size is back-solved
  // from its published per-node rate rather than taken from a packet spec.
  double ping_bytes = 112.0;
  int entry_bytes = 160;
  int header_bytes = 10;
};

// Bytes per second of gossip payload per node.
double data_rate_bps(const OverheadParams& p);

// Bytes per second across all nodes: ping traffic plus gossip payloads.
double total_rate_bps(const OverheadParams& p);

// Per-node total, i.e. total_rate_bps / nodes.
double per_node_rate_bps(const OverheadParams& p);

// Bytes per second a client spends keeping estimates fresh by probing
// `proxies` proxies every `timeout_s` seconds.
double probe_rate_bps(int proxies, int payload_bytes, double timeout_s);

// Model parameters matching what the simulator actually emits for this
// scenario, for apples-to-apples comparison with measured traffic.
OverheadParams params_from_scenario(const simnet::Scenario& scenario);

// Mean protocol bytes per second per client over recorded rounds.
double measured_rate_bps_per_client(std::span<const simnet::RoundMetrics> rounds,
                                    double round_period_s, int clients);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

}  // namespace meshprox::overhead
