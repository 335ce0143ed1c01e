#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "meshprox/ids.hpp"
#include "meshprox/scenario.hpp"

namespace meshprox::simnet {

// What one client did in one round, keyed to the download issued at the
// round boundary (if any).
struct ClientRound {
  enum class Status {
    kOk,          // download issued this round and completed
    kAborted,     // download issued this round, hit the abort cap
    kBusy,        // nothing issued: an earlier download still outstanding
    kNoProxy,     // nothing issued: no selectable proxy
    kUnresolved,  // issued but the run ended first
  };

  std::optional<ProxyId> selected;
  double download_ms = -1.0;
  Status status = Status::kNoProxy;
  // Load estimates this client would advertise, after this round's updates.
  std::map<ProxyId, double> published_ms;
};

std::string status_name(ClientRound::Status status);

struct RoundMetrics {
  std::int64_t round = 0;
  double time_s = 0.0;
  double system_error_ms = 0.0;
  bool system_error_defined = false;
  // Protocol traffic (pings, gossip, probes) across all clients this round.
  std::int64_t overhead_bytes = 0;
  std::map<NodeId, ClientRound> clients;
  // Median across clients of the published estimate per proxy; -1 when no
  // client holds one.
  std::map<ProxyId, double> estimate_median_ms;
};

using MetricsSink = std::function<void(const RoundMetrics&)>;

struct SimStats {
  std::int64_t rounds = 0;
  std::int64_t requests_issued = 0;
  std::int64_t requests_completed = 0;
  std::int64_t requests_aborted = 0;
  std::int64_t probes_issued = 0;
  std::int64_t probes_failed = 0;
  std::int64_t negative_raw_clamps = 0;
  std::int64_t switch_count = 0;
  std::int64_t protocol_bytes = 0;
};

// Deterministic replay of the scenario: same scenario and seed give the
// same metrics stream, byte for byte. The sink fires once per round in
// round order after all of that round's downloads resolved.
SimStats simulate(const Scenario& scenario, std::uint64_t seed,
                  const MetricsSink& sink);

}  // namespace meshprox::simnet
