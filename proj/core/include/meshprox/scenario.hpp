#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshprox/coords.hpp"
#include "meshprox/ids.hpp"
#include "meshprox/selection.hpp"

namespace meshprox::simnet {

struct ProxyProfile {
  // FIFO service rate of the proxy itself; service time is 1/capacity.
  double capacity_rps = 50.0;
  // Stationary delay between the proxy and the origin it fronts, charged
  // once per request before the first byte comes back.
  double internet_delay_ms = 50.0;
  double internet_bandwidth_bps = 2.5e6;
};

struct Topology {
  std::vector<NodeId> clients;
  std::vector<ProxyId> proxies;
  // Symmetric base RTT between every pair of endpoints, milliseconds.
  std::map<std::string, std::map<std::string, double>> rtt_ms;
  std::map<NodeId, std::map<ProxyId, int>> hops;
  std::map<ProxyId, ProxyProfile> proxy;
  double path_bandwidth_bps = 5e6;
  // Multiplicative jitter amplitude on individual RTT observations.
  double rtt_noise = 0.05;

  bool has_endpoint(const std::string& id) const;
  double base_rtt(const std::string& a, const std::string& b) const;
  int hop_count(const NodeId& client, const ProxyId& proxy) const;
};

struct FaultEvent {
  enum class Kind {
    // Extra request arrivals at a proxy, Poisson at `magnitude` req/s.
    kProxyLoadBurst,
    // Extra milliseconds on a proxy's origin-side delay.
    kInternetDelay,
    // Extra milliseconds of RTT on mesh paths touching the target, which is
    // either an endpoint id or an "a|b" pair.
    kSlowPath,
  };

  Kind kind = Kind::kProxyLoadBurst;
  std::string target;
  double start_s = 0.0;
  double end_s = 0.0;
  double magnitude = 0.0;

  bool active(double t_s) const { return t_s >= start_s && t_s < end_s; }
};

std::string fault_kind_name(FaultEvent::Kind kind);

struct ProtocolParams {
  coords::VivaldiConfig vivaldi;
  double round_period_s = 10.0;
  double alpha = 0.05;
  double hysteresis_ms = 50.0;
  std::int64_t staleness_rounds = 6;
  double recovery_m1_s_per_ms = 1.0;
  double recovery_m2_s = 5.0;
  double recovery_b_s = 10.0;
  int ping_bytes = 112;
  int probe_request_bytes = 200;
  int probe_response_bytes = 300;
  std::int64_t download_bytes = 1'000'000;
  double abort_cap_s = 60.0;
};

struct Scenario {
  std::string name;
  Topology topology;
  ProtocolParams params;
  std::vector<FaultEvent> faults;
  selection::Strategy strategy = selection::Strategy::kMinLoad;
  double duration_s = 1600.0;
  std::uint64_t seed = 1;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty when the scenario is internally consistent; otherwise one line per
// violation.
std::vector<std::string> validate_scenario(const Scenario& scenario);

// Throws ScenarioError on malformed input; run validate_scenario separately
// for semantic checks.
Scenario parse_scenario(const std::string& json_text,
                        const std::string& origin);
Scenario load_scenario(const std::filesystem::path& path);

// Canonical serialization of everything that defines the experiment except
// strategy and seed, so reports from different strategies or seeds over the
// same setup share a hash and stay comparable.
std::string canonical_scenario_text(const Scenario& scenario);
std::uint64_t scenario_hash(const Scenario& scenario);
std::string scenario_hash_hex(const Scenario& scenario);

}  // namespace meshprox::simnet
