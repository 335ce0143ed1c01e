#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "meshprox/ids.hpp"

namespace meshprox::coords {

enum class PingAggregate { kMin, kMedian };

struct VivaldiConfig {
  int dimensions = 2;
  // Gain on the position correction and on the local-error blend. Shared
  // value keeps adaptation and confidence tracking in step.
  double step_constant = 0.25;
  double error_constant = 0.25;
  double error_cap = 1.0;
  // Per-axis uniform displacement used when a node boots, so that two nodes
  // starting together do not sit exactly on top of each other.
  double init_offset = 0.1;
  int pings_per_round = 8;
  // Neighbor set: the closest_slots nearest known peers plus random_slots
  // uniformly drawn others, to keep long-range error bounded.
  int closest_slots = 4;
  int random_slots = 4;
  // A peer or proxy that fails this many consecutive pings is dropped.
  int evict_after_failures = 10;
  PingAggregate aggregate = PingAggregate::kMin;

  int neighbor_capacity() const { return closest_slots + random_slots; }
  int proxy_capacity() const { return closest_slots + random_slots; }
};

// Position in a small Euclidean space plus the local error estimate.
// Distance between two coordinates predicts path RTT in milliseconds.
class NetworkCoordinate {
 public:
  NetworkCoordinate() = default;
  NetworkCoordinate(std::vector<double> position, double local_error);

  static NetworkCoordinate origin(int dimensions);
  static NetworkCoordinate random_start(int dimensions, double offset,
                                        std::mt19937_64& rng);

  std::span<const double> position() const { return position_; }
  double local_error() const { return local_error_; }
  int dimensions() const { return static_cast<int>(position_.size()); }
  bool finite() const;

 private:
  std::vector<double> position_;
  double local_error_ = 1.0;
};

double predict_rtt(const NetworkCoordinate& a, const NetworkCoordinate& b);

// One relaxation step against a measured RTT. The adaptive timestep weighs
// the move by self confidence relative to the peer, the sample error feeds
// the local error estimate, and coincident positions get a random unit
// direction so the pair can separate.
NetworkCoordinate vivaldi_update(const NetworkCoordinate& self,
                                 const NetworkCoordinate& peer,
                                 double measured_rtt_ms,
                                 const VivaldiConfig& cfg,
                                 std::mt19937_64& rng);

// Collapse one round of ping RTTs into the value fed to the update. The
// minimum filters queueing spikes; median is kept for comparison runs.
double aggregate_pings(std::span<const double> rtts_ms, PingAggregate how);

struct PingSample {
  std::string target;
  std::vector<double> rtts_ms;
};

// RTT a client measured to a proxy, stamped with the round it was taken in.
// Travels inside gossip so that other clients can refine their own copy of
// the proxy coordinate without the proxy running any protocol.
struct ProxyRttReport {
  ProxyId proxy;
  double rtt_ms = 0.0;
  std::int64_t round = 0;
};

using RttMatrix = std::vector<std::vector<double>>;

struct SystemError {
  double median_ms = 0.0;
  bool defined = false;
};

// Median absolute prediction error across all node pairs. Undefined for
// fewer than two nodes.
SystemError system_error(const RttMatrix& true_rtts_ms,
                         std::span<const NetworkCoordinate> coords);

struct NeighborSet {
  std::vector<NodeId> closest;
  std::vector<NodeId> random;

  std::vector<NodeId> all() const;
  bool contains(const NodeId& id) const;
  bool empty() const { return closest.empty() && random.empty(); }
  std::size_t size() const { return closest.size() + random.size(); }
};

struct ProxyRecord {
  NetworkCoordinate coord;
  double last_rtt_ms = 0.0;
  std::int64_t last_update_round = -1;
  int consecutive_failures = 0;
};

// Coordinates a client maintains on behalf of proxies, which answer pings
// but run no protocol themselves. Bounded; when full the stalest entry is
// evicted to admit a new proxy.
class ProxyCoordinateStore {
 public:
  explicit ProxyCoordinateStore(int capacity) : capacity_(capacity) {}

  bool contains(const ProxyId& proxy) const;
  const ProxyRecord* find(const ProxyId& proxy) const;
  std::vector<ProxyId> ids() const;
  std::size_t size() const { return entries_.size(); }
  int capacity() const { return capacity_; }

  // Enroll a proxy with a fresh starting coordinate. No-op if present.
  void enroll(const ProxyId& proxy, const VivaldiConfig& cfg,
              std::mt19937_64& rng);

  // Nudge the stored proxy coordinate toward consistency with one
  // measurement taken from reporter_coord at the given RTT. The measuring
  // side is treated as fixed: only the proxy copy moves. Unknown proxies
  // are enrolled first, evicting the stalest entry when at capacity.
  void apply_measurement(const ProxyId& proxy,
                         const NetworkCoordinate& reporter_coord,
                         double rtt_ms, std::int64_t round,
                         const VivaldiConfig& cfg, std::mt19937_64& rng);

  // Returns true when the failure count reached the eviction threshold and
  // the entry was dropped.
  bool record_failure(const ProxyId& proxy, const VivaldiConfig& cfg);

 private:
  int capacity_;
  std::map<ProxyId, ProxyRecord> entries_;
};

// Free-function spelling used by gossip application and tests.
void update_proxy_coordinate(ProxyCoordinateStore& store, const ProxyId& proxy,
                             const NetworkCoordinate& reporter_coord,
                             double rtt_ms, std::int64_t round,
                             const VivaldiConfig& cfg, std::mt19937_64& rng);

// What the measurement medium must provide to drive a round. Implemented by
// the simulator's network and by fixed-matrix stubs in tests.
class ProbeNetwork {
 public:
  virtual ~ProbeNetwork() = default;

  // `count` echo round-trips to the target; nullopt when unreachable.
  virtual std::optional<PingSample> ping(const NodeId& from,
                                         const std::string& target,
                                         int count) = 0;

  // Remote coordinate as carried on ping echo replies. Proxies never have
  // one; peers may not have booted yet.
  virtual std::optional<NetworkCoordinate> peer_coordinate(
      const NodeId& peer) = 0;
};

// One coordinate exchange message. Carries the sender's own coordinate, the
// sender's latest proxy RTT measurement, and a digest of the coordinates the
// sender holds for its neighbors.
struct CoordGossip {
  NodeId sender;
  NetworkCoordinate sender_coord;
  std::optional<ProxyRttReport> proxy_rtt;
  std::vector<std::pair<NodeId, NetworkCoordinate>> neighbor_digest;
};

// Client-side protocol state machine. Drive it per round:
//   1. round_tick() on every node (pings, updates, produces outgoing gossip),
//   2. deliver the gossip via receive_gossip(),
//   3. end_round() on every node (neighbor re-ranking).
class ClientNode {
 public:
  ClientNode(NodeId id, const VivaldiConfig& cfg, std::mt19937_64 coord_rng,
             std::mt19937_64 proxy_rng);

  const NodeId& id() const { return id_; }
  const NetworkCoordinate& coordinate() const { return coord_; }
  const NeighborSet& neighbors() const { return neighbors_; }
  const ProxyCoordinateStore& proxy_store() const { return proxies_; }

  // Make a peer eligible for neighbor selection; coordinate unknown until a
  // ping reply or gossip supplies one.
  void learn_peer(const NodeId& peer);
  void learn_peer_coordinate(const NodeId& peer,
                             const NetworkCoordinate& coord);
  std::optional<NetworkCoordinate> peer_coordinate(const NodeId& peer) const;
  std::vector<NodeId> known_peers() const;

  void enroll_proxy(const ProxyId& proxy);
  std::optional<double> predicted_proxy_rtt(const ProxyId& proxy) const;
  std::optional<double> predicted_peer_rtt(const NodeId& peer) const;

  // Count of known peers whose coordinate sits strictly closer to the proxy
  // than this node's own. Feeds the personalized recovery timeout.
  int peers_closer_to_proxy(const ProxyId& proxy) const;

  struct RoundResult {
    std::optional<NodeId> pinged_peer;
    std::optional<ProxyId> pinged_proxy;
    std::optional<NodeId> gossip_target;
    std::optional<CoordGossip> gossip;
  };

  RoundResult round_tick(ProbeNetwork& net, std::int64_t round);
  void receive_gossip(const CoordGossip& payload, std::int64_t round);
  void end_round(std::int64_t round);

  // Mutable store access for callers that feed externally sourced proxy
  // measurements (e.g. recovery probes resolved outside round_tick).
  ProxyCoordinateStore& proxy_store_mut() { return proxies_; }
  std::mt19937_64& proxy_rng() { return proxy_rng_; }

 private:
  struct PeerInfo {
    NetworkCoordinate coord;
    bool has_coord = false;
    int consecutive_failures = 0;
  };

  std::vector<std::pair<NodeId, NetworkCoordinate>> make_digest() const;
  void rebuild_neighbors();

  NodeId id_;
  VivaldiConfig cfg_;
  NetworkCoordinate coord_;
  std::mt19937_64 coord_rng_;
  std::mt19937_64 proxy_rng_;
  std::map<NodeId, PeerInfo> peers_;
  NeighborSet neighbors_;
  ProxyCoordinateStore proxies_;
  std::optional<ProxyRttReport> last_proxy_rtt_;
};

}  // namespace meshprox::coords
