#include "meshprox/coords.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "meshprox/rng.hpp"
#include "meshprox/stats.hpp"

namespace meshprox::coords {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> random_unit(int dimensions, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(dimensions));
  double len = 0.0;
  do {
    for (auto& x : v) x = gauss(rng);
    len = norm(v);
  } while (len < 1e-12);
  for (auto& x : v) x /= len;
  return v;
}

}  // namespace

NetworkCoordinate::NetworkCoordinate(std::vector<double> position,
                                     double local_error)
    : position_(std::move(position)), local_error_(local_error) {}

NetworkCoordinate NetworkCoordinate::origin(int dimensions) {
  return NetworkCoordinate(std::vector<double>(static_cast<std::size_t>(dimensions), 0.0), 1.0);
}

NetworkCoordinate NetworkCoordinate::random_start(int dimensions, double offset,
                                                  std::mt19937_64& rng) {
  std::vector<double> pos(static_cast<std::size_t>(dimensions));
  for (auto& x : pos) x = uniform_real(rng, -offset, offset);
  return NetworkCoordinate(std::move(pos), 1.0);
}

bool NetworkCoordinate::finite() const {
  if (!std::isfinite(local_error_)) return false;
  for (double x : position_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double predict_rtt(const NetworkCoordinate& a, const NetworkCoordinate& b) {
  assert(a.dimensions() == b.dimensions());
  double s = 0.0;
  for (int i = 0; i < a.dimensions(); ++i) {
    const double d = a.position()[static_cast<std::size_t>(i)] -
                     b.position()[static_cast<std::size_t>(i)];
    s += d * d;
  }
  return std::sqrt(s);
}

NetworkCoordinate vivaldi_update(const NetworkCoordinate& self,
                                 const NetworkCoordinate& peer,
                                 double measured_rtt_ms,
                                 const VivaldiConfig& cfg,
                                 std::mt19937_64& rng) {
  if (measured_rtt_ms <= 0.0 || !peer.finite() || !self.finite() ||
      self.dimensions() != peer.dimensions()) {
    return self;
  }

  const double e_self = self.local_error();
  const double e_peer = peer.local_error();
  const double denom = e_self + e_peer;
  const double w = denom > 0.0 ? e_self / denom : 0.5;

  const double dist = predict_rtt(self, peer);
  const double sample_error =
      std::abs(dist - measured_rtt_ms) / measured_rtt_ms;
  const double blend = cfg.error_constant * w;
  const double new_error =
      std::min(cfg.error_cap, sample_error * blend + e_self * (1.0 - blend));

  std::vector<double> direction;
  if (dist > 1e-12) {
    direction.resize(static_cast<std::size_t>(self.dimensions()));
    for (int i = 0; i < self.dimensions(); ++i) {
      direction[static_cast<std::size_t>(i)] =
          (self.position()[static_cast<std::size_t>(i)] -
           peer.position()[static_cast<std::size_t>(i)]) /
          dist;
    }
  } else {
    direction = random_unit(self.dimensions(), rng);
  }

  const double step = cfg.step_constant * w * (measured_rtt_ms - dist);
  std::vector<double> pos(self.position().begin(), self.position().end());
  for (int i = 0; i < self.dimensions(); ++i) {
    pos[static_cast<std::size_t>(i)] += step * direction[static_cast<std::size_t>(i)];
  }
  return NetworkCoordinate(std::move(pos), new_error);
}

double aggregate_pings(std::span<const double> rtts_ms, PingAggregate how) {
  if (rtts_ms.empty()) return 0.0;
  switch (how) {
    case PingAggregate::kMin:
      return *std::min_element(rtts_ms.begin(), rtts_ms.end());
    case PingAggregate::kMedian:
      return stats::median(rtts_ms);
  }
  return 0.0;
}

SystemError system_error(const RttMatrix& true_rtts_ms,
                         std::span<const NetworkCoordinate> coords) {
  const std::size_t n = coords.size();
  if (n < 2 || true_rtts_ms.size() != n) return {0.0, false};
  std::vector<double> errors;
  errors.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double predicted = predict_rtt(coords[i], coords[j]);
      errors.push_back(std::abs(predicted - true_rtts_ms[i][j]));
    }
  }
  return {stats::median(errors), true};
}

std::vector<NodeId> NeighborSet::all() const {
  std::vector<NodeId> out = closest;
  out.insert(out.end(), random.begin(), random.end());
  return out;
}

bool NeighborSet::contains(const NodeId& id) const {
  return std::find(closest.begin(), closest.end(), id) != closest.end() ||
         std::find(random.begin(), random.end(), id) != random.end();
}

bool ProxyCoordinateStore::contains(const ProxyId& proxy) const {
  return entries_.count(proxy) > 0;
}

const ProxyRecord* ProxyCoordinateStore::find(const ProxyId& proxy) const {
  auto it = entries_.find(proxy);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<ProxyId> ProxyCoordinateStore::ids() const {
  std::vector<ProxyId> out;
  out.reserve(entries_.size());
  for (const auto& [id, rec] : entries_) out.push_back(id);
  return out;
}

void ProxyCoordinateStore::enroll(const ProxyId& proxy,
                                  const VivaldiConfig& cfg,
                                  std::mt19937_64& rng) {
  if (entries_.count(proxy) > 0) return;
  if (static_cast<int>(entries_.size()) >= capacity_) {
    auto stalest = entries_.begin();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->second.last_update_round < stalest->second.last_update_round) {
        stalest = it;
      }
    }
    entries_.erase(stalest);
  }
  ProxyRecord rec;
  rec.coord = NetworkCoordinate::random_start(cfg.dimensions, cfg.init_offset, rng);
  entries_.emplace(proxy, std::move(rec));
}

void ProxyCoordinateStore::apply_measurement(
    const ProxyId& proxy, const NetworkCoordinate& reporter_coord,
    double rtt_ms, std::int64_t round, const VivaldiConfig& cfg,
    std::mt19937_64& rng) {
  enroll(proxy, cfg, rng);
  ProxyRecord& rec = entries_[proxy];
  rec.coord = vivaldi_update(rec.coord, reporter_coord, rtt_ms, cfg, rng);
  rec.last_rtt_ms = rtt_ms;
  rec.last_update_round = std::max(rec.last_update_round, round);
  rec.consecutive_failures = 0;
}

bool ProxyCoordinateStore::record_failure(const ProxyId& proxy,
                                          const VivaldiConfig& cfg) {
  auto it = entries_.find(proxy);
  if (it == entries_.end()) return false;
  if (++it->second.consecutive_failures >= cfg.evict_after_failures) {
    entries_.erase(it);
    return true;
  }
  return false;
}

void update_proxy_coordinate(ProxyCoordinateStore& store, const ProxyId& proxy,
                             const NetworkCoordinate& reporter_coord,
                             double rtt_ms, std::int64_t round,
                             const VivaldiConfig& cfg, std::mt19937_64& rng) {
  store.apply_measurement(proxy, reporter_coord, rtt_ms, round, cfg, rng);
}

ClientNode::ClientNode(NodeId id, const VivaldiConfig& cfg,
                       std::mt19937_64 coord_rng, std::mt19937_64 proxy_rng)
    : id_(std::move(id)),
      cfg_(cfg),
      coord_rng_(std::move(coord_rng)),
      proxy_rng_(std::move(proxy_rng)),
      proxies_(cfg.proxy_capacity()) {
  coord_ = NetworkCoordinate::random_start(cfg_.dimensions, cfg_.init_offset,
                                           coord_rng_);
}

void ClientNode::learn_peer(const NodeId& peer) {
  if (peer == id_) return;
  peers_.try_emplace(peer);
}

void ClientNode::learn_peer_coordinate(const NodeId& peer,
                                       const NetworkCoordinate& coord) {
  if (peer == id_ || !coord.finite()) return;
  PeerInfo& info = peers_[peer];
  info.coord = coord;
  info.has_coord = true;
}

std::optional<NetworkCoordinate> ClientNode::peer_coordinate(
    const NodeId& peer) const {
  auto it = peers_.find(peer);
  if (it == peers_.end() || !it->second.has_coord) return std::nullopt;
  return it->second.coord;
}

std::vector<NodeId> ClientNode::known_peers() const {
  std::vector<NodeId> out;
  out.reserve(peers_.size());
  for (const auto& [id, info] : peers_) out.push_back(id);
  return out;
}

void ClientNode::enroll_proxy(const ProxyId& proxy) {
  proxies_.enroll(proxy, cfg_, proxy_rng_);
}

std::optional<double> ClientNode::predicted_proxy_rtt(
    const ProxyId& proxy) const {
  const ProxyRecord* rec = proxies_.find(proxy);
  if (rec == nullptr) return std::nullopt;
  return predict_rtt(coord_, rec->coord);
}

std::optional<double> ClientNode::predicted_peer_rtt(const NodeId& peer) const {
  auto it = peers_.find(peer);
  if (it == peers_.end() || !it->second.has_coord) return std::nullopt;
  return predict_rtt(coord_, it->second.coord);
}

int ClientNode::peers_closer_to_proxy(const ProxyId& proxy) const {
  const ProxyRecord* rec = proxies_.find(proxy);
  if (rec == nullptr) return 0;
  const double own = predict_rtt(coord_, rec->coord);
  int closer = 0;
  for (const auto& [id, info] : peers_) {
    if (info.has_coord && predict_rtt(info.coord, rec->coord) < own) ++closer;
  }
  return closer;
}

std::vector<std::pair<NodeId, NetworkCoordinate>> ClientNode::make_digest()
    const {
  std::vector<std::pair<NodeId, NetworkCoordinate>> digest;
  for (const NodeId& nid : neighbors_.all()) {
    auto it = peers_.find(nid);
    if (it != peers_.end() && it->second.has_coord) {
      digest.emplace_back(nid, it->second.coord);
    }
  }
  return digest;
}

ClientNode::RoundResult ClientNode::round_tick(ProbeNetwork& net,
                                               std::int64_t round) {
  RoundResult out;

  if (neighbors_.empty()) rebuild_neighbors();

  // Proxy plane first so the gossip built below carries this round's
  // measurement rather than last round's.
  if (proxies_.size() > 0) {
    const auto pids = proxies_.ids();
    const ProxyId target = pids[uniform_index(proxy_rng_, pids.size())];
    out.pinged_proxy = target;
    auto sample = net.ping(id_, target, cfg_.pings_per_round);
    if (sample && !sample->rtts_ms.empty()) {
      const double rtt = aggregate_pings(sample->rtts_ms, cfg_.aggregate);
      proxies_.apply_measurement(target, coord_, rtt, round, cfg_, proxy_rng_);
      last_proxy_rtt_ = ProxyRttReport{target, rtt, round};
    } else {
      proxies_.record_failure(target, cfg_);
    }
  }

  if (!neighbors_.empty()) {
    const auto targets = neighbors_.all();
    const NodeId peer = targets[uniform_index(coord_rng_, targets.size())];
    out.pinged_peer = peer;
    auto sample = net.ping(id_, peer, cfg_.pings_per_round);
    if (sample && !sample->rtts_ms.empty()) {
      peers_[peer].consecutive_failures = 0;
      const double rtt = aggregate_pings(sample->rtts_ms, cfg_.aggregate);
      if (auto pc = net.peer_coordinate(peer)) {
        learn_peer_coordinate(peer, *pc);
        coord_ = vivaldi_update(coord_, *pc, rtt, cfg_, coord_rng_);
      }
      out.gossip_target = peer;
      out.gossip = CoordGossip{id_, coord_, last_proxy_rtt_, make_digest()};
    } else {
      PeerInfo& info = peers_[peer];
      if (++info.consecutive_failures >= cfg_.evict_after_failures) {
        peers_.erase(peer);
      }
    }
  }

  return out;
}

void ClientNode::receive_gossip(const CoordGossip& payload,
                                std::int64_t /*round*/) {
  learn_peer(payload.sender);
  learn_peer_coordinate(payload.sender, payload.sender_coord);
  for (const auto& [nid, coord] : payload.neighbor_digest) {
    if (nid == id_) continue;
    learn_peer(nid);
    learn_peer_coordinate(nid, coord);
  }
  if (payload.proxy_rtt.has_value()) {
    const ProxyRttReport& report = *payload.proxy_rtt;
    proxies_.apply_measurement(report.proxy, payload.sender_coord,
                               report.rtt_ms, report.round, cfg_, proxy_rng_);
  }
}

void ClientNode::end_round(std::int64_t /*round*/) {
  rebuild_neighbors();
}

void ClientNode::rebuild_neighbors() {
  std::vector<NodeId> candidates;
  candidates.reserve(peers_.size());
  for (const auto& [id, info] : peers_) candidates.push_back(id);

  // Nearest known peers fill the proximity slots; peers without a
  // coordinate yet rank last in id order.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const NodeId& a, const NodeId& b) {
                     const auto ra = predicted_peer_rtt(a);
                     const auto rb = predicted_peer_rtt(b);
                     const double da = ra.value_or(std::numeric_limits<double>::infinity());
                     const double db = rb.value_or(std::numeric_limits<double>::infinity());
                     if (da != db) return da < db;
                     return a < b;
                   });

  NeighborSet next;
  const std::size_t c_slots = static_cast<std::size_t>(cfg_.closest_slots);
  for (std::size_t i = 0; i < candidates.size() && next.closest.size() < c_slots; ++i) {
    next.closest.push_back(candidates[i]);
  }
  std::vector<NodeId> rest(candidates.begin() + static_cast<std::ptrdiff_t>(next.closest.size()),
                           candidates.end());
  std::sort(rest.begin(), rest.end());
  std::sample(rest.begin(), rest.end(), std::back_inserter(next.random),
              static_cast<std::size_t>(cfg_.random_slots), coord_rng_);
  neighbors_ = std::move(next);
}

}  // namespace meshprox::coords
