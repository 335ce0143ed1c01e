#pragma once

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "meshprox/coords.hpp"
#include "meshprox/rng.hpp"
#include "meshprox/stats.hpp"

namespace testutil {

using meshprox::coords::ClientNode;
using meshprox::coords::NetworkCoordinate;
using meshprox::coords::ProbeNetwork;
using meshprox::coords::VivaldiConfig;

// Fixed-matrix measurement medium: RTTs come from a mutable table with
// optional multiplicative jitter, peer coordinates from a node registry.
class MatrixNetwork final : public ProbeNetwork {
 public:
  MatrixNetwork(std::uint64_t seed, double noise) : seed_(seed), noise_(noise) {}

  void set_rtt(const std::string& a, const std::string& b, double ms) {
    rtt_[key(a, b)] = ms;
  }
  double get_rtt(const std::string& a, const std::string& b) const {
    auto it = rtt_.find(key(a, b));
    return it == rtt_.end() ? -1.0 : it->second;
  }
  void add_offset(const std::string& endpoint, double extra_ms) {
    for (auto& [k, v] : rtt_) {
      if (k.first == endpoint || k.second == endpoint) v += extra_ms;
    }
  }
  void register_node(ClientNode* node) { nodes_[node->id()] = node; }
  void mark_proxy(const std::string& id) { proxies_.insert(id); }
  void set_unreachable(const std::string& id, bool dead) {
    if (dead) {
      dead_.insert(id);
    } else {
      dead_.erase(id);
    }
  }

  std::optional<meshprox::coords::PingSample> ping(const meshprox::NodeId& from,
                                                   const std::string& target,
                                                   int count) override {
    if (dead_.count(target) > 0) return std::nullopt;
    const double base = get_rtt(from, target);
    if (base < 0.0) return std::nullopt;
    const bool to_proxy = proxies_.count(target) > 0;
    std::mt19937_64& rng = ping_rng(from, to_proxy);
    meshprox::coords::PingSample sample;
    sample.target = target;
    for (int i = 0; i < count; ++i) {
      double factor = 1.0;
      if (noise_ > 0.0) factor = 1.0 + meshprox::uniform_real(rng, -noise_, noise_);
      sample.rtts_ms.push_back(base * factor);
    }
    return sample;
  }

  std::optional<NetworkCoordinate> peer_coordinate(
      const meshprox::NodeId& peer) override {
    auto it = nodes_.find(peer);
    if (it == nodes_.end()) return std::nullopt;
    return it->second->coordinate();
  }

 private:
  static std::pair<std::string, std::string> key(const std::string& a,
                                                 const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
  std::mt19937_64& ping_rng(const std::string& from, bool to_proxy) {
    auto& table = to_proxy ? proxy_rngs_ : peer_rngs_;
    auto it = table.find(from);
    if (it == table.end()) {
      it = table
               .emplace(from, meshprox::make_stream(
                                  seed_, to_proxy ? "ping_proxy" : "ping_peer",
                                  meshprox::fnv1a_64(from)))
               .first;
    }
    return it->second;
  }

  std::uint64_t seed_;
  double noise_;
  std::map<std::pair<std::string, std::string>, double> rtt_;
  std::map<std::string, ClientNode*> nodes_;
  std::set<std::string> proxies_;
  std::set<std::string> dead_;
  std::map<std::string, std::mt19937_64> peer_rngs_;
  std::map<std::string, std::mt19937_64> proxy_rngs_;
};

// A set of protocol nodes over a MatrixNetwork, stepped in synchronized
// rounds: tick everyone, deliver the gossip, re-rank neighbors.
class Mesh {
 public:
  Mesh(std::vector<std::string> client_ids, std::vector<std::string> proxy_ids,
       const VivaldiConfig& cfg, std::uint64_t seed, double noise)
      : client_ids_(std::move(client_ids)),
        proxy_ids_(std::move(proxy_ids)),
        net_(seed, noise) {
    for (const auto& id : client_ids_) {
      nodes_.emplace(id, ClientNode(id, cfg,
                                    meshprox::make_stream(seed, "coord",
                                                          meshprox::fnv1a_64(id)),
                                    meshprox::make_stream(seed, "proxycoord",
                                                          meshprox::fnv1a_64(id))));
    }
    for (auto& [id, node] : nodes_) {
      net_.register_node(&node);
      for (const auto& other : client_ids_) {
        if (other != id) node.learn_peer(other);
      }
      for (const auto& pid : proxy_ids_) node.enroll_proxy(pid);
    }
    for (const auto& pid : proxy_ids_) net_.mark_proxy(pid);
  }

  MatrixNetwork& net() { return net_; }
  ClientNode& node(const std::string& id) { return nodes_.at(id); }
  const std::vector<std::string>& client_ids() const { return client_ids_; }

  void run_round(std::int64_t round) {
    struct Outgoing {
      std::string to;
      meshprox::coords::CoordGossip payload;
    };
    std::vector<Outgoing> outbox;
    for (auto& [id, node] : nodes_) {
      auto result = node.round_tick(net_, round);
      if (result.gossip_target.has_value() && result.gossip.has_value()) {
        outbox.push_back({*result.gossip_target, *result.gossip});
      }
    }
    for (auto& out : outbox) {
      auto it = nodes_.find(out.to);
      if (it != nodes_.end()) it->second.receive_gossip(out.payload, round);
    }
    for (auto& [id, node] : nodes_) node.end_round(round);
  }

  void run_rounds(std::int64_t from, std::int64_t count) {
    for (std::int64_t r = 0; r < count; ++r) run_round(from + r);
  }

  // Median absolute client-pair prediction error against the matrix truth.
  double median_abs_error() const {
    std::vector<NetworkCoordinate> coords;
    meshprox::coords::RttMatrix truth(client_ids_.size(),
                                      std::vector<double>(client_ids_.size(), 0.0));
    for (std::size_t i = 0; i < client_ids_.size(); ++i) {
      coords.push_back(nodes_.at(client_ids_[i]).coordinate());
      for (std::size_t j = 0; j < client_ids_.size(); ++j) {
        if (i != j) truth[i][j] = net_.get_rtt(client_ids_[i], client_ids_[j]);
      }
    }
    return meshprox::coords::system_error(truth, coords).median_ms;
  }

  double median_true_rtt() const {
    std::vector<double> rtts;
    for (std::size_t i = 0; i < client_ids_.size(); ++i) {
      for (std::size_t j = i + 1; j < client_ids_.size(); ++j) {
        rtts.push_back(net_.get_rtt(client_ids_[i], client_ids_[j]));
      }
    }
    return meshprox::stats::median(rtts);
  }

 private:
  std::vector<std::string> client_ids_;
  std::vector<std::string> proxy_ids_;
  MatrixNetwork net_;
  std::map<std::string, ClientNode> nodes_;
};

// Planar layout helper: nodes on a grid-ish random scatter, RTT = distance.
inline void fill_planar_rtts(MatrixNetwork& net,
                             const std::vector<std::string>& ids,
                             std::vector<std::pair<double, double>> points) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const double dx = points[i].first - points[j].first;
      const double dy = points[i].second - points[j].second;
      net.set_rtt(ids[i], ids[j], std::hypot(dx, dy));
    }
  }
}

inline std::vector<std::pair<double, double>> random_points(
    std::size_t n, double span, std::mt19937_64& rng) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.emplace_back(meshprox::uniform_real(rng, 0.0, span),
                     meshprox::uniform_real(rng, 0.0, span));
  }
  return pts;
}

}  // namespace testutil
