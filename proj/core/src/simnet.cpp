#include "meshprox/simnet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <vector>

#include "meshprox/dissemination.hpp"
#include "meshprox/proxy_load.hpp"
#include "meshprox/rng.hpp"
#include "meshprox/selection.hpp"
#include "meshprox/stats.hpp"

namespace meshprox::simnet {

std::string status_name(ClientRound::Status status) {
  switch (status) {
    case ClientRound::Status::kOk:
      return "ok";
    case ClientRound::Status::kAborted:
      return "aborted";
    case ClientRound::Status::kBusy:
      return "busy";
    case ClientRound::Status::kNoProxy:
      return "no_proxy";
    case ClientRound::Status::kUnresolved:
      return "unresolved";
  }
  return "unknown";
}

namespace {

// One request (download or recovery probe) travelling the full path. All
// times are absolute milliseconds; the queue outcome is fixed at enqueue
// because arrivals are processed in time order against a FIFO server.
struct Pending {
  NodeId client;
  ProxyId proxy;
  bool probe = false;
  std::int64_t issued_round = 0;
  double issued_ms = 0.0;
  double arrival_ms = 0.0;
  double first_byte_ms = 0.0;
  double completed_ms = 0.0;
  double predicted_rtt_ms = 0.0;
  bool sample_applied = false;
};

class Engine;

class SimNetwork final : public coords::ProbeNetwork {
 public:
  explicit SimNetwork(Engine& engine) : engine_(engine) {}

  std::optional<coords::PingSample> ping(const NodeId& from,
                                         const std::string& target,
                                         int count) override;
  std::optional<coords::NetworkCoordinate> peer_coordinate(
      const NodeId& peer) override;

 private:
  Engine& engine_;
};

struct ProxyState {
  double service_ms = 0.0;
  double server_free_ms = 0.0;
  // Fault-injected arrivals, pre-generated so queue evolution does not
  // depend on when clients happen to query it.
  std::vector<double> bg_arrivals_ms;
  std::size_t bg_cursor = 0;
};

struct Client {
  std::unique_ptr<coords::ClientNode> node;
  proxy_load::LoadTracker tracker;
  dissemination::ReportTable reports;
  dissemination::RecoveryManager recovery;
  selection::SelectionTable table;
  std::optional<Pending> outstanding;
  std::vector<Pending> probes;
  std::mt19937_64 workload_rng;

  Client(NodeId id, std::mt19937_64 rng)
      : tracker(id), workload_rng(std::move(rng)) {}
};

struct Delivery {
  NodeId to;
  dissemination::GossipPayload payload;
};

class Engine {
 public:
  Engine(const Scenario& sc, std::uint64_t seed, const MetricsSink& sink)
      : sc_(sc),
        seed_(seed),
        sink_(sink),
        net_(*this),
        period_ms_(sc.params.round_period_s * 1000.0),
        total_rounds_(static_cast<std::int64_t>(
            std::ceil(sc.duration_s / sc.params.round_period_s))) {}

  SimStats run();

  double true_rtt(const std::string& a, const std::string& b,
                  double t_s) const;
  double rtt_noise_factor(std::mt19937_64& rng) const;
  std::mt19937_64& peer_ping_rng(const NodeId& client) {
    return peer_ping_rngs_.at(client);
  }
  std::mt19937_64& proxy_ping_rng(const NodeId& client) {
    return proxy_ping_rngs_.at(client);
  }
  bool is_proxy(const std::string& id) const {
    return sc_.topology.proxy.count(id) > 0;
  }
  const coords::NetworkCoordinate* client_coordinate(const NodeId& id) const {
    auto it = clients_.find(id);
    return it == clients_.end() ? nullptr : &it->second.node->coordinate();
  }
  double now_s() const { return now_ms_ / 1000.0; }

 private:
  void init();
  double origin_delay_ms(const ProxyId& proxy, double t_s) const;
  void generate_background(const ProxyId& proxy, ProxyState& state);
  void advance_background(ProxyState& state, double until_ms);
  void resolve_due_events(std::int64_t round);
  void mark_probe_failed(Client& client, const Pending& probe);
  void apply_penalties(std::int64_t round);
  void protocol_round(std::int64_t round, std::vector<Delivery>& deliveries,
                      std::int64_t& overhead_bytes);
  void refresh_table(Client& client, std::int64_t round);
  void selection_and_issue(std::int64_t round, std::int64_t& overhead_bytes,
                           std::vector<Pending>& to_enqueue);
  void enqueue_all(std::vector<Pending>& to_enqueue);
  void deliver(std::vector<Delivery>& deliveries, std::int64_t round);
  void finish_round(std::int64_t round, std::int64_t overhead_bytes);
  void emit_resolved(bool final_flush);
  RoundMetrics& row(std::int64_t round);

  const Scenario& sc_;
  std::uint64_t seed_;
  const MetricsSink& sink_;
  SimNetwork net_;
  double period_ms_;
  std::int64_t total_rounds_;
  double now_ms_ = 0.0;

  std::map<NodeId, Client> clients_;
  std::map<ProxyId, ProxyState> proxies_;
  std::map<NodeId, std::mt19937_64> peer_ping_rngs_;
  std::map<NodeId, std::mt19937_64> proxy_ping_rngs_;

  std::map<std::int64_t, RoundMetrics> rows_;
  std::int64_t next_emit_ = 0;
  SimStats stats_;
};

std::optional<coords::PingSample> SimNetwork::ping(const NodeId& from,
                                                   const std::string& target,
                                                   int count) {
  std::mt19937_64& rng = engine_.is_proxy(target)
                             ? engine_.proxy_ping_rng(from)
                             : engine_.peer_ping_rng(from);
  const double base = engine_.true_rtt(from, target, engine_.now_s());
  if (base < 0.0) return std::nullopt;
  coords::PingSample sample;
  sample.target = target;
  sample.rtts_ms.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    sample.rtts_ms.push_back(base * engine_.rtt_noise_factor(rng));
  }
  return sample;
}

std::optional<coords::NetworkCoordinate> SimNetwork::peer_coordinate(
    const NodeId& peer) {
  const coords::NetworkCoordinate* coord = engine_.client_coordinate(peer);
  if (coord == nullptr) return std::nullopt;
  return *coord;
}

double Engine::true_rtt(const std::string& a, const std::string& b,
                        double t_s) const {
  double rtt = sc_.topology.base_rtt(a, b);
  if (rtt < 0.0) return rtt;
  for (const FaultEvent& f : sc_.faults) {
    if (f.kind != FaultEvent::Kind::kSlowPath || !f.active(t_s)) continue;
    const auto bar = f.target.find('|');
    if (bar == std::string::npos) {
      if (f.target == a || f.target == b) rtt += f.magnitude;
    } else {
      const std::string x = f.target.substr(0, bar);
      const std::string y = f.target.substr(bar + 1);
      if ((x == a && y == b) || (x == b && y == a)) rtt += f.magnitude;
    }
  }
  return rtt;
}

double Engine::rtt_noise_factor(std::mt19937_64& rng) const {
  const double amp = sc_.topology.rtt_noise;
  if (amp <= 0.0) return 1.0;
  return 1.0 + uniform_real(rng, -amp, amp);
}

double Engine::origin_delay_ms(const ProxyId& proxy, double t_s) const {
  double delay = sc_.topology.proxy.at(proxy).internet_delay_ms;
  for (const FaultEvent& f : sc_.faults) {
    if (f.kind == FaultEvent::Kind::kInternetDelay && f.target == proxy &&
        f.active(t_s)) {
      delay += f.magnitude;
    }
  }
  return delay;
}

void Engine::generate_background(const ProxyId& proxy, ProxyState& state) {
  std::mt19937_64 rng = make_stream(seed_, "background", fnv1a_64(proxy));
  for (const FaultEvent& f : sc_.faults) {
    if (f.kind != FaultEvent::Kind::kProxyLoadBurst || f.target != proxy) {
      continue;
    }
    double t_ms = f.start_s * 1000.0;
    const double mean_gap_ms = 1000.0 / f.magnitude;
    while (true) {
      t_ms += exponential_gap(rng, mean_gap_ms);
      if (t_ms >= f.end_s * 1000.0) break;
      state.bg_arrivals_ms.push_back(t_ms);
    }
  }
  std::sort(state.bg_arrivals_ms.begin(), state.bg_arrivals_ms.end());
}

void Engine::advance_background(ProxyState& state, double until_ms) {
  while (state.bg_cursor < state.bg_arrivals_ms.size() &&
         state.bg_arrivals_ms[state.bg_cursor] <= until_ms) {
    const double arrival = state.bg_arrivals_ms[state.bg_cursor];
    state.server_free_ms =
        std::max(state.server_free_ms, arrival) + state.service_ms;
    ++state.bg_cursor;
  }
}

void Engine::init() {
  for (const ProxyId& pid : sc_.topology.proxies) {
    ProxyState state;
    state.service_ms = 1000.0 / sc_.topology.proxy.at(pid).capacity_rps;
    generate_background(pid, state);
    proxies_.emplace(pid, std::move(state));
  }

  for (const NodeId& cid : sc_.topology.clients) {
    auto [it, inserted] = clients_.emplace(
        cid, Client(cid, make_stream(seed_, "workload", fnv1a_64(cid))));
    Client& client = it->second;
    client.node = std::make_unique<coords::ClientNode>(
        cid, sc_.params.vivaldi, make_stream(seed_, "coord", fnv1a_64(cid)),
        make_stream(seed_, "proxycoord", fnv1a_64(cid)));
    for (const NodeId& other : sc_.topology.clients) {
      if (other != cid) client.node->learn_peer(other);
    }
    for (const ProxyId& pid : sc_.topology.proxies) {
      client.node->enroll_proxy(pid);
    }
    client.table.hysteresis_ms = sc_.params.hysteresis_ms;
    peer_ping_rngs_.emplace(cid,
                            make_stream(seed_, "ping_peer", fnv1a_64(cid)));
    proxy_ping_rngs_.emplace(cid,
                             make_stream(seed_, "ping_proxy", fnv1a_64(cid)));
  }
}

RoundMetrics& Engine::row(std::int64_t round) {
  RoundMetrics& r = rows_[round];
  if (r.round != round) {
    r.round = round;
    r.time_s = static_cast<double>(round) * sc_.params.round_period_s;
  }
  return r;
}

void Engine::resolve_due_events(std::int64_t round) {
  struct Event {
    double at_ms;
    NodeId client;
    int kind;  // 0 first byte, 1 completion
    bool probe;
    std::size_t probe_index;
  };
  std::vector<Event> events;
  for (auto& [cid, client] : clients_) {
    if (client.outstanding.has_value()) {
      Pending& p = *client.outstanding;
      if (!p.sample_applied && p.first_byte_ms <= now_ms_) {
        events.push_back({p.first_byte_ms, cid, 0, false, 0});
      }
      if (p.completed_ms <= now_ms_) {
        events.push_back({p.completed_ms, cid, 1, false, 0});
      }
    }
    for (std::size_t i = 0; i < client.probes.size(); ++i) {
      Pending& p = client.probes[i];
      if (p.completed_ms <= now_ms_) {
        events.push_back({p.completed_ms, cid, 1, true, i});
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.at_ms != b.at_ms) return a.at_ms < b.at_ms;
    if (a.client != b.client) return a.client < b.client;
    return a.kind < b.kind;
  });

  const double cap_ms = sc_.params.abort_cap_s * 1000.0;
  std::map<NodeId, std::vector<std::size_t>> probe_done;
  for (const Event& ev : events) {
    Client& client = clients_.at(ev.client);
    if (!ev.probe) {
      if (!client.outstanding.has_value()) continue;
      Pending& p = *client.outstanding;
      if (ev.kind == 0) {
        const double ttfb = p.first_byte_ms - p.issued_ms;
        client.tracker.on_sample(
            {p.proxy, ttfb, p.predicted_rtt_ms, round}, sc_.params.alpha);
        p.sample_applied = true;
      } else {
        ClientRound& cr = row(p.issued_round).clients[ev.client];
        if (p.completed_ms - p.issued_ms >= cap_ms) {
          cr.download_ms = cap_ms;
          cr.status = ClientRound::Status::kAborted;
          ++stats_.requests_aborted;
        } else {
          cr.download_ms = p.completed_ms - p.issued_ms;
          cr.status = ClientRound::Status::kOk;
          ++stats_.requests_completed;
        }
        client.outstanding.reset();
      }
    } else {
      Pending& p = client.probes[ev.probe_index];
      if (p.completed_ms - p.issued_ms >= cap_ms) {
        mark_probe_failed(client, p);
      } else {
        const double ttfb = p.first_byte_ms - p.issued_ms;
        client.tracker.on_sample({p.proxy, ttfb, p.predicted_rtt_ms, round},
                                 sc_.params.alpha);
      }
      probe_done[ev.client].push_back(ev.probe_index);
    }
  }
  for (auto& [cid, indices] : probe_done) {
    Client& client = clients_.at(cid);
    std::sort(indices.begin(), indices.end(), std::greater<>());
    for (std::size_t idx : indices) {
      client.probes.erase(client.probes.begin() +
                          static_cast<std::ptrdiff_t>(idx));
    }
  }

  // Requests still in flight past the cap are cut off at the boundary.
  for (auto& [cid, client] : clients_) {
    if (client.outstanding.has_value()) {
      Pending& p = *client.outstanding;
      if (now_ms_ - p.issued_ms >= cap_ms) {
        ClientRound& cr = row(p.issued_round).clients[cid];
        cr.download_ms = cap_ms;
        cr.status = ClientRound::Status::kAborted;
        client.outstanding.reset();
        ++stats_.requests_aborted;
      }
    }
    for (std::size_t i = client.probes.size(); i-- > 0;) {
      Pending& p = client.probes[i];
      if (now_ms_ - p.issued_ms >= cap_ms) {
        mark_probe_failed(client, p);
        client.probes.erase(client.probes.begin() +
                            static_cast<std::ptrdiff_t>(i));
      }
    }
  }
}

void Engine::mark_probe_failed(Client& client, const Pending& probe) {
  const double distance =
      client.node->predicted_proxy_rtt(probe.proxy).value_or(0.0);
  const double timeout = dissemination::personalized_timeout(
      distance, client.node->peers_closer_to_proxy(probe.proxy),
      sc_.params.recovery_m1_s_per_ms, sc_.params.recovery_m2_s,
      sc_.params.recovery_b_s);
  client.recovery.mark_unavailable(probe.proxy, now_s() + timeout);
  ++stats_.probes_failed;
}

void Engine::apply_penalties(std::int64_t round) {
  for (auto& [cid, client] : clients_) {
    if (!client.outstanding.has_value()) continue;
    Pending& p = *client.outstanding;
    if (p.sample_applied) continue;
    const double waiting = now_ms_ - p.issued_ms;
    if (waiting >= period_ms_) {
      client.tracker.on_waiting(p.proxy, waiting, sc_.params.alpha, round);
    }
  }
}

void Engine::protocol_round(std::int64_t round,
                            std::vector<Delivery>& deliveries,
                            std::int64_t& overhead_bytes) {
  const int ping_cost = 2 * sc_.params.ping_bytes *
                        sc_.params.vivaldi.pings_per_round;
  const std::size_t report_limit =
      static_cast<std::size_t>(sc_.params.vivaldi.proxy_capacity());
  for (auto& [cid, client] : clients_) {
    auto result = client.node->round_tick(net_, round);
    if (result.pinged_peer.has_value()) overhead_bytes += ping_cost;
    if (result.pinged_proxy.has_value()) overhead_bytes += ping_cost;

    // Fold this round's own estimates in before relaying, so the freshest
    // local knowledge rides along.
    client.reports = dissemination::merge_reports(std::move(client.reports),
                                                  client.tracker.snapshot());

    if (result.gossip_target.has_value() && result.gossip.has_value()) {
      dissemination::GossipPayload payload;
      payload.sender = result.gossip->sender;
      payload.sender_coord = result.gossip->sender_coord;
      payload.proxy_rtt = result.gossip->proxy_rtt;
      payload.neighbor_digest = result.gossip->neighbor_digest;
      payload.load_reports =
          dissemination::select_reports(client.reports, report_limit);
      overhead_bytes +=
          static_cast<std::int64_t>(payload.serialized_size());
      deliveries.push_back({*result.gossip_target, std::move(payload)});
    }
  }
}

void Engine::refresh_table(Client& client, std::int64_t round) {
  client.table.rows.clear();
  const NodeId& cid = client.tracker.owner();
  for (const ProxyId& pid : sc_.topology.proxies) {
    auto rtt = client.node->predicted_proxy_rtt(pid);
    if (!rtt.has_value()) continue;
    selection::TableRow row;
    row.predicted_rtt_ms = *rtt;
    row.hops = sc_.topology.hop_count(cid, pid);
    auto it = client.reports.find(pid);
    if (it != client.reports.end()) {
      row.load_ms = proxy_load::published_estimate(it->second);
      row.freshness_round = it->second.round;
    } else {
      // Optimistic start: an unreported proxy is assumed unloaded and dated
      // from round zero, so bootstrap can pick one before any download.
      row.load_ms = 0.0;
      row.freshness_round = 0;
    }
    row.available = !client.recovery.unavailable(pid, now_s());
    client.table.rows[pid] = row;
  }
  (void)round;
}

void Engine::selection_and_issue(std::int64_t round,
                                 std::int64_t& overhead_bytes,
                                 std::vector<Pending>& to_enqueue) {
  for (auto& [cid, client] : clients_) {
    refresh_table(client, round);
    auto outcome = selection::select(client.table, sc_.strategy, round,
                                     sc_.params.staleness_rounds);
    if (outcome.switched) ++stats_.switch_count;

    // Fresh rows cancel their pending recovery timer; stale ones arm it.
    for (const auto& [pid, trow] : client.table.rows) {
      const bool stale = std::find(outcome.stale.begin(), outcome.stale.end(),
                                   pid) != outcome.stale.end();
      if (!stale) {
        client.recovery.disarm(pid);
      } else if (!client.recovery.armed(pid)) {
        const double timeout = dissemination::personalized_timeout(
            trow.predicted_rtt_ms, client.node->peers_closer_to_proxy(pid),
            sc_.params.recovery_m1_s_per_ms, sc_.params.recovery_m2_s,
            sc_.params.recovery_b_s);
        client.recovery.arm(pid, now_s(), timeout);
      }
    }

    for (const ProxyId& pid : client.recovery.due(now_s())) {
      bool already = false;
      for (const Pending& p : client.probes) {
        if (p.proxy == pid) already = true;
      }
      if (already) continue;
      const auto rtt = client.node->predicted_proxy_rtt(pid);
      const double timeout = dissemination::personalized_timeout(
          rtt.value_or(0.0), client.node->peers_closer_to_proxy(pid),
          sc_.params.recovery_m1_s_per_ms, sc_.params.recovery_m2_s,
          sc_.params.recovery_b_s);
      client.recovery.mark_probe_issued(pid, now_s(), timeout);
      Pending probe;
      probe.client = cid;
      probe.proxy = pid;
      probe.probe = true;
      probe.issued_round = round;
      probe.issued_ms = now_ms_;
      probe.predicted_rtt_ms = rtt.value_or(0.0);
      to_enqueue.push_back(std::move(probe));
      overhead_bytes += sc_.params.probe_request_bytes +
                        sc_.params.probe_response_bytes;
      ++stats_.probes_issued;
    }

    ClientRound& cr = row(round).clients[cid];
    cr.selected = outcome.selected;
    if (client.outstanding.has_value()) {
      cr.status = ClientRound::Status::kBusy;
    } else if (!outcome.selected.has_value()) {
      cr.status = ClientRound::Status::kNoProxy;
    } else {
      cr.status = ClientRound::Status::kUnresolved;
      Pending dl;
      dl.client = cid;
      dl.proxy = *outcome.selected;
      dl.issued_round = round;
      dl.issued_ms = now_ms_;
      dl.predicted_rtt_ms =
          client.node->predicted_proxy_rtt(*outcome.selected).value_or(0.0);
      to_enqueue.push_back(std::move(dl));
      ++stats_.requests_issued;
    }
  }
}

void Engine::enqueue_all(std::vector<Pending>& to_enqueue) {
  // Sample the transport leg first, then admit in arrival order so the FIFO
  // wait reflects true cross-client interleaving.
  for (Pending& p : to_enqueue) {
    Client& client = clients_.at(p.client);
    const double rtt =
        true_rtt(p.client, p.proxy, p.issued_ms / 1000.0) *
        rtt_noise_factor(client.workload_rng);
    p.arrival_ms = p.issued_ms + 1.5 * rtt;
    // Stash the sampled path RTT for the return leg.
    p.first_byte_ms = rtt;
  }
  std::sort(to_enqueue.begin(), to_enqueue.end(),
            [](const Pending& a, const Pending& b) {
              if (a.arrival_ms != b.arrival_ms) {
                return a.arrival_ms < b.arrival_ms;
              }
              if (a.client != b.client) return a.client < b.client;
              return a.probe < b.probe;
            });
  for (Pending& p : to_enqueue) {
    ProxyState& ps = proxies_.at(p.proxy);
    advance_background(ps, p.arrival_ms);
    const double service_start = std::max(p.arrival_ms, ps.server_free_ms);
    const double service_end = service_start + ps.service_ms;
    ps.server_free_ms = service_end;

    const double rtt = p.first_byte_ms;
    const double origin = origin_delay_ms(p.proxy, service_end / 1000.0);
    p.first_byte_ms = service_end + origin + 0.5 * rtt;
    if (p.probe) {
      p.completed_ms = p.first_byte_ms;
    } else {
      const double bw = std::min(
          sc_.topology.path_bandwidth_bps,
          sc_.topology.proxy.at(p.proxy).internet_bandwidth_bps);
      p.completed_ms = p.first_byte_ms +
                       1000.0 * static_cast<double>(sc_.params.download_bytes) /
                           bw;
    }

    Client& client = clients_.at(p.client);
    if (p.probe) {
      client.probes.push_back(p);
    } else {
      client.outstanding = p;
    }
  }
  to_enqueue.clear();
}

void Engine::deliver(std::vector<Delivery>& deliveries, std::int64_t round) {
  for (Delivery& d : deliveries) {
    auto it = clients_.find(d.to);
    if (it == clients_.end()) continue;
    Client& target = it->second;
    coords::CoordGossip gossip;
    gossip.sender = d.payload.sender;
    gossip.sender_coord = d.payload.sender_coord;
    gossip.proxy_rtt = d.payload.proxy_rtt;
    gossip.neighbor_digest = d.payload.neighbor_digest;
    target.node->receive_gossip(gossip, round);
    target.reports = dissemination::merge_reports(std::move(target.reports),
                                                  d.payload.load_reports);
  }
  deliveries.clear();
}

void Engine::finish_round(std::int64_t round, std::int64_t overhead_bytes) {
  RoundMetrics& r = row(round);
  r.overhead_bytes = overhead_bytes;
  stats_.protocol_bytes += overhead_bytes;

  std::vector<coords::NetworkCoordinate> coord_list;
  coords::RttMatrix truth(sc_.topology.clients.size(),
                          std::vector<double>(sc_.topology.clients.size(), 0.0));
  for (std::size_t i = 0; i < sc_.topology.clients.size(); ++i) {
    coord_list.push_back(
        clients_.at(sc_.topology.clients[i]).node->coordinate());
    for (std::size_t j = 0; j < sc_.topology.clients.size(); ++j) {
      if (i == j) continue;
      truth[i][j] = true_rtt(sc_.topology.clients[i], sc_.topology.clients[j],
                             now_s());
    }
  }
  const auto err = coords::system_error(truth, coord_list);
  r.system_error_ms = err.median_ms;
  r.system_error_defined = err.defined;

  std::map<ProxyId, std::vector<double>> published;
  for (auto& [cid, client] : clients_) {
    ClientRound& cr = r.clients[cid];
    for (const ProxyId& pid : sc_.topology.proxies) {
      const proxy_load::ProxyEstimate* est = client.tracker.find(pid);
      if (est != nullptr && est->seeded) {
        const double value = proxy_load::published_estimate(*est);
        cr.published_ms[pid] = value;
        published[pid].push_back(value);
      }
    }
  }
  for (const ProxyId& pid : sc_.topology.proxies) {
    auto it = published.find(pid);
    r.estimate_median_ms[pid] =
        it == published.end() ? -1.0 : stats::median(it->second);
  }
}

void Engine::emit_resolved(bool final_flush) {
  while (!rows_.empty()) {
    auto it = rows_.find(next_emit_);
    if (it == rows_.end()) break;
    if (!final_flush) {
      bool blocked = false;
      for (const auto& [cid, client] : clients_) {
        if (client.outstanding.has_value() &&
            client.outstanding->issued_round <= next_emit_) {
          blocked = true;
          break;
        }
      }
      if (blocked) break;
    }
    if (sink_) sink_(it->second);
    rows_.erase(it);
    ++next_emit_;
  }
}

SimStats Engine::run() {
  init();
  std::vector<Delivery> deliveries;
  std::vector<Pending> to_enqueue;
  for (std::int64_t round = 0; round < total_rounds_; ++round) {
    now_ms_ = static_cast<double>(round) * period_ms_;
    resolve_due_events(round);
    apply_penalties(round);
    std::int64_t overhead_bytes = 0;
    protocol_round(round, deliveries, overhead_bytes);
    selection_and_issue(round, overhead_bytes, to_enqueue);
    enqueue_all(to_enqueue);
    deliver(deliveries, round);
    for (auto& [cid, client] : clients_) client.node->end_round(round);
    finish_round(round, overhead_bytes);
    emit_resolved(false);
  }
  // Drain: run the clock one abort window past the end so every issued
  // request resolves as either completed or aborted.
  now_ms_ = static_cast<double>(total_rounds_) * period_ms_ +
            sc_.params.abort_cap_s * 1000.0;
  resolve_due_events(total_rounds_);
  emit_resolved(true);
  stats_.rounds = total_rounds_;
  for (const auto& [cid, client] : clients_) {
    stats_.negative_raw_clamps += client.tracker.clamp_count();
  }
  return stats_;
}

}  // namespace

SimStats simulate(const Scenario& scenario, std::uint64_t seed,
                  const MetricsSink& sink) {
  Engine engine(scenario, seed, sink);
  return engine.run();
}

}  // namespace meshprox::simnet
