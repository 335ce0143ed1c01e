#include "meshprox/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "meshprox/rng.hpp"

namespace meshprox::simnet {

using nlohmann::json;

bool Topology::has_endpoint(const std::string& id) const {
  return std::find(clients.begin(), clients.end(), id) != clients.end() ||
         std::find(proxies.begin(), proxies.end(), id) != proxies.end();
}

double Topology::base_rtt(const std::string& a, const std::string& b) const {
  auto ia = rtt_ms.find(a);
  if (ia != rtt_ms.end()) {
    auto ib = ia->second.find(b);
    if (ib != ia->second.end()) return ib->second;
  }
  auto ja = rtt_ms.find(b);
  if (ja != rtt_ms.end()) {
    auto jb = ja->second.find(a);
    if (jb != ja->second.end()) return jb->second;
  }
  return -1.0;
}

int Topology::hop_count(const NodeId& client, const ProxyId& proxy) const {
  auto it = hops.find(client);
  if (it == hops.end()) return 1;
  auto jt = it->second.find(proxy);
  return jt == it->second.end() ? 1 : jt->second;
}

std::string fault_kind_name(FaultEvent::Kind kind) {
  switch (kind) {
    case FaultEvent::Kind::kProxyLoadBurst:
      return "proxy_load_burst";
    case FaultEvent::Kind::kInternetDelay:
      return "internet_delay";
    case FaultEvent::Kind::kSlowPath:
      return "slow_path";
  }
  return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ScenarioError(origin + ": " + message);
}

double require_number(const json& j, const char* key,
                      const std::string& origin, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    fail(origin, where + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

std::optional<FaultEvent::Kind> parse_fault_kind(const std::string& name) {
  if (name == "proxy_load_burst") return FaultEvent::Kind::kProxyLoadBurst;
  if (name == "internet_delay") return FaultEvent::Kind::kInternetDelay;
  if (name == "slow_path") return FaultEvent::Kind::kSlowPath;
  return std::nullopt;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      return false;
    }
  }
  return true;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

void store_rtt(Topology& topo, const std::string& a, const std::string& b,
               double value) {
  const std::string& lo = a < b ? a : b;
  const std::string& hi = a < b ? b : a;
  topo.rtt_ms[lo][hi] = value;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text,
                        const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(origin, e.what());
  }
  if (!j.is_object()) fail(origin, "top level must be an object");

  Scenario s;
  s.name = j.value("name", std::string{});
  s.duration_s = j.value("duration_s", s.duration_s);
  s.seed = j.value("seed", s.seed);
  if (j.contains("strategy")) {
    const std::string name = j.at("strategy").get<std::string>();
    auto strat = selection::parse_strategy(name);
    if (!strat) fail(origin, "unknown strategy '" + name + "'");
    s.strategy = *strat;
  }

  if (!j.contains("topology") || !j.at("topology").is_object()) {
    fail(origin, "missing 'topology' object");
  }
  const json& topo_j = j.at("topology");
  Topology& topo = s.topology;
  topo.path_bandwidth_bps =
      topo_j.value("path_bandwidth_bps", topo.path_bandwidth_bps);
  topo.rtt_noise = topo_j.value("rtt_noise", topo.rtt_noise);
  const double rtt_scale = topo_j.value("rtt_scale_ms_per_unit", 1.0);
  const double hop_distance_ms = topo_j.value("hop_distance_ms", 15.0);

  std::map<std::string, Point> positions;

  if (!topo_j.contains("clients")) fail(origin, "topology: missing 'clients'");
  const json& clients_j = topo_j.at("clients");
  if (clients_j.is_array()) {
    for (const auto& entry : clients_j) {
      topo.clients.push_back(entry.get<std::string>());
    }
  } else if (clients_j.is_object()) {
    for (const auto& [id, val] : clients_j.items()) {
      topo.clients.push_back(id);
      if (val.is_object() && val.contains("x")) {
        positions[id] = {require_number(val, "x", origin, "client " + id),
                         require_number(val, "y", origin, "client " + id)};
      }
    }
  } else {
    fail(origin, "topology.clients must be an array or object");
  }

  if (!topo_j.contains("proxies") || !topo_j.at("proxies").is_object()) {
    fail(origin, "topology: missing 'proxies' object");
  }
  for (const auto& [id, val] : topo_j.at("proxies").items()) {
    topo.proxies.push_back(id);
    ProxyProfile profile;
    if (val.is_object()) {
      profile.capacity_rps = val.value("capacity_rps", profile.capacity_rps);
      profile.internet_delay_ms =
          val.value("internet_delay_ms", profile.internet_delay_ms);
      profile.internet_bandwidth_bps =
          val.value("internet_bandwidth_bps", profile.internet_bandwidth_bps);
      if (val.contains("x")) {
        positions[id] = {require_number(val, "x", origin, "proxy " + id),
                         require_number(val, "y", origin, "proxy " + id)};
      }
    }
    topo.proxy[id] = profile;
  }

  std::sort(topo.clients.begin(), topo.clients.end());
  std::sort(topo.proxies.begin(), topo.proxies.end());

  std::vector<std::string> endpoints = topo.clients;
  endpoints.insert(endpoints.end(), topo.proxies.begin(), topo.proxies.end());

  // Distances from layout positions first, explicit entries override below.
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    for (std::size_t k = i + 1; k < endpoints.size(); ++k) {
      auto pa = positions.find(endpoints[i]);
      auto pb = positions.find(endpoints[k]);
      if (pa == positions.end() || pb == positions.end()) continue;
      const double dx = pa->second.x - pb->second.x;
      const double dy = pa->second.y - pb->second.y;
      store_rtt(topo, endpoints[i], endpoints[k],
                rtt_scale * std::hypot(dx, dy));
    }
  }
  if (topo_j.contains("rtt_ms")) {
    for (const auto& [a, row] : topo_j.at("rtt_ms").items()) {
      if (!row.is_object()) fail(origin, "topology.rtt_ms rows must be objects");
      for (const auto& [b, val] : row.items()) {
        store_rtt(topo, a, b, val.get<double>());
      }
    }
  }

  for (const NodeId& client : topo.clients) {
    for (const ProxyId& proxy : topo.proxies) {
      const double rtt = topo.base_rtt(client, proxy);
      if (rtt >= 0.0 && hop_distance_ms > 0.0) {
        topo.hops[client][proxy] =
            1 + static_cast<int>(std::floor(rtt / hop_distance_ms));
      }
    }
  }
  if (topo_j.contains("hops")) {
    for (const auto& [client, row] : topo_j.at("hops").items()) {
      for (const auto& [proxy, val] : row.items()) {
        topo.hops[client][proxy] = val.get<int>();
      }
    }
  }

  if (j.contains("params")) {
    const json& p = j.at("params");
    ProtocolParams& params = s.params;
    coords::VivaldiConfig& v = params.vivaldi;
    v.dimensions = p.value("dimensions", v.dimensions);
    v.step_constant = p.value("step_constant", v.step_constant);
    v.error_constant = p.value("error_constant", v.error_constant);
    v.error_cap = p.value("error_cap", v.error_cap);
    v.init_offset = p.value("init_offset", v.init_offset);
    v.pings_per_round = p.value("pings_per_round", v.pings_per_round);
    v.closest_slots = p.value("closest_slots", v.closest_slots);
    v.random_slots = p.value("random_slots", v.random_slots);
    v.evict_after_failures =
        p.value("evict_after_failures", v.evict_after_failures);
    if (p.value("ping_aggregate", std::string{"min"}) == "median") {
      v.aggregate = coords::PingAggregate::kMedian;
    }
    params.round_period_s = p.value("round_period_s", params.round_period_s);
    params.alpha = p.value("alpha", params.alpha);
    params.hysteresis_ms = p.value("hysteresis_ms", params.hysteresis_ms);
    params.staleness_rounds =
        p.value("staleness_rounds", params.staleness_rounds);
    params.recovery_m1_s_per_ms =
        p.value("recovery_m1_s_per_ms", params.recovery_m1_s_per_ms);
    params.recovery_m2_s = p.value("recovery_m2_s", params.recovery_m2_s);
    params.recovery_b_s = p.value("recovery_b_s", params.recovery_b_s);
    params.ping_bytes = p.value("ping_bytes", params.ping_bytes);
    params.probe_request_bytes =
        p.value("probe_request_bytes", params.probe_request_bytes);
    params.probe_response_bytes =
        p.value("probe_response_bytes", params.probe_response_bytes);
    params.download_bytes = p.value("download_bytes", params.download_bytes);
    params.abort_cap_s = p.value("abort_cap_s", params.abort_cap_s);
  }

  if (j.contains("faults")) {
    if (!j.at("faults").is_array()) fail(origin, "'faults' must be an array");
    for (const auto& f : j.at("faults")) {
      FaultEvent event;
      const std::string kind_name = f.value("kind", std::string{});
      auto kind = parse_fault_kind(kind_name);
      if (!kind) fail(origin, "unknown fault kind '" + kind_name + "'");
      event.kind = *kind;
      event.target = f.value("target", std::string{});
      event.start_s = require_number(f, "start_s", origin, "fault");
      event.end_s = require_number(f, "end_s", origin, "fault");
      if (f.contains("magnitude")) {
        event.magnitude = f.at("magnitude").get<double>();
      } else if (f.contains("rate_rps")) {
        event.magnitude = f.at("rate_rps").get<double>();
      } else if (f.contains("extra_ms")) {
        event.magnitude = f.at("extra_ms").get<double>();
      } else {
        fail(origin, "fault: missing magnitude (rate_rps/extra_ms)");
      }
      s.faults.push_back(std::move(event));
    }
  }

  if (s.name.empty()) s.name = "scenario";
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError(path.string() + ": cannot open file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Scenario s = parse_scenario(buffer.str(), path.string());
  if (s.name == "scenario") s.name = path.stem().string();
  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  const Topology& topo = s.topology;

  if (topo.clients.empty()) out.push_back("topology: no clients");
  if (topo.proxies.empty()) out.push_back("topology: no proxies");

  std::vector<std::string> endpoints = topo.clients;
  endpoints.insert(endpoints.end(), topo.proxies.begin(), topo.proxies.end());
  {
    std::vector<std::string> sorted = endpoints;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      out.push_back("topology: duplicate endpoint id");
    }
  }
  for (const auto& id : endpoints) {
    if (!valid_id(id)) {
      out.push_back("topology: invalid endpoint id '" + id + "'");
    }
  }

  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    for (std::size_t k = i + 1; k < endpoints.size(); ++k) {
      const double rtt = topo.base_rtt(endpoints[i], endpoints[k]);
      if (rtt < 0.0) {
        out.push_back("topology: no RTT between '" + endpoints[i] + "' and '" +
                      endpoints[k] + "'");
      } else if (rtt == 0.0) {
        out.push_back("topology: zero RTT between '" + endpoints[i] +
                      "' and '" + endpoints[k] + "'");
      }
    }
  }

  for (const auto& [id, profile] : topo.proxy) {
    if (profile.capacity_rps <= 0.0) {
      out.push_back("proxy " + id + ": capacity_rps must be positive");
    }
    if (profile.internet_delay_ms < 0.0) {
      out.push_back("proxy " + id + ": internet_delay_ms must be >= 0");
    }
    if (profile.internet_bandwidth_bps <= 0.0) {
      out.push_back("proxy " + id + ": internet_bandwidth_bps must be positive");
    }
  }
  if (topo.path_bandwidth_bps <= 0.0) {
    out.push_back("topology: path_bandwidth_bps must be positive");
  }
  if (topo.rtt_noise < 0.0 || topo.rtt_noise >= 1.0) {
    out.push_back("topology: rtt_noise must be in [0, 1)");
  }

  const ProtocolParams& p = s.params;
  if (p.round_period_s <= 0.0) out.push_back("params: round_period_s must be positive");
  if (p.alpha <= 0.0 || p.alpha > 1.0) out.push_back("params: alpha must be in (0, 1]");
  if (p.hysteresis_ms < 0.0) out.push_back("params: hysteresis_ms must be >= 0");
  if (p.staleness_rounds < 1) out.push_back("params: staleness_rounds must be >= 1");
  if (p.recovery_b_s <= 0.0) out.push_back("params: recovery_b_s must be positive");
  if (p.download_bytes <= 0) out.push_back("params: download_bytes must be positive");
  if (p.abort_cap_s <= 0.0) out.push_back("params: abort_cap_s must be positive");
  if (p.ping_bytes <= 0) out.push_back("params: ping_bytes must be positive");
  const coords::VivaldiConfig& v = p.vivaldi;
  if (v.dimensions < 1) out.push_back("params: dimensions must be >= 1");
  if (v.pings_per_round < 1) out.push_back("params: pings_per_round must be >= 1");
  if (v.closest_slots + v.random_slots < 1) {
    out.push_back("params: neighbor capacity must be >= 1");
  }
  if (v.step_constant <= 0.0 || v.step_constant > 1.0) {
    out.push_back("params: step_constant must be in (0, 1]");
  }
  if (v.error_constant <= 0.0 || v.error_constant > 1.0) {
    out.push_back("params: error_constant must be in (0, 1]");
  }

  if (s.duration_s <= 0.0) out.push_back("duration_s must be positive");

  for (const FaultEvent& f : s.faults) {
    const std::string label = "fault " + fault_kind_name(f.kind) + " on '" +
                              f.target + "'";
    if (f.end_s <= f.start_s) out.push_back(label + ": end_s must exceed start_s");
    if (f.magnitude <= 0.0) out.push_back(label + ": magnitude must be positive");
    switch (f.kind) {
      case FaultEvent::Kind::kProxyLoadBurst:
      case FaultEvent::Kind::kInternetDelay:
        if (topo.proxy.count(f.target) == 0) {
          out.push_back(label + ": target must be a proxy");
        }
        break;
      case FaultEvent::Kind::kSlowPath: {
        const auto bar = f.target.find('|');
        if (bar == std::string::npos) {
          if (!topo.has_endpoint(f.target)) {
            out.push_back(label + ": target endpoint not in topology");
          }
        } else {
          const std::string a = f.target.substr(0, bar);
          const std::string b = f.target.substr(bar + 1);
          if (!topo.has_endpoint(a) || !topo.has_endpoint(b)) {
            out.push_back(label + ": pair endpoints not in topology");
          }
        }
        break;
      }
    }
  }
  return out;
}

std::string canonical_scenario_text(const Scenario& s) {
  json c;
  c["name"] = s.name;
  c["duration_s"] = s.duration_s;

  json topo;
  topo["clients"] = s.topology.clients;
  json proxies;
  for (const auto& [id, profile] : s.topology.proxy) {
    proxies[id] = {{"capacity_rps", profile.capacity_rps},
                   {"internet_delay_ms", profile.internet_delay_ms},
                   {"internet_bandwidth_bps", profile.internet_bandwidth_bps}};
  }
  topo["proxies"] = std::move(proxies);
  topo["rtt_ms"] = s.topology.rtt_ms;
  topo["hops"] = s.topology.hops;
  topo["path_bandwidth_bps"] = s.topology.path_bandwidth_bps;
  topo["rtt_noise"] = s.topology.rtt_noise;
  c["topology"] = std::move(topo);

  const ProtocolParams& p = s.params;
  const coords::VivaldiConfig& v = p.vivaldi;
  c["params"] = {
      {"dimensions", v.dimensions},
      {"step_constant", v.step_constant},
      {"error_constant", v.error_constant},
      {"error_cap", v.error_cap},
      {"init_offset", v.init_offset},
      {"pings_per_round", v.pings_per_round},
      {"closest_slots", v.closest_slots},
      {"random_slots", v.random_slots},
      {"evict_after_failures", v.evict_after_failures},
      {"ping_aggregate",
       v.aggregate == coords::PingAggregate::kMin ? "min" : "median"},
      {"round_period_s", p.round_period_s},
      {"alpha", p.alpha},
      {"hysteresis_ms", p.hysteresis_ms},
      {"staleness_rounds", p.staleness_rounds},
      {"recovery_m1_s_per_ms", p.recovery_m1_s_per_ms},
      {"recovery_m2_s", p.recovery_m2_s},
      {"recovery_b_s", p.recovery_b_s},
      {"ping_bytes", p.ping_bytes},
      {"probe_request_bytes", p.probe_request_bytes},
      {"probe_response_bytes", p.probe_response_bytes},
      {"download_bytes", p.download_bytes},
      {"abort_cap_s", p.abort_cap_s},
  };

  std::vector<FaultEvent> faults = s.faults;
  std::sort(faults.begin(), faults.end(),
            [](const FaultEvent& a, const FaultEvent& b) {
              if (a.start_s != b.start_s) return a.start_s < b.start_s;
              const std::string ka = fault_kind_name(a.kind);
              const std::string kb = fault_kind_name(b.kind);
              if (ka != kb) return ka < kb;
              return a.target < b.target;
            });
  json fault_list = json::array();
  for (const FaultEvent& f : faults) {
    fault_list.push_back({{"kind", fault_kind_name(f.kind)},
                          {"target", f.target},
                          {"start_s", f.start_s},
                          {"end_s", f.end_s},
                          {"magnitude", f.magnitude}});
  }
  c["faults"] = std::move(fault_list);
  return c.dump();
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  return fnv1a_64(canonical_scenario_text(scenario));
}

std::string scenario_hash_hex(const Scenario& scenario) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(scenario_hash(scenario)));
  return std::string(buf);
}

}  // namespace meshprox::simnet
