#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <string>

#include "meshprox/scenario.hpp"

using namespace meshprox;
using namespace meshprox::simnet;

namespace {

const char* kPlanar = R"({
  "name": "planar",
  "topology": {
    "clients": {
      "c1": {"x": 0, "y": 0},
      "c2": {"x": 30, "y": 40}
    },
    "proxies": {
      "p1": {"x": 0, "y": 40, "capacity_rps": 20}
    },
    "rtt_scale_ms_per_unit": 2.0,
    "hop_distance_ms": 15
  }
})";

const char* kMatrix = R"({
  "name": "matrix",
  "topology": {
    "clients": ["c1", "c2"],
    "proxies": {"p1": {}},
    "rtt_ms": {
      "c1": {"c2": 12.0, "p1": 34.0},
      "c2": {"p1": 56.0}
    }
  }
})";

Scenario parsed(const char* text) { return parse_scenario(text, "test"); }

}  // namespace

TEST_CASE("positions become scaled pairwise distances") {
  Scenario s = parsed(kPlanar);
  CHECK(s.topology.clients == std::vector<NodeId>{"c1", "c2"});
  CHECK(s.topology.proxies == std::vector<ProxyId>{"p1"});
  // c1-c2: hypot(30, 40) = 50 units, scale 2 -> 100 ms.
  CHECK(s.topology.base_rtt("c1", "c2") == doctest::Approx(100.0));
  CHECK(s.topology.base_rtt("c2", "c1") == doctest::Approx(100.0));
  CHECK(s.topology.base_rtt("c1", "p1") == doctest::Approx(80.0));
  CHECK(s.topology.base_rtt("c2", "p1") == doctest::Approx(60.0));
  CHECK(s.topology.proxy.at("p1").capacity_rps == doctest::Approx(20.0));
}

TEST_CASE("hop counts derive from distance bands") {
  Scenario s = parsed(kPlanar);
  // 80 ms at 15 ms per hop: 1 + floor(80/15) = 6.
  CHECK(s.topology.hop_count("c1", "p1") == 6);
  // 60 ms -> 1 + 4 = 5.
  CHECK(s.topology.hop_count("c2", "p1") == 5);
}

TEST_CASE("explicit matrices define RTTs directly") {
  Scenario s = parsed(kMatrix);
  CHECK(s.topology.base_rtt("c1", "c2") == doctest::Approx(12.0));
  CHECK(s.topology.base_rtt("p1", "c1") == doctest::Approx(34.0));
  CHECK(s.topology.base_rtt("c2", "p1") == doctest::Approx(56.0));
  CHECK(s.topology.base_rtt("c1", "ghost") == doctest::Approx(-1.0));
}

TEST_CASE("explicit hop tables override the distance bands") {
  const char* text = R"({
    "topology": {
      "clients": ["c1"],
      "proxies": {"p1": {}},
      "rtt_ms": {"c1": {"p1": 80.0}},
      "hops": {"c1": {"p1": 2}}
    }
  })";
  Scenario s = parsed(text);
  CHECK(s.topology.hop_count("c1", "p1") == 2);
  // Unknown pairs default to one hop.
  CHECK(s.topology.hop_count("c1", "p9") == 1);
}

TEST_CASE("defaults fill unspecified knobs") {
  Scenario s = parsed(kMatrix);
  CHECK(s.duration_s == doctest::Approx(1600.0));
  CHECK(s.seed == 1);
  CHECK(s.strategy == selection::Strategy::kMinLoad);
  CHECK(s.params.round_period_s == doctest::Approx(10.0));
  CHECK(s.params.alpha == doctest::Approx(0.05));
  CHECK(s.params.vivaldi.pings_per_round == 8);
  CHECK(s.topology.rtt_noise == doctest::Approx(0.05));
}

TEST_CASE("fault entries parse all kinds and magnitude spellings") {
  const char* text = R"({
    "topology": {
      "clients": ["c1"],
      "proxies": {"p1": {}},
      "rtt_ms": {"c1": {"p1": 10.0}}
    },
    "faults": [
      {"kind": "proxy_load_burst", "target": "p1", "start_s": 50, "end_s": 350, "rate_rps": 40},
      {"kind": "internet_delay", "target": "p1", "start_s": 550, "end_s": 850, "extra_ms": 300},
      {"kind": "slow_path", "target": "c1|p1", "start_s": 1050, "end_s": 1350, "magnitude": 200}
    ]
  })";
  Scenario s = parsed(text);
  REQUIRE(s.faults.size() == 3);
  CHECK(s.faults[0].kind == FaultEvent::Kind::kProxyLoadBurst);
  CHECK(s.faults[0].magnitude == doctest::Approx(40.0));
  CHECK(s.faults[1].kind == FaultEvent::Kind::kInternetDelay);
  CHECK(s.faults[1].magnitude == doctest::Approx(300.0));
  CHECK(s.faults[2].kind == FaultEvent::Kind::kSlowPath);
  CHECK(s.faults[2].target == "c1|p1");
  CHECK(s.faults[0].active(50.0));
  CHECK(s.faults[0].active(349.9));
  CHECK_FALSE(s.faults[0].active(350.0));
  CHECK_FALSE(s.faults[0].active(49.9));
}

TEST_CASE("malformed documents are rejected with context") {
  CHECK_THROWS_AS(parsed("{nope"), ScenarioError);
  CHECK_THROWS_AS(parsed("[]"), ScenarioError);
  CHECK_THROWS_AS(parsed("{\"name\": \"x\"}"), ScenarioError);
  CHECK_THROWS_AS(
      parsed(R"({"strategy": "other", "topology": {"clients": ["c"], "proxies": {}}})"),
      ScenarioError);
  CHECK_THROWS_AS(parsed(R"({
    "topology": {"clients": ["c1"], "proxies": {"p1": {}},
                 "rtt_ms": {"c1": {"p1": 10.0}}},
    "faults": [{"kind": "meteor", "target": "p1", "start_s": 0, "end_s": 1, "magnitude": 1}]
  })"),
                  ScenarioError);
  CHECK_THROWS_AS(parsed(R"({
    "topology": {"clients": ["c1"], "proxies": {"p1": {}},
                 "rtt_ms": {"c1": {"p1": 10.0}}},
    "faults": [{"kind": "slow_path", "target": "c1", "start_s": 0, "end_s": 1}]
  })"),
                  ScenarioError);
}

TEST_CASE("validation accepts the shipped fixture shape") {
  Scenario s = parsed(kPlanar);
  CHECK(validate_scenario(s).empty());
  Scenario m = parsed(kMatrix);
  CHECK(validate_scenario(m).empty());
}

TEST_CASE("validation flags structural violations") {
  auto violations_contain = [](const std::vector<std::string>& v,
                               const std::string& needle) {
    for (const auto& line : v) {
      if (line.find(needle) != std::string::npos) return true;
    }
    return false;
  };

  Scenario s = parsed(kMatrix);
  s.topology.clients.push_back("p1");  // id collision with a proxy
  auto v = validate_scenario(s);
  CHECK(violations_contain(v, "duplicate endpoint id"));

  s = parsed(kMatrix);
  s.topology.clients.push_back("bad id");
  v = validate_scenario(s);
  CHECK(violations_contain(v, "invalid endpoint id"));
  CHECK(violations_contain(v, "no RTT"));

  s = parsed(kMatrix);
  s.topology.rtt_ms["c1"]["c2"] = 0.0;
  v = validate_scenario(s);
  CHECK(violations_contain(v, "zero RTT"));

  s = parsed(kMatrix);
  s.topology.proxy["p1"].capacity_rps = 0.0;
  CHECK(violations_contain(validate_scenario(s), "capacity_rps"));

  s = parsed(kMatrix);
  s.topology.rtt_noise = 1.0;
  CHECK(violations_contain(validate_scenario(s), "rtt_noise"));

  s = parsed(kMatrix);
  s.params.alpha = 0.0;
  CHECK(violations_contain(validate_scenario(s), "alpha"));

  s = parsed(kMatrix);
  s.params.staleness_rounds = 0;
  CHECK(violations_contain(validate_scenario(s), "staleness_rounds"));

  s = parsed(kMatrix);
  s.duration_s = 0.0;
  CHECK(violations_contain(validate_scenario(s), "duration_s"));

  s = parsed(kMatrix);
  FaultEvent f;
  f.kind = FaultEvent::Kind::kProxyLoadBurst;
  f.target = "c1";  // not a proxy
  f.start_s = 10.0;
  f.end_s = 5.0;  // inverted window
  f.magnitude = 40.0;
  s.faults.push_back(f);
  v = validate_scenario(s);
  CHECK(violations_contain(v, "end_s must exceed start_s"));
  CHECK(violations_contain(v, "target must be a proxy"));

  s = parsed(kMatrix);
  f = FaultEvent{};
  f.kind = FaultEvent::Kind::kSlowPath;
  f.target = "c1|ghost";
  f.start_s = 0.0;
  f.end_s = 10.0;
  f.magnitude = 100.0;
  s.faults.push_back(f);
  CHECK(violations_contain(validate_scenario(s), "pair endpoints"));
}

TEST_CASE("hashes ignore strategy and seed but track the experiment") {
  Scenario a = parsed(kPlanar);
  Scenario b = parsed(kPlanar);
  b.strategy = selection::Strategy::kMinHop;
  b.seed = 999;
  CHECK(scenario_hash(a) == scenario_hash(b));
  CHECK(scenario_hash_hex(a) == scenario_hash_hex(b));

  Scenario c = parsed(kPlanar);
  c.duration_s += 1.0;
  CHECK(scenario_hash(a) != scenario_hash(c));

  Scenario d = parsed(kPlanar);
  d.topology.rtt_ms["c1"]["c2"] += 0.5;
  CHECK(scenario_hash(a) != scenario_hash(d));

  Scenario e = parsed(kPlanar);
  e.params.hysteresis_ms += 1.0;
  CHECK(scenario_hash(a) != scenario_hash(e));

  CHECK(scenario_hash_hex(a).size() == 16);
  CHECK(scenario_hash_hex(a).find_first_not_of("0123456789abcdef") ==
        std::string::npos);
}

TEST_CASE("canonical text is independent of JSON key order") {
  const char* reordered = R"({
  "topology": {
    "rtt_scale_ms_per_unit": 2.0,
    "hop_distance_ms": 15,
    "proxies": {
      "p1": {"capacity_rps": 20, "y": 40, "x": 0}
    },
    "clients": {
      "c2": {"y": 40, "x": 30},
      "c1": {"x": 0, "y": 0}
    }
  },
  "name": "planar"
})";
  CHECK(canonical_scenario_text(parsed(kPlanar)) ==
        canonical_scenario_text(parsed(reordered)));
}

TEST_CASE("files load with the stem as the fallback name") {
  const auto dir = std::filesystem::temp_directory_path() / "meshprox_sc_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "west_coast.json";
  {
    std::ofstream out(path);
    out << R"({"topology": {"clients": ["c1"], "proxies": {"p1": {}},
               "rtt_ms": {"c1": {"p1": 10.0}}}})";
  }
  Scenario s = load_scenario(path);
  CHECK(s.name == "west_coast");
  CHECK_THROWS_AS(load_scenario(dir / "missing.json"), ScenarioError);
  std::filesystem::remove_all(dir);
}
