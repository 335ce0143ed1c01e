#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "meshprox/proxy_load.hpp"
#include "meshprox/rng.hpp"
#include "meshprox/stats.hpp"

using namespace meshprox;
using namespace meshprox::proxy_load;

namespace {

TtfbSample sample(double ttfb, double mesh, std::int64_t round = 0) {
  TtfbSample s;
  s.proxy = "p";
  s.ttfb_ms = ttfb;
  s.mesh_rtt_ms = mesh;
  s.round = round;
  return s;
}

}  // namespace

TEST_CASE("raw latency subtracts both mesh round trips") {
  CHECK(raw_proxy_latency(sample(500.0, 200.0)) == doctest::Approx(100.0));
  CHECK(raw_proxy_latency(sample(80.0, 40.0)) == doctest::Approx(0.0));
}

TEST_CASE("raw latency clamps at zero and counts only true undershoots") {
  std::int64_t clamps = 0;
  CHECK(raw_proxy_latency(sample(60.0, 40.0), &clamps) == doctest::Approx(0.0));
  CHECK(clamps == 1);
  // Exactly zero is not an undershoot.
  CHECK(raw_proxy_latency(sample(80.0, 40.0), &clamps) == doctest::Approx(0.0));
  CHECK(clamps == 1);
  CHECK(raw_proxy_latency(sample(500.0, 200.0), &clamps) ==
        doctest::Approx(100.0));
  CHECK(clamps == 1);
}

TEST_CASE("first confirmed sample seeds the chain directly") {
  ProxyEstimate est;
  est.proxy = "p";
  est = ema_update(est, 240.0, 0.05, 3);
  CHECK(est.seeded);
  CHECK(est.ema_ms == doctest::Approx(240.0));
  CHECK(est.round == 3);
  CHECK(published_estimate(est) == doctest::Approx(240.0));
}

TEST_CASE("confirmed chain blends at the configured rate") {
  ProxyEstimate est;
  est = ema_update(est, 100.0, 0.05, 0);
  est = ema_update(est, 200.0, 0.05, 1);
  CHECK(est.ema_ms == doctest::Approx(105.0));
  CHECK(est.last_ttfb_ms == doctest::Approx(200.0));
}

TEST_CASE("alpha of one reproduces the raw series exactly") {
  std::mt19937_64 rng = make_stream(3, "alpha1");
  ProxyEstimate est;
  for (int i = 0; i < 1000; ++i) {
    const double raw = uniform_real(rng, 0.0, 2000.0);
    est = ema_update(est, raw, 1.0, i);
    CHECK(est.ema_ms == doctest::Approx(raw));
    CHECK(published_estimate(est) == doctest::Approx(raw));
  }
}

TEST_CASE("constant zero input decays the chain geometrically") {
  ProxyEstimate est;
  est = ema_update(est, 1000.0, 0.1, 0);
  for (int k = 1; k <= 20; ++k) {
    est = ema_update(est, 0.0, 0.1, k);
    CHECK(est.ema_ms == doctest::Approx(1000.0 * std::pow(0.9, k)));
  }
}

TEST_CASE("penalty ticks follow the worst-wait reference") {
  ProxyEstimate est;
  est = ema_update(est, 500.0, 0.05, 0);
  CHECK(est.last_ttfb_ms == doctest::Approx(500.0));

  est = penalty_tick(est, 1000.0, 0.05, 1);
  CHECK(est.pending_active);
  CHECK(est.last_ttfb_ms == doctest::Approx(1000.0));
  CHECK(est.ema_pending_ms == doctest::Approx(525.0));
  CHECK(published_estimate(est) == doctest::Approx(525.0));

  est = penalty_tick(est, 2000.0, 0.05, 2);
  CHECK(est.last_ttfb_ms == doctest::Approx(2000.0));
  CHECK(est.ema_pending_ms == doctest::Approx(598.75));
  CHECK(published_estimate(est) == doctest::Approx(598.75));

  // Confirmed chain is untouched throughout.
  CHECK(est.ema_ms == doctest::Approx(500.0));
}

TEST_CASE("short waits blend toward the existing reference without lowering it") {
  ProxyEstimate est;
  est = ema_update(est, 500.0, 0.05, 0);
  est.last_ttfb_ms = 800.0;
  est = penalty_tick(est, 300.0, 0.05, 1);
  CHECK(est.last_ttfb_ms == doctest::Approx(800.0));
  CHECK(est.ema_pending_ms == doctest::Approx(0.05 * 800.0 + 0.95 * 500.0));
}

TEST_CASE("completion resumes the confirmed chain as if penalties never happened") {
  ProxyEstimate est;
  est = ema_update(est, 500.0, 0.05, 0);
  est = penalty_tick(est, 1000.0, 0.05, 1);
  est = penalty_tick(est, 2000.0, 0.05, 2);
  est = ema_update(est, 700.0, 0.05, 3);
  CHECK_FALSE(est.pending_active);
  CHECK(est.ema_ms == doctest::Approx(0.05 * 700.0 + 0.95 * 500.0));
  CHECK(published_estimate(est) == doctest::Approx(510.0));
}

TEST_CASE("pending estimate never decreases while waits keep growing") {
  // Precondition for monotonicity: the starting state was built from
  // observations bounded by the first wait, and waits grow by a full
  // period each tick.
  std::mt19937_64 rng = make_stream(5, "monotone");
  const double period = 10000.0;
  for (int trial = 0; trial < 1000; ++trial) {
    ProxyEstimate est;
    est = ema_update(est, uniform_real(rng, 0.0, period), 0.05, 0);
    double prev = published_estimate(est);
    for (int k = 1; k <= 8; ++k) {
      est = penalty_tick(est, k * period, 0.05, k);
      const double cur = published_estimate(est);
      CHECK(cur >= prev - 1e-9);
      prev = cur;
    }
  }
}

TEST_CASE("step load raises the published estimate and removal decays it") {
  ProxyEstimate est;
  const double mesh = 40.0;
  auto feed = [&](double wait, int round) {
    est = ema_update(est, raw_proxy_latency(sample(2 * mesh + wait, mesh)), 0.05,
                     round);
  };
  int round = 0;
  for (int i = 0; i < 40; ++i) feed(100.0, round++);
  const double plateau = published_estimate(est);
  CHECK(plateau == doctest::Approx(100.0).epsilon(0.01));

  // Step up: strictly increasing responses from the first loaded sample.
  std::vector<double> rising;
  for (int i = 0; i < 3; ++i) {
    feed(400.0, round++);
    rising.push_back(published_estimate(est));
  }
  CHECK(rising[0] > plateau);
  CHECK(rising[1] > rising[0]);
  CHECK(rising[2] > rising[1]);

  // Step removed: decays back toward the base level.
  for (int i = 0; i < 60; ++i) feed(100.0, round++);
  CHECK(published_estimate(est) < rising[0]);
  CHECK(published_estimate(est) == doctest::Approx(100.0).epsilon(0.05));
}

TEST_CASE("two observers of one proxy rank its load history the same way") {
  // Same queue trace seen through different mesh distances and jitter:
  // the recovered estimates must agree in rank order.
  std::mt19937_64 rng = make_stream(9, "observers");
  ProxyEstimate a;
  ProxyEstimate b;
  std::vector<double> series_a;
  std::vector<double> series_b;
  double wait = 150.0;
  for (int i = 0; i < 200; ++i) {
    wait = std::max(0.0, wait + uniform_real(rng, -40.0, 40.0));
    const double jitter_a = uniform_real(rng, -5.0, 5.0);
    const double jitter_b = uniform_real(rng, -5.0, 5.0);
    a = ema_update(a, raw_proxy_latency(sample(2 * 30.0 + wait + jitter_a, 30.0)),
                   0.05, i);
    b = ema_update(b, raw_proxy_latency(sample(2 * 90.0 + wait + jitter_b, 90.0)),
                   0.05, i);
    series_a.push_back(published_estimate(a));
    series_b.push_back(published_estimate(b));
  }
  CHECK(stats::spearman(series_a, series_b) > 0.95);
}

TEST_CASE("tracker keeps per-proxy state and counts clamps") {
  LoadTracker tracker("client_1");
  tracker.on_sample({"p1", 500.0, 200.0, 0}, 0.05);
  tracker.on_sample({"p2", 60.0, 40.0, 0}, 0.05);
  REQUIRE(tracker.find("p1") != nullptr);
  REQUIRE(tracker.find("p2") != nullptr);
  CHECK(tracker.find("p1")->ema_ms == doctest::Approx(100.0));
  CHECK(tracker.find("p2")->ema_ms == doctest::Approx(0.0));
  CHECK(tracker.find("p3") == nullptr);
  CHECK(tracker.clamp_count() == 1);
  CHECK(tracker.find("p1")->origin == "client_1");
}

TEST_CASE("tracker snapshots advertise the published value with pending state cleared") {
  LoadTracker tracker("client_1");
  tracker.on_sample({"p1", 500.0, 200.0, 0}, 0.05);
  tracker.on_waiting("p1", 1000.0, 0.05, 1);
  REQUIRE(tracker.find("p1")->pending_active);
  const auto snap = tracker.snapshot();
  REQUIRE(snap.size() == 1);
  CHECK(snap[0].ema_ms ==
        doctest::Approx(published_estimate(*tracker.find("p1"))));
  CHECK_FALSE(snap[0].pending_active);
  // Live state unaffected by snapshotting.
  CHECK(tracker.find("p1")->pending_active);
}

TEST_CASE("waiting with no prior sample starts a penalty-only record") {
  // A wait is evidence of load even before any completion: the record
  // bootstraps from a zero base and rises with the endured wait.
  LoadTracker tracker("client_1");
  tracker.on_waiting("p1", 1000.0, 0.05, 1);
  const ProxyEstimate* est = tracker.find("p1");
  REQUIRE(est != nullptr);
  CHECK_FALSE(est->seeded);
  CHECK(est->pending_active);
  CHECK(published_estimate(*est) == doctest::Approx(50.0));
  tracker.on_waiting("p1", 2000.0, 0.05, 2);
  CHECK(published_estimate(*tracker.find("p1")) ==
        doctest::Approx(0.05 * 2000.0 + 0.95 * 50.0));
}
