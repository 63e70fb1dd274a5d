#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "swarmsim/netsim.hpp"

using namespace swarmsim;

TEST_CASE("events at identical fire times run in insertion order") {
  VirtualClock clock;
  EventQueue q;
  std::vector<int> order;
  q.schedule(clock, 100, "a", "", [&] { order.push_back(1); });
  q.schedule(clock, 100, "b", "", [&] { order.push_back(2); });
  q.schedule(clock, 50, "c", "", [&] { order.push_back(0); });
  while (q.step(clock)) {
  }
  CHECK(order == std::vector<int>{0, 1, 2});
  CHECK(clock.now_us == 100);
}

TEST_CASE("scheduling in the past throws; at now fires before later events") {
  VirtualClock clock;
  EventQueue q;
  std::vector<int> order;
  q.schedule(clock, 10, "later", "", [&] { order.push_back(2); });
  q.step(clock);  // processes the event, clock now at 10
  CHECK(clock.now_us == 10);
  CHECK(order == std::vector<int>{2});
  q.schedule(clock, 20, "tail", "", [&] { order.push_back(5); });
  q.schedule(clock, 10, "now", "", [&] { order.push_back(3); });
  CHECK_THROWS_AS(q.schedule(clock, 9, "past", "", nullptr), SimError);
  while (q.step(clock)) {
  }
  CHECK(order == std::vector<int>{2, 3, 5});
}

TEST_CASE("an event scheduling an earlier-than-next event runs it next") {
  // Oracle: the processed order must equal a stable sort of all events by
  // (fire_at, seq).
  VirtualClock clock;
  EventQueue q;
  std::vector<std::pair<Micros, std::uint64_t>> processed;
  std::vector<std::pair<Micros, std::uint64_t>> scheduled;

  auto track = [&](Micros at, std::uint64_t seq) {
    scheduled.emplace_back(at, seq);
  };

  const auto s0 = q.schedule(clock, 100, "outer", "", [&] {
    const auto inner = q.schedule(clock, 150, "inner", "", nullptr);
    track(150, inner);
  });
  track(100, s0);
  const auto s1 = q.schedule(clock, 200, "later", "", nullptr);
  track(200, s1);

  while (true) {
    auto done = q.step(clock);
    if (!done) break;
    processed.emplace_back(done->time_us, done->seq);
  }

  std::vector<std::pair<Micros, std::uint64_t>> expected = scheduled;
  std::stable_sort(expected.begin(), expected.end());
  CHECK(processed == expected);
}

TEST_CASE("randomized schedule/step trace equals reference sort oracle") {
  Rng rng(77);
  VirtualClock clock;
  EventQueue q;
  std::vector<std::pair<Micros, std::uint64_t>> processed;
  std::vector<std::pair<Micros, std::uint64_t>> scheduled;

  for (int i = 0; i < 50; ++i) {
    const Micros at = rng.next_below(1000);
    const auto seq = q.schedule(clock, at, "seed", "", [&, at] {
      // Half of the events schedule one follow-up at a random later time.
      if (rng.next_bool(0.5)) {
        const Micros follow = clock.now_us + rng.next_below(500);
        const auto s = q.schedule(clock, follow, "follow", "", nullptr);
        scheduled.emplace_back(follow, s);
      }
    });
    scheduled.emplace_back(at, seq);
  }
  while (true) {
    auto done = q.step(clock);
    if (!done) break;
    processed.emplace_back(done->time_us, done->seq);
  }
  std::vector<std::pair<Micros, std::uint64_t>> expected = scheduled;
  std::stable_sort(expected.begin(), expected.end());
  CHECK(processed == expected);
}

TEST_CASE("cancelled events never fire") {
  VirtualClock clock;
  EventQueue q;
  int fired = 0;
  const auto id = q.schedule(clock, 5, "x", "", [&] { ++fired; });
  q.schedule(clock, 6, "y", "", [&] { ++fired; });
  q.cancel(id);
  while (q.step(clock)) {
  }
  CHECK(fired == 1);
}

TEST_CASE("degenerate profile is exact for any payload") {
  Rng rng(1);
  LinkProfile p{"exact", 23'600, 0.0, 0.0, 0.0, 0.0};
  CHECK(sample_latency(p, 0, rng) == 23'600);
  CHECK(sample_latency(p, 50, rng) == 23'600);
  CHECK(sample_latency(p, 10'240, rng) == 23'600);
}

TEST_CASE("per-byte cost grows with payload") {
  Rng rng(2);
  LinkProfile p{"linear", 1'000, 0.0, 0.0, 0.5, 0.0};
  CHECK(sample_latency(p, 100, rng) == 1'050);
  CHECK(sample_latency(p, 1'000, rng) == 1'500);
}

TEST_CASE("sampler mean converges to base + E[jitter] + per_byte*len") {
  // E[lognormal(median, sigma)] = median * exp(sigma^2 / 2)
  Rng rng(1234);
  LinkProfile p{"jittered", 10'500, 920.0, 0.8, 0.535, 0.0};
  const std::size_t len = 1'024;
  const std::size_t n = 10'000;

  long double sum = 0, sumsq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Micros s = sample_latency(p, len, rng);
    sum += s;
    sumsq += static_cast<long double>(s) * s;
  }
  const double mean = static_cast<double>(sum / n);
  const double var = static_cast<double>(sumsq / n) - mean * mean;
  const double expected = 10'500.0 + 920.0 * std::exp(0.8 * 0.8 / 2.0) +
                          0.535 * static_cast<double>(len);
  const double bound = 3.0 * std::sqrt(var / static_cast<double>(n)) + 1.0;
  CHECK(std::abs(mean - expected) < bound);
}

TEST_CASE("calibrated profile reproduces the configured round-trip targets") {
  // Two one-way samples compose a round trip. The shipped calibration
  // targets 23.6 ms at 50 B and 34.5 ms at 10 KiB.
  Rng rng(4321);
  LinkProfile tailscale{"tailscale-m4", 10'500, 920.0, 0.8, 0.535, 0.0};

  auto rtt_mean = [&](std::size_t len, int n) {
    long double sum = 0;
    for (int i = 0; i < n; ++i) {
      sum += sample_latency(tailscale, len, rng);
      sum += sample_latency(tailscale, len, rng);
    }
    return static_cast<double>(sum / n);
  };

  const double m50 = rtt_mean(50, 150);
  CHECK(m50 > 23'600.0 * 0.9);
  CHECK(m50 < 23'600.0 * 1.1);

  const double m10k = rtt_mean(10'240, 150);
  CHECK(m10k > 34'500.0 * 0.9);
  CHECK(m10k < 34'500.0 * 1.1);
}

TEST_CASE("flat profile keeps means within 1% across payload sizes") {
  Rng rng(555);
  LinkProfile nuc{"nuc-n150", 31'200, 890.0, 0.5, 0.0, 0.0};
  auto mean_at = [&](std::size_t len) {
    long double sum = 0;
    const int n = 400;
    for (int i = 0; i < n; ++i) sum += sample_latency(nuc, len, rng);
    return static_cast<double>(sum / n);
  };
  const double small = mean_at(128);
  const double large = mean_at(8'192);
  CHECK(std::abs(small - large) / small < 0.01);
}

TEST_CASE("link downtime intervals") {
  LinkState link;
  link.add_down_interval(1'000, 5'000);
  CHECK(!link.is_down(999));
  CHECK(link.is_down(1'000));
  CHECK(link.is_down(4'999));
  CHECK(!link.is_down(5'000));
  // flight [900, 1000] touches the boundary only at the start instant
  CHECK(!link.down_within(900, 1'000));
  CHECK(link.down_within(900, 1'001));
  CHECK(link.down_within(4'999, 6'000));
  CHECK(!link.down_within(5'000, 6'000));
  CHECK_THROWS_AS(link.add_down_interval(4'000, 6'000), SimError);
  CHECK_NOTHROW(link.add_down_interval(5'000, 6'000));
}

TEST_CASE("uplink and downlink halves recombine exactly") {
  for (Micros s : {Micros{0}, Micros{1}, Micros{2}, Micros{23'600},
                   Micros{99'999}}) {
    CHECK(uplink_half(s) + downlink_half(s) == s);
    CHECK(uplink_half(s) <= downlink_half(s));
  }
}
