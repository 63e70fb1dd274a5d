#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "swarmsim/metrics.hpp"
#include "swarmsim/rng.hpp"

using namespace swarmsim;

namespace {

// Independent sort-based oracle. Percentile rank is the smallest 1-based k
// with k*100 >= q*n, found by linear scan in exact integer arithmetic.
struct OracleStats {
  double mean;
  double stddev;
  Micros median, p95, p99, min, max;
};

Micros oracle_percentile(std::vector<Micros> sorted, unsigned q) {
  const std::size_t n = sorted.size();
  std::size_t k = 1;
  while (k * 100 < static_cast<std::size_t>(q) * n) ++k;
  return sorted[k - 1];
}

OracleStats oracle(const std::vector<Micros>& samples) {
  std::vector<Micros> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  long double sum = 0;
  for (Micros v : sorted) sum += v;
  const long double mean = sum / sorted.size();
  long double var = 0;
  for (Micros v : sorted) var += (v - mean) * (v - mean);
  var /= sorted.size();
  OracleStats o;
  o.mean = static_cast<double>(mean);
  o.stddev = std::sqrt(static_cast<double>(var));
  o.median = oracle_percentile(sorted, 50);
  o.p95 = oracle_percentile(sorted, 95);
  o.p99 = oracle_percentile(sorted, 99);
  o.min = sorted.front();
  o.max = sorted.back();
  return o;
}

void check_against_oracle(const std::vector<Micros>& samples) {
  const SummaryStats got = summarize(samples);
  const OracleStats want = oracle(samples);
  CHECK(got.n == samples.size());
  CHECK(got.median_us == want.median);
  CHECK(got.p95_us == want.p95);
  CHECK(got.p99_us == want.p99);
  CHECK(got.min_us == want.min);
  CHECK(got.max_us == want.max);
  CHECK(got.mean_us == doctest::Approx(want.mean).epsilon(1e-12));
  CHECK(got.stddev_us == doctest::Approx(want.stddev).epsilon(1e-9));
}

}  // namespace

TEST_CASE("nearest-rank percentiles on 1..100") {
  std::vector<Micros> samples;
  for (Micros v = 1; v <= 100; ++v) samples.push_back(v);
  const SummaryStats s = summarize(samples);
  CHECK(s.p95_us == 95);
  CHECK(s.p99_us == 99);
  CHECK(s.median_us == 50);
  CHECK(s.mean_us == doctest::Approx(50.5));
}

TEST_CASE("all-equal samples collapse every statistic") {
  const std::vector<Micros> samples(37, 420);
  const SummaryStats s = summarize(samples);
  CHECK(s.mean_us == 420.0);
  CHECK(s.median_us == 420);
  CHECK(s.p95_us == 420);
  CHECK(s.p99_us == 420);
  CHECK(s.stddev_us == 0.0);
}

TEST_CASE("empty sample list is an error") {
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);
}

TEST_CASE("rank formula avoids floating-point ceil pitfalls") {
  // ceil(0.95 * 20) must be 19, not 20 (0.95*20 in doubles is 19.000...004).
  CHECK(nearest_rank(20, 95) == 19);
  CHECK(nearest_rank(100, 95) == 95);
  CHECK(nearest_rank(1, 99) == 1);
  CHECK(nearest_rank(150, 95) == 143);
  CHECK(nearest_rank(150, 99) == 149);
}

TEST_CASE("summarize equals the oracle exhaustively for n <= 8") {
  // All sample lists of length 1..8 over the value set {1, 3, 9}.
  const Micros values[] = {1, 3, 9};
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      std::vector<Micros> samples;
      for (std::size_t i = 0; i < n; ++i) samples.push_back(values[idx[i]]);
      check_against_oracle(samples);
      std::size_t pos = 0;
      while (pos < n && ++idx[pos] == 3) {
        idx[pos] = 0;
        ++pos;
      }
      if (pos == n) break;
    }
  }
}

TEST_CASE("summarize equals the oracle on 1000 randomized sample sets") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_below(200);
    std::vector<Micros> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      samples.push_back(rng.next_below(1'000'000));
    }
    check_against_oracle(samples);
  }
}

TEST_CASE("summarize equals the oracle on 10000 random samples") {
  Rng rng(99);
  std::vector<Micros> samples;
  for (int i = 0; i < 10'000; ++i) samples.push_back(rng.next_below(10'000'000));
  check_against_oracle(samples);
}

TEST_CASE("interceptability verdict per device kind") {
  std::vector<GapSample> gaps;
  for (int i = 0; i < 50; ++i) {
    gaps.push_back({"front_door", "lock", 500'000, 23'000 + Micros(i * 100)});
    gaps.push_back({"ssr", "relay", 5'000, 22'000 + Micros(i * 100)});
    gaps.push_back({"valve", "valve", 1'000'000, 24'000 + Micros(i * 100)});
  }
  const ActuationAuditReport report = actuation_audit_gap(gaps, 2, 1);
  REQUIRE(report.devices.size() == 3);
  CHECK(report.unmatched_commands == 2);
  CHECK(report.unmatched_audits == 1);
  for (const auto& d : report.devices) {
    if (d.device == "front_door") CHECK(d.interceptable);
    if (d.device == "valve") CHECK(d.interceptable);
    if (d.device == "ssr") CHECK(!d.interceptable);
  }
}

TEST_CASE("interceptability is monotone in actuation duration") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GapSample> gaps;
    const std::size_t n = 1 + rng.next_below(40);
    const Micros duration = 1 + rng.next_below(100'000);
    for (std::size_t i = 0; i < n; ++i) {
      gaps.push_back({"d", "lock", duration, rng.next_below(80'000)});
    }
    const bool verdict = actuation_audit_gap(gaps, 0, 0).devices[0].interceptable;
    // Increase duration: verdict may flip to interceptable, never away.
    for (auto& g : gaps) g.actuation_duration_us = duration * 2 + 1;
    const bool wider = actuation_audit_gap(gaps, 0, 0).devices[0].interceptable;
    if (verdict) CHECK(wider);
  }
}
