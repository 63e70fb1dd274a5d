#include "swarmsim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace swarmsim {

std::size_t nearest_rank(std::size_t n, unsigned percent) {
  // ceil(percent*n/100) without floating point
  return (static_cast<std::size_t>(percent) * n + 99) / 100;
}

SummaryStats summarize(const std::vector<Micros>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("summarize: empty sample list");
  }
  std::vector<Micros> sorted = samples;
  std::sort(sorted.begin(), sorted.end());

  SummaryStats s;
  s.n = sorted.size();
  s.min_us = sorted.front();
  s.max_us = sorted.back();
  s.median_us = sorted[nearest_rank(s.n, 50) - 1];
  s.p95_us = sorted[nearest_rank(s.n, 95) - 1];
  s.p99_us = sorted[nearest_rank(s.n, 99) - 1];

  long double sum = 0.0L;
  for (Micros v : sorted) sum += static_cast<long double>(v);
  const long double mean = sum / static_cast<long double>(s.n);
  long double var = 0.0L;
  for (Micros v : sorted) {
    const long double d = static_cast<long double>(v) - mean;
    var += d * d;
  }
  var /= static_cast<long double>(s.n);
  s.mean_us = static_cast<double>(mean);
  s.stddev_us = static_cast<double>(std::sqrt(static_cast<double>(var)));
  return s;
}

ActuationAuditReport actuation_audit_gap(const std::vector<GapSample>& matched,
                                         std::size_t unmatched_commands,
                                         std::size_t unmatched_audits) {
  ActuationAuditReport report;
  report.unmatched_commands = unmatched_commands;
  report.unmatched_audits = unmatched_audits;

  std::vector<Micros> all;
  std::map<std::string, std::vector<Micros>> per_device;
  std::map<std::string, std::pair<std::string, Micros>> device_info;
  for (const GapSample& g : matched) {
    all.push_back(g.gap_us);
    per_device[g.device].push_back(g.gap_us);
    device_info[g.device] = {g.device_kind, g.actuation_duration_us};
  }
  if (!all.empty()) report.overall = summarize(all);

  for (auto& [device, gaps] : per_device) {
    InterceptVerdict v;
    v.device = device;
    v.kind = device_info[device].first;
    v.actuation_duration_us = device_info[device].second;
    v.gap = summarize(gaps);
    v.interceptable = v.gap.p99_us < v.actuation_duration_us;
    report.devices.push_back(std::move(v));
  }
  return report;
}

}  // namespace swarmsim
