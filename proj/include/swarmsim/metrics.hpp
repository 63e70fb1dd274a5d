#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmsim/bytes.hpp"

namespace swarmsim {

// Nearest-rank order statistics over integer microsecond samples.
struct SummaryStats {
  std::size_t n = 0;
  double mean_us = 0.0;
  double stddev_us = 0.0;  // population (divides by n)
  Micros min_us = 0;
  Micros median_us = 0;
  Micros p95_us = 0;
  Micros p99_us = 0;
  Micros max_us = 0;
};

// Throws std::invalid_argument on an empty sample list.
// Percentile q uses the element at rank ceil(q*n) of the sorted list
// (1-based), computed in exact integer arithmetic.
SummaryStats summarize(const std::vector<Micros>& samples);

// Rank for percent p in [1,100] over n samples: ceil(p*n/100), 1-based.
std::size_t nearest_rank(std::size_t n, unsigned percent);

// Fraction of audited command messages carrying each provenance field.
struct ProvenanceAudit {
  std::size_t n_messages = 0;
  double sender = 1.0;
  double timestamp = 1.0;
  double correlation_id = 1.0;
  double msg_type = 1.0;
  double action = 1.0;

  bool complete() const {
    return sender == 1.0 && timestamp == 1.0 && correlation_id == 1.0 &&
           msg_type == 1.0 && action == 1.0;
  }
};

struct FailoverDecomposition {
  std::string link;
  std::string session_principal;
  Micros partition_us = 0;
  Micros network_recovery_us = 0;
  Micros bridge_setup_us = 0;
  Micros reconnect_us = 0;
  Micros total_blackout_us = 0;  // == sum of the four phases
  std::size_t unaudited_actuations = 0;
};

struct GapSample {
  std::string device;
  std::string device_kind;
  Micros actuation_duration_us = 0;
  Micros gap_us = 0;  // audit mirror receipt - command publish
};

struct InterceptVerdict {
  std::string device;
  std::string kind;
  Micros actuation_duration_us = 0;
  SummaryStats gap;
  bool interceptable = false;  // p99 gap < actuation duration
};

struct ActuationAuditReport {
  SummaryStats overall;                  // all matched gaps
  std::vector<InterceptVerdict> devices; // sorted by device id
  std::size_t unmatched_commands = 0;    // command with no audit receipt
  std::size_t unmatched_audits = 0;      // audit with no issuing command
};

ActuationAuditReport actuation_audit_gap(const std::vector<GapSample>& matched,
                                         std::size_t unmatched_commands,
                                         std::size_t unmatched_audits);

}  // namespace swarmsim
