#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "swarmsim/bytes.hpp"

namespace swarmsim {

enum class CloudFallback { forbid, allow_silent, allow_with_marker };

const char* to_string(CloudFallback f);

struct BoundaryPolicy {
  CloudFallback cloud_fallback = CloudFallback::allow_silent;
  std::set<std::string> sensitive_labels;  // deny egress regardless of mode
};

enum class EgressDecision { allow, allow_marked, deny };

const char* to_string(EgressDecision d);

EgressDecision authorize_egress(const BoundaryPolicy& policy,
                                const std::string& agent,
                                const std::string& dest,
                                const std::string& label, std::size_t bytes);

enum class EgressCause { inference_fallback, cloud_api };

const char* to_string(EgressCause c);

struct EgressEntry {
  Micros timestamp_us = 0;
  std::string agent;
  std::string dest_host;
  std::size_t bytes = 0;
  EgressCause cause = EgressCause::inference_fallback;
  bool marked = false;  // a boundary marker was published for this entry
};

// Append-only; entries must carry bytes > 0.
struct EgressLedger {
  std::vector<EgressEntry> entries;

  void append(EgressEntry e);
  std::size_t total_bytes() const;
  std::set<std::string> destinations() const;
};

struct DnsEvent {
  Micros timestamp_us = 0;
  std::string agent;
  std::string hostname;
  std::string resolved_ip;
};

struct EgressReport {
  struct PerDestination {
    std::string host;
    std::string ip;
    std::size_t bytes = 0;
    std::size_t entries = 0;
    std::size_t dns_queries = 0;
  };
  std::vector<PerDestination> destinations;  // sorted by host
  std::size_t external_destinations = 0;
  std::size_t external_ips = 0;
  std::size_t total_bytes = 0;
  std::size_t operations = 0;  // app-level publishes during the run
};

EgressReport build_egress_report(const EgressLedger& ledger,
                                 const std::vector<DnsEvent>& dns,
                                 std::size_t operations);

// Which observation layers saw a sovereignty boundary crossing.
struct Crossing {
  Micros timestamp_us = 0;
  std::string agent;
  std::string host;
  std::size_t bytes = 0;
  bool dns_layer = false;
  bool audit_marker = false;
  bool coordination_layer = false;  // anomaly in ordinary bus traffic
};

std::vector<Crossing> detect_crossings(const EgressLedger& ledger,
                                       const std::vector<DnsEvent>& dns);

}  // namespace swarmsim
