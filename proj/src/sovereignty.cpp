#include "swarmsim/sovereignty.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarmsim {

const char* to_string(CloudFallback f) {
  switch (f) {
    case CloudFallback::forbid: return "forbid";
    case CloudFallback::allow_silent: return "allow_silent";
    case CloudFallback::allow_with_marker: return "allow_with_marker";
  }
  return "unknown";
}

const char* to_string(EgressDecision d) {
  switch (d) {
    case EgressDecision::allow: return "allow";
    case EgressDecision::allow_marked: return "allow_marked";
    case EgressDecision::deny: return "deny";
  }
  return "unknown";
}

const char* to_string(EgressCause c) {
  switch (c) {
    case EgressCause::inference_fallback: return "inference_fallback";
    case EgressCause::cloud_api: return "cloud_api";
  }
  return "unknown";
}

EgressDecision authorize_egress(const BoundaryPolicy& policy,
                                const std::string& /*agent*/,
                                const std::string& /*dest*/,
                                const std::string& label,
                                std::size_t /*bytes*/) {
  if (!label.empty() && policy.sensitive_labels.count(label)) {
    return EgressDecision::deny;
  }
  switch (policy.cloud_fallback) {
    case CloudFallback::forbid: return EgressDecision::deny;
    case CloudFallback::allow_with_marker: return EgressDecision::allow_marked;
    case CloudFallback::allow_silent: return EgressDecision::allow;
  }
  return EgressDecision::deny;
}

void EgressLedger::append(EgressEntry e) {
  if (e.bytes == 0) throw std::invalid_argument("egress entry with 0 bytes");
  entries.push_back(std::move(e));
}

std::size_t EgressLedger::total_bytes() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.bytes;
  return total;
}

std::set<std::string> EgressLedger::destinations() const {
  std::set<std::string> out;
  for (const auto& e : entries) out.insert(e.dest_host);
  return out;
}

EgressReport build_egress_report(const EgressLedger& ledger,
                                 const std::vector<DnsEvent>& dns,
                                 std::size_t operations) {
  EgressReport report;
  report.operations = operations;
  report.total_bytes = ledger.total_bytes();

  std::map<std::string, EgressReport::PerDestination> per;
  for (const auto& e : ledger.entries) {
    auto& d = per[e.dest_host];
    d.host = e.dest_host;
    d.bytes += e.bytes;
    d.entries += 1;
  }
  std::set<std::string> ips;
  for (const auto& q : dns) {
    auto it = per.find(q.hostname);
    if (it != per.end()) {
      it->second.dns_queries += 1;
      if (it->second.ip.empty()) it->second.ip = q.resolved_ip;
    }
    // DNS-only hosts (no egress) are not destinations.
  }
  for (auto& [host, d] : per) {
    if (!d.ip.empty()) ips.insert(d.ip);
    report.destinations.push_back(d);
  }
  report.external_destinations = report.destinations.size();
  report.external_ips = ips.size();
  return report;
}

std::vector<Crossing> detect_crossings(const EgressLedger& ledger,
                                       const std::vector<DnsEvent>& dns) {
  std::vector<Crossing> out;
  for (const auto& e : ledger.entries) {
    Crossing c;
    c.timestamp_us = e.timestamp_us;
    c.agent = e.agent;
    c.host = e.dest_host;
    c.bytes = e.bytes;
    c.audit_marker = e.marked;
    c.coordination_layer = false;  // fallback leaves bus traffic unchanged
    c.dns_layer = std::any_of(dns.begin(), dns.end(), [&](const DnsEvent& q) {
      return q.hostname == e.dest_host && q.agent == e.agent &&
             q.timestamp_us <= e.timestamp_us;
    });
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace swarmsim
