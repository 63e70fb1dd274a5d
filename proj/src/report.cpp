#include "swarmsim/report.hpp"

#include <cstdio>
#include <sstream>

#include "swarmsim/attacks.hpp"

namespace swarmsim {

using json = nlohmann::json;

std::string format_ms(Micros us) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.1f ms", static_cast<double>(us) / 1000.0);
  return buf;
}

std::string format_seconds(Micros us) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f s", static_cast<double>(us) / 1e6);
  return buf;
}

std::string format_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

ProvenanceAudit provenance_audit(const std::vector<MirrorReceipt>& mirror_log) {
  ProvenanceAudit audit;
  std::size_t n = 0, sender = 0, ts = 0, corr = 0, type = 0, action = 0;
  for (const MirrorReceipt& m : mirror_log) {
    if (!m.decode_ok || m.env.msg_type != MsgType::command) continue;
    ++n;
    if (m.env.sender) ++sender;
    ++ts;    // a decodable envelope always carries its timestamp
    ++type;  // and its message type
    if (m.env.correlation_id) ++corr;
    if (auto fields = parse_payload(m.env.payload)) {
      if (fields->count("action")) ++action;
    }
  }
  audit.n_messages = n;
  if (n > 0) {
    audit.sender = static_cast<double>(sender) / n;
    audit.timestamp = static_cast<double>(ts) / n;
    audit.correlation_id = static_cast<double>(corr) / n;
    audit.msg_type = static_cast<double>(type) / n;
    audit.action = static_cast<double>(action) / n;
  }
  // n == 0 keeps the vacuous 1.0 defaults; n itself flags the degenerate case.
  return audit;
}

ActuationAuditReport build_actuation_audit(const World& world) {
  std::vector<GapSample> matched;
  std::size_t unmatched_commands = 0;

  for (const CommandIssueRecord& cmd : world.issued_commands) {
    auto vis = world.audit_visibility_us(cmd.corr_id);
    if (!vis || *vis < cmd.publish_us) {
      ++unmatched_commands;
      continue;
    }
    const DeviceSpec* dev = world.cfg.device(cmd.device);
    GapSample g;
    g.device = cmd.device;
    g.device_kind = dev ? to_string(dev->kind) : "unknown";
    g.actuation_duration_us = dev ? world.cfg.device_duration(*dev) : 0;
    g.gap_us = *vis - cmd.publish_us;
    matched.push_back(std::move(g));
  }

  std::set<std::string> command_corrs;
  for (const auto& cmd : world.issued_commands) command_corrs.insert(cmd.corr_id);
  std::size_t unmatched_audits = 0;
  for (const auto& m : world.mirror_log) {
    if (m.decode_ok && m.env.msg_type == MsgType::audit && m.env.correlation_id &&
        !command_corrs.count(m.env.correlation_id->hex)) {
      ++unmatched_audits;
    }
  }
  return actuation_audit_gap(matched, unmatched_commands, unmatched_audits);
}

namespace {

json stats_json(const SummaryStats& s) {
  json j = json::object();
  j["n"] = s.n;
  j["mean_us"] = static_cast<std::uint64_t>(s.mean_us + 0.5);
  j["stddev_us"] = static_cast<std::uint64_t>(s.stddev_us + 0.5);
  j["min_us"] = s.min_us;
  j["median_us"] = s.median_us;
  j["p95_us"] = s.p95_us;
  j["p99_us"] = s.p99_us;
  j["max_us"] = s.max_us;
  return j;
}

}  // namespace

json build_report(const World& world) {
  json doc = json::object();
  doc["schema_version"] = kReportSchemaVersion;

  json meta = json::object();
  meta["scenario"] = world.cfg.name;
  meta["archetype"] = to_string(world.cfg.archetype);
  meta["posture"] = to_string(world.cfg.posture);
  meta["trust_mode"] = to_string(world.cfg.trust_mode);
  meta["state_mode"] = to_string(world.cfg.state_mode);
  meta["boundary_policy"] = to_string(world.cfg.boundary.cloud_fallback);
  meta["seed"] = world.cfg.seed;
  meta["duration_us"] = world.cfg.duration_us;
  meta["percentile_method"] = "nearest-rank";
  doc["meta"] = meta;

  // latency benchmarks
  json benches = json::array();
  for (const EchoBenchState& b : world.echo_benches) {
    json row = json::object();
    row["name"] = b.spec.name;
    row["target"] = b.spec.target;
    row["payload_bytes"] = b.spec.payload_bytes;
    row["requested"] = b.spec.count;
    row["samples"] = b.samples.size();
    row["timeouts"] = b.timeouts;
    if (!b.samples.empty()) row["rtt"] = stats_json(summarize(b.samples));
    benches.push_back(std::move(row));
  }
  doc["latency"] = benches;

  // reconnect samples
  if (!world.reconnect_samples.empty()) {
    std::vector<Micros> delays;
    for (const auto& r : world.reconnect_samples) delays.push_back(r.delay_us);
    json rc = json::object();
    rc["n"] = delays.size();
    rc["stats"] = stats_json(summarize(delays));
    doc["reconnect"] = rc;
  }

  // attack outcomes
  json attacks = json::array();
  for (const AttackRuntime& rt : world.attack_state) {
    const AttackOutcome out = extract_outcome(world, rt);
    json row = json::object();
    row["kind"] = to_string(out.kind);
    row["label"] = out.label;
    row["broker_response"] = out.broker_response;
    row["accepted"] = out.accepted;
    if (out.reject_reason) row["reject_reason"] = to_string(*out.reject_reason);
    row["executions"] = out.executions;
    row["audit_records"] = out.audit_records;
    row["detections"] = out.detections;
    row["impact"] = out.impact;
    json ev = json::object();
    for (const auto& [k, v] : out.evidence) ev[k] = v;
    row["evidence"] = ev;
    attacks.push_back(std::move(row));
  }
  doc["attacks"] = attacks;

  // provenance
  {
    const ProvenanceAudit audit = provenance_audit(world.mirror_log);
    json p = json::object();
    p["n_messages"] = audit.n_messages;
    p["sender"] = format_pct(audit.sender);
    p["timestamp"] = format_pct(audit.timestamp);
    p["correlation_id"] = format_pct(audit.correlation_id);
    p["msg_type"] = format_pct(audit.msg_type);
    p["action"] = format_pct(audit.action);
    p["complete"] = audit.n_messages > 0 && audit.complete();
    doc["provenance"] = p;
  }

  // egress + dns + crossings
  {
    const EgressReport eg =
        build_egress_report(world.ledger, world.dns_log, world.operations());
    json e = json::object();
    e["external_destinations"] = eg.external_destinations;
    e["external_ips"] = eg.external_ips;
    e["total_bytes"] = eg.total_bytes;
    e["operations"] = eg.operations;
    json dests = json::array();
    for (const auto& d : eg.destinations) {
      json row = json::object();
      row["host"] = d.host;
      row["ip"] = d.ip;
      row["bytes"] = d.bytes;
      row["entries"] = d.entries;
      row["dns_queries"] = d.dns_queries;
      dests.push_back(std::move(row));
    }
    e["destinations"] = dests;
    doc["egress"] = e;

    json dns = json::object();
    dns["events"] = world.dns_log.size();
    std::map<std::string, std::size_t> per_host;
    for (const auto& q : world.dns_log) per_host[q.hostname] += 1;
    json hosts = json::object();
    for (const auto& [host, count] : per_host) hosts[host] = count;
    dns["per_host"] = hosts;
    doc["dns"] = dns;

    json crossings = json::array();
    for (const Crossing& c : detect_crossings(world.ledger, world.dns_log)) {
      json row = json::object();
      row["time_us"] = c.timestamp_us;
      row["agent"] = c.agent;
      row["host"] = c.host;
      row["bytes"] = c.bytes;
      json layers = json::array();
      if (c.coordination_layer) layers.push_back("coordination");
      if (c.audit_marker) layers.push_back("audit-marker");
      if (c.dns_layer) layers.push_back("dns");
      row["visible_at"] = layers;
      crossings.push_back(std::move(row));
    }
    doc["crossings"] = crossings;
  }

  // failover decomposition
  json failover = json::array();
  for (const FailoverRow& row : world.failover_rows) {
    std::size_t unaudited = 0;
    for (const ActuationRecord& a : world.actuations) {
      if (!a.audited) continue;
      if (a.complete_us < row.blackout_start_us ||
          a.complete_us > row.blackout_end_us) {
        continue;
      }
      std::optional<Micros> vis;
      if (a.corr_id) vis = world.audit_visibility_us(*a.corr_id);
      if (!vis || *vis > a.complete_us) ++unaudited;
    }
    json r = json::object();
    r["link"] = row.spec.link;
    r["principal"] = row.principal;
    r["partition_us"] = row.spec.duration_us;
    r["network_recovery_us"] = row.spec.network_recovery_us;
    r["bridge_setup_us"] = row.spec.bridge_setup_us;
    r["reconnect_us"] = row.reconnect_delay_us;
    r["total_blackout_us"] = row.blackout_us;
    r["unaudited_actuations"] = unaudited;
    failover.push_back(std::move(r));
  }
  doc["failover"] = failover;

  // actuation -> audit gap
  {
    const ActuationAuditReport gap = build_actuation_audit(world);
    json g = json::object();
    g["matched"] = gap.overall.n;
    g["unmatched_commands"] = gap.unmatched_commands;
    g["unmatched_audits"] = gap.unmatched_audits;
    if (gap.overall.n > 0) g["gap"] = stats_json(gap.overall);
    json devices = json::array();
    for (const InterceptVerdict& v : gap.devices) {
      json row = json::object();
      row["device"] = v.device;
      row["kind"] = v.kind;
      row["actuation_duration_us"] = v.actuation_duration_us;
      row["p99_gap_us"] = v.gap.p99_us;
      row["samples"] = v.gap.n;
      row["interceptable"] = v.interceptable;
      devices.push_back(std::move(row));
    }
    g["devices"] = devices;
    doc["actuation_audit"] = g;
  }

  // trust
  {
    const AgentSpec* orch = world.cfg.orchestrator();
    json t = json::object();
    if (orch) {
      const AgentRuntime& agent = world.agents.at(orch->id.id);
      const LockoutReport lockout =
          lockout_report(agent.trust, world.cfg.duration_us);
      t["mode"] = to_string(agent.trust.mode);
      t["forgeries_detected"] = agent.trust.forgery_count;
      t["quarantined"] = agent.trust.quarantine.size();
      t["refused_commands"] = lockout.refused_commands;
      t["refused_verified"] = lockout.refused_verified;
      t["lockout_us"] = lockout.lockout_us;
      t["oob_confirmations"] = agent.trust.oob_confirmations;
      t["channel_distrust"] = agent.trust.channel_distrust;
    }
    doc["trust"] = t;
  }

  // state plane
  {
    json s = json::object();
    s["mode"] = to_string(world.cfg.state_mode);
    s["conflict_events"] = world.conflicts.size();
    std::set<std::string> docs;
    for (const auto& [id, agent] : world.agents) {
      for (const auto& [doc_id, copy] : agent.doc_copies) docs.insert(doc_id);
      for (const auto& [doc_id, view] : agent.doc_views) docs.insert(doc_id);
    }
    json divergence = json::object();
    for (const std::string& d : docs) {
      divergence[d] = world.measure_divergence(d);
    }
    s["divergence"] = divergence;
    s["objects"] = world.store.object_count();
    doc["stateplane"] = s;
  }

  // counters
  {
    json c = json::object();
    std::size_t accepted = 0, rejected = 0;
    for (const auto& e : world.publish_log) {
      if (e.record.accepted) ++accepted;
      else ++rejected;
    }
    c["publishes_accepted"] = accepted;
    c["publishes_rejected"] = rejected;
    c["operations"] = world.operations();
    c["mirror_receipts"] = world.mirror_log.size();
    c["missed_deliveries"] = world.missed.size();
    c["actuations"] = world.actuations.size();
    c["events_processed"] = world.trace.size();
    doc["counts"] = c;
  }

  return doc;
}

namespace {

void heading(std::ostringstream& out, const std::string& title) {
  out << "== " << title << " ==\n";
}

std::string pad(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s + " ";
  return s + std::string(width - s.size(), ' ');
}

std::string stat_cell(const json& stats, const char* key) {
  return format_ms(stats.at(key).get<Micros>());
}

}  // namespace

std::string render_text(const json& report) {
  std::ostringstream out;
  const json& meta = report.at("meta");
  heading(out, "Scenario");
  out << "name: " << meta.at("scenario").get<std::string>()
      << "  archetype: " << meta.at("archetype").get<std::string>()
      << "  posture: " << meta.at("posture").get<std::string>()
      << "  trust: " << meta.at("trust_mode").get<std::string>()
      << "  state: " << meta.at("state_mode").get<std::string>()
      << "  seed: " << meta.at("seed").get<std::uint64_t>() << "\n\n";

  heading(out, "Latency (echo round trips)");
  const json& latency = report.at("latency");
  if (latency.empty()) {
    out << "(no data)\n";
  } else {
    out << pad("Benchmark", 14) << pad("Payload", 10) << pad("N", 6)
        << pad("Timeouts", 9) << pad("Mean", 10) << pad("Median", 10)
        << pad("P95", 10) << pad("P99", 10) << "\n";
    for (const json& b : latency) {
      const std::string payload =
          std::to_string(b.at("payload_bytes").get<std::size_t>()) + " B";
      std::string mean = "-", median = "-", p95 = "-", p99 = "-";
      if (b.contains("rtt")) {
        mean = stat_cell(b["rtt"], "mean_us");
        median = stat_cell(b["rtt"], "median_us");
        p95 = stat_cell(b["rtt"], "p95_us");
        p99 = stat_cell(b["rtt"], "p99_us");
      }
      out << pad(b.at("name").get<std::string>(), 14) << pad(payload, 10)
          << pad(std::to_string(b.at("samples").get<std::size_t>()), 6)
          << pad(std::to_string(b.at("timeouts").get<std::size_t>()), 9)
          << pad(mean, 10) << pad(median, 10) << pad(p95, 10) << pad(p99, 10)
          << "\n";
    }
  }
  out << "\n";

  heading(out, "Adversarial probes");
  const json& attacks = report.at("attacks");
  if (attacks.empty()) {
    out << "(no data)\n";
  } else {
    out << pad("Attack", 24) << pad("Broker Response", 28) << "Impact\n";
    for (const json& a : attacks) {
      out << pad(a.at("label").get<std::string>(), 24)
          << pad(a.at("broker_response").get<std::string>(), 28)
          << a.at("impact").get<std::string>() << "\n";
    }
  }
  out << "\n";

  heading(out, "Provenance coverage");
  const json& prov = report.at("provenance");
  const std::size_t prov_n = prov.at("n_messages").get<std::size_t>();
  if (prov_n == 0) {
    out << "(no data: 0 audited commands)\n";
  } else {
    out << "commands audited: " << prov_n << "\n"
        << "sender " << prov.at("sender").get<std::string>() << "  timestamp "
        << prov.at("timestamp").get<std::string>() << "  correlation_id "
        << prov.at("correlation_id").get<std::string>() << "  msg_type "
        << prov.at("msg_type").get<std::string>() << "  action "
        << prov.at("action").get<std::string>() << "\n";
  }
  out << "\n";

  heading(out, "Egress");
  const json& egress = report.at("egress");
  out << "external destinations: "
      << egress.at("external_destinations").get<std::size_t>()
      << "  external IPs: " << egress.at("external_ips").get<std::size_t>()
      << "  bytes sent: " << egress.at("total_bytes").get<std::size_t>()
      << " B  operations: " << egress.at("operations").get<std::size_t>()
      << "\n";
  for (const json& d : egress.at("destinations")) {
    out << "  " << pad(d.at("host").get<std::string>(), 28)
        << pad(d.at("ip").get<std::string>(), 16)
        << pad(std::to_string(d.at("bytes").get<std::size_t>()) + " B", 12)
        << "dns queries: " << d.at("dns_queries").get<std::size_t>() << "\n";
  }
  const json& crossings = report.at("crossings");
  if (!crossings.empty()) {
    out << "boundary crossings:\n";
    for (const json& c : crossings) {
      out << "  " << pad(c.at("agent").get<std::string>(), 10)
          << pad(c.at("host").get<std::string>(), 28)
          << pad(std::to_string(c.at("bytes").get<std::size_t>()) + " B", 12)
          << "visible at:";
      for (const json& l : c.at("visible_at")) {
        out << " " << l.get<std::string>();
      }
      out << "\n";
    }
  }
  out << "\n";

  heading(out, "Failover");
  const json& failover = report.at("failover");
  if (failover.empty()) {
    out << "(no data)\n";
  } else {
    out << pad("Link", 14) << pad("Principal", 12) << pad("Partition", 12)
        << pad("Recovery", 12) << pad("Bridge", 10) << pad("Reconnect", 12)
        << pad("Blackout", 12) << "Unaudited\n";
    for (const json& r : failover) {
      out << pad(r.at("link").get<std::string>(), 14)
          << pad(r.at("principal").get<std::string>(), 12)
          << pad(format_seconds(r.at("partition_us").get<Micros>()), 12)
          << pad(format_seconds(r.at("network_recovery_us").get<Micros>()), 12)
          << pad(format_seconds(r.at("bridge_setup_us").get<Micros>()), 10)
          << pad(format_ms(r.at("reconnect_us").get<Micros>()), 12)
          << pad(format_seconds(r.at("total_blackout_us").get<Micros>()), 12)
          << r.at("unaudited_actuations").get<std::size_t>() << "\n";
    }
  }
  out << "\n";

  heading(out, "Actuation-to-audit");
  const json& gap = report.at("actuation_audit");
  if (gap.at("matched").get<std::size_t>() == 0) {
    out << "(no data: no matched command/audit pairs)\n";
  } else {
    out << "matched pairs: " << gap.at("matched").get<std::size_t>()
        << "  unmatched commands: "
        << gap.at("unmatched_commands").get<std::size_t>()
        << "  unmatched audits: "
        << gap.at("unmatched_audits").get<std::size_t>() << "\n";
    if (gap.contains("gap")) {
      out << "gap mean " << stat_cell(gap["gap"], "mean_us") << "  median "
          << stat_cell(gap["gap"], "median_us") << "  p95 "
          << stat_cell(gap["gap"], "p95_us") << "  p99 "
          << stat_cell(gap["gap"], "p99_us") << "\n";
    }
    out << pad("Device", 16) << pad("Kind", 8) << pad("Actuation", 12)
        << pad("P99 gap", 12) << "Interceptable\n";
    for (const json& d : gap.at("devices")) {
      out << pad(d.at("device").get<std::string>(), 16)
          << pad(d.at("kind").get<std::string>(), 8)
          << pad(format_ms(d.at("actuation_duration_us").get<Micros>()), 12)
          << pad(format_ms(d.at("p99_gap_us").get<Micros>()), 12)
          << (d.at("interceptable").get<bool>() ? "yes" : "no") << "\n";
    }
  }
  out << "\n";

  heading(out, "Trust");
  const json& trust = report.at("trust");
  if (trust.empty()) {
    out << "(no data)\n";
  } else {
    out << "mode: " << trust.at("mode").get<std::string>()
        << "  forgeries detected: "
        << trust.at("forgeries_detected").get<std::size_t>()
        << "  quarantined: " << trust.at("quarantined").get<std::size_t>()
        << "  refused: " << trust.at("refused_commands").get<std::size_t>()
        << " (verified: " << trust.at("refused_verified").get<std::size_t>()
        << ")  lockout: " << format_seconds(trust.at("lockout_us").get<Micros>())
        << "  oob confirmations: "
        << trust.at("oob_confirmations").get<std::size_t>() << "\n";
  }
  out << "\n";

  heading(out, "State plane");
  const json& sp = report.at("stateplane");
  out << "mode: " << sp.at("mode").get<std::string>()
      << "  conflict events: " << sp.at("conflict_events").get<std::size_t>();
  const json& divergence = sp.at("divergence");
  if (divergence.empty()) {
    out << "  (no shared documents)\n";
  } else {
    out << "\n";
    for (auto it = divergence.begin(); it != divergence.end(); ++it) {
      out << "  doc '" << it.key() << "': " << it.value().get<std::size_t>()
          << " distinct copies\n";
    }
  }
  out << "\n";

  heading(out, "Counts");
  const json& counts = report.at("counts");
  out << "publishes accepted: "
      << counts.at("publishes_accepted").get<std::size_t>() << "  rejected: "
      << counts.at("publishes_rejected").get<std::size_t>()
      << "  operations: " << counts.at("operations").get<std::size_t>()
      << "  mirror receipts: "
      << counts.at("mirror_receipts").get<std::size_t>()
      << "  missed deliveries: "
      << counts.at("missed_deliveries").get<std::size_t>()
      << "  actuations: " << counts.at("actuations").get<std::size_t>()
      << "  events: " << counts.at("events_processed").get<std::size_t>()
      << "\n";
  return out.str();
}

}  // namespace swarmsim
