#include "swarmsim/runner.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarmsim/report.hpp"

namespace swarmsim {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string trace_to_string(const World& world) {
  std::ostringstream out;
  for (const ProcessedEvent& ev : world.trace) {
    out << ev.time_us << "\t" << ev.seq << "\t" << ev.kind << "\t" << ev.details
        << "\n";
  }
  return out.str();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string egress_jsonl(const World& world) {
  std::ostringstream out;
  for (const EgressEntry& e : world.ledger.entries) {
    json j = json::object();
    j["ts_us"] = e.timestamp_us;
    j["agent"] = e.agent;
    j["host"] = e.dest_host;
    j["bytes"] = e.bytes;
    j["cause"] = to_string(e.cause);
    j["marked"] = e.marked;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::string dns_jsonl(const World& world) {
  std::ostringstream out;
  for (const DnsEvent& e : world.dns_log) {
    json j = json::object();
    j["ts_us"] = e.timestamp_us;
    j["agent"] = e.agent;
    j["host"] = e.hostname;
    j["ip"] = e.resolved_ip;
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace

RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                          const std::string& config_digest) {
  World world(cfg);
  world.init();
  world.run();

  RunArtifacts artifacts;
  artifacts.out_dir = out_dir;
  artifacts.report = build_report(world);

  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  write_file(base / "trace.log", trace_to_string(world));
  write_file(base / "report.json", artifacts.report.dump(2) + "\n");
  write_file(base / "report.txt", render_text(artifacts.report));
  write_file(base / "egress.jsonl", egress_jsonl(world));
  write_file(base / "dns.jsonl", dns_jsonl(world));

  json manifest = json::object();
  manifest["config_digest_sha256"] = config_digest;
  manifest["scenario"] = cfg.name;
  manifest["seed"] = cfg.seed;
  manifest["posture"] = to_string(cfg.posture);
  manifest["tool_version"] = kToolVersion;
  manifest["created_unix"] = static_cast<std::int64_t>(std::time(nullptr));
  json paths = json::object();
  paths["trace"] = "trace.log";
  paths["report_json"] = "report.json";
  paths["report_txt"] = "report.txt";
  paths["egress"] = "egress.jsonl";
  paths["dns"] = "dns.jsonl";
  manifest["artifacts"] = paths;
  write_file(base / "manifest.json", manifest.dump(2) + "\n");
  artifacts.manifest = std::move(manifest);
  return artifacts;
}

}  // namespace swarmsim
