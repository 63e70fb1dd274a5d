#include "swarmsim/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "swarmsim/attacks.hpp"
#include "swarmsim/digest.hpp"
#include "swarmsim/report.hpp"
#include "swarmsim/runner.hpp"
#include "swarmsim/scenario.hpp"

namespace swarmsim {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInvariant = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string posture;  // "", "baseline", "hardened"
  std::string format = "table";
};

std::string default_out_root() {
  if (const char* env = std::getenv("SWARMSIM_OUT_DIR")) return env;
  return "runs";
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out) {
  cmd->add_option("--config", opts.config_path, "scenario config file")
      ->required();
  if (needs_out) {
    cmd->add_option("--out", opts.out_dir,
                    "output directory (default: $SWARMSIM_OUT_DIR/<name> or "
                    "runs/<name>)");
    cmd->add_option("--seed", opts.seed, "override the config's seed");
    cmd->add_option("--posture", opts.posture, "override posture")
        ->check(CLI::IsMember({"baseline", "hardened"}));
    cmd->add_option("--format", opts.format, "report format on stdout")
        ->check(CLI::IsMember({"table", "machine"}));
  }
}

int load_and_validate(const CommonOpts& opts, ScenarioConfig& cfg,
                      std::string& digest) {
  const std::string text = read_file(opts.config_path);
  digest = sha256_hex(text);
  cfg = parse_scenario(text, fs::path(opts.config_path).parent_path().string());
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.posture == "baseline") cfg.posture = BrokerMode::baseline;
  if (opts.posture == "hardened") cfg.posture = BrokerMode::hardened;
  const auto errors = validate(cfg);
  if (!errors.empty()) {
    for (const auto& e : errors) {
      std::cerr << "config error: " << e.path << ": " << e.message << "\n";
    }
    return kExitValidation;
  }
  return kExitOk;
}

std::string resolve_out_dir(const CommonOpts& opts, const ScenarioConfig& cfg,
                            const char* suffix) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  return default_out_root() + "/" + cfg.name + suffix;
}

void print_report(const CommonOpts& opts, const nlohmann::json& report) {
  if (opts.format == "machine") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << render_text(report);
  }
}

int cmd_validate(const CommonOpts& opts) {
  ScenarioConfig cfg;
  std::string digest;
  const int rc = load_and_validate(opts, cfg, digest);
  if (rc == kExitOk) {
    std::cout << "ok: " << cfg.name << " (" << cfg.agents.size() << " agents, "
              << cfg.devices.size() << " devices)\n";
  }
  return rc;
}

int cmd_run(const CommonOpts& opts) {
  ScenarioConfig cfg;
  std::string digest;
  const int rc = load_and_validate(opts, cfg, digest);
  if (rc != kExitOk) return rc;
  const std::string out = resolve_out_dir(opts, cfg, "");
  const RunArtifacts artifacts = run_scenario(cfg, out, digest);
  print_report(opts, artifacts.report);
  std::cerr << "artifacts: " << out << "\n";
  return kExitOk;
}

int cmd_attack_suite(const CommonOpts& opts) {
  ScenarioConfig cfg;
  std::string digest;
  const int rc = load_and_validate(opts, cfg, digest);
  if (rc != kExitOk) return rc;

  const std::vector<AttackOutcome> outcomes = run_suite(cfg);
  nlohmann::json doc = nlohmann::json::object();
  doc["schema_version"] = kReportSchemaVersion;
  doc["scenario"] = cfg.name;
  doc["posture"] = to_string(cfg.posture);
  doc["seed"] = cfg.seed;
  nlohmann::json rows = nlohmann::json::array();
  for (const AttackOutcome& out : outcomes) {
    nlohmann::json row = nlohmann::json::object();
    row["kind"] = to_string(out.kind);
    row["label"] = out.label;
    row["broker_response"] = out.broker_response;
    row["accepted"] = out.accepted;
    if (out.reject_reason) row["reject_reason"] = to_string(*out.reject_reason);
    row["executions"] = out.executions;
    row["impact"] = out.impact;
    nlohmann::json ev = nlohmann::json::object();
    for (const auto& [k, v] : out.evidence) ev[k] = v;
    row["evidence"] = ev;
    rows.push_back(std::move(row));
  }
  doc["attacks"] = rows;

  const std::string out_dir = resolve_out_dir(opts, cfg, "-suite");
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "suite.json", std::ios::binary);
    f << doc.dump(2) << "\n";
  }

  if (opts.format == "machine") {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "Attack suite (" << to_string(cfg.posture) << " posture)\n";
    std::cout << "Attack                   Broker Response              Impact\n";
    for (const AttackOutcome& out : outcomes) {
      auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s += std::string(w - s.size(), ' ');
        return s + " ";
      };
      std::cout << pad(out.label, 24) << pad(out.broker_response, 28)
                << out.impact << "\n";
    }
  }
  std::cerr << "artifacts: " << out_dir << "\n";
  return kExitOk;
}

int cmd_report(const std::string& in_dir) {
  const fs::path path = fs::path(in_dir) / "report.json";
  const std::string text = read_file(path.string());
  const nlohmann::json report = nlohmann::json::parse(text);
  std::cout << render_text(report);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"deterministic edge agent swarm coordination-security simulator"};
  app.require_subcommand(1);

  CommonOpts validate_opts, run_opts, suite_opts, latency_opts, failover_opts,
      egress_opts;
  std::string report_in;

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a scenario config");
  add_common(validate_cmd, validate_opts, false);

  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario");
  add_common(run_cmd, run_opts, true);

  CLI::App* suite_cmd = app.add_subcommand(
      "attack-suite", "run every attack kind against the scenario");
  add_common(suite_cmd, suite_opts, true);

  CLI::App* latency_cmd = app.add_subcommand(
      "latency-bench", "run the scenario and report echo latency");
  add_common(latency_cmd, latency_opts, true);

  CLI::App* failover_cmd = app.add_subcommand(
      "failover-bench", "run the scenario and report failover windows");
  add_common(failover_cmd, failover_opts, true);

  CLI::App* egress_cmd = app.add_subcommand(
      "egress-audit", "run the scenario and report the egress ledger");
  add_common(egress_cmd, egress_opts, true);

  CLI::App* report_cmd =
      app.add_subcommand("report", "re-render tables from a run directory");
  report_cmd->add_option("--in", report_in, "run directory with report.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(validate_opts);
    if (run_cmd->parsed()) return cmd_run(run_opts);
    if (suite_cmd->parsed()) return cmd_attack_suite(suite_opts);
    if (latency_cmd->parsed()) return cmd_run(latency_opts);
    if (failover_cmd->parsed()) return cmd_run(failover_opts);
    if (egress_cmd->parsed()) return cmd_run(egress_opts);
    if (report_cmd->parsed()) return cmd_report(report_in);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
  return kExitValidation;
}

}  // namespace swarmsim
