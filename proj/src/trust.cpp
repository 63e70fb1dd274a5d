#include "swarmsim/trust.hpp"

#include <nlohmann/json.hpp>

namespace swarmsim {

using json = nlohmann::json;

const char* to_string(TrustMode m) {
  return m == TrustMode::baseline ? "baseline" : "hardened";
}

const char* to_string(TrustVerdict v) {
  switch (v) {
    case TrustVerdict::accept: return "accept";
    case TrustVerdict::quarantine: return "quarantine";
    case TrustVerdict::refuse: return "refuse";
    case TrustVerdict::require_oob: return "require_oob";
  }
  return "unknown";
}

void TrustState::note_heartbeat(const std::string& sender,
                                const std::string& tag) {
  heartbeat_tag[sender] = tag;
  if (!sender_score.count(sender)) sender_score[sender] = 1.0;
}

namespace {

std::optional<std::string> payload_tag(const Envelope& env) {
  json j = json::parse(env.payload.begin(), env.payload.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (!j.contains("tag") || !j["tag"].is_string()) return std::nullopt;
  return j["tag"].get<std::string>();
}

// A message is a detected forgery when the claimed sender has a live
// heartbeat beacon and the message's payload stamp contradicts it.
bool looks_forged(const TrustState& state, const Envelope& env) {
  if (!env.sender) return false;  // anonymous: untraceable, not contradicted
  auto hb = state.heartbeat_tag.find(env.sender->id);
  if (hb == state.heartbeat_tag.end()) return false;
  auto tag = payload_tag(env);
  return !tag || *tag != hb->second;
}

void bump_score(TrustState& state, const std::string& sender, double delta) {
  double& score = state.sender_score.try_emplace(sender, 1.0).first->second;
  score += delta;
  if (score < 0.0) score = 0.0;
  if (score > 1.0) score = 1.0;
}

}  // namespace

TrustVerdict assess(TrustState& state, Micros now_us, const Envelope& env,
                    const VerificationResult& verification) {
  const bool forged = looks_forged(state, env);

  if (state.mode == TrustMode::hardened) {
    if (verification.verified) {
      if (env.sender) bump_score(state, env.sender->id, +0.05);
      return TrustVerdict::accept;
    }
    if (forged) {
      state.quarantine.push_back(QuarantinedEnvelope{
          now_us, env, "beacon contradiction for claimed sender"});
      bump_score(state, env.sender->id, -0.25);
      return TrustVerdict::quarantine;
    }
    state.pending_oob += 1;
    return TrustVerdict::require_oob;
  }

  // baseline
  if (state.channel_distrust) {
    state.refusals.push_back(RefusalRecord{
        now_us, env.sender ? std::optional(env.sender->id) : std::nullopt,
        verification.verified});
    return TrustVerdict::refuse;
  }
  if (forged) {
    state.forgery_count += 1;
    bump_score(state, env.sender->id, -0.25);
    if (state.forgery_count >= state.distrust_threshold) {
      state.channel_distrust = true;
      state.distrust_since = now_us;
    }
    state.refusals.push_back(RefusalRecord{
        now_us, std::optional(env.sender->id), verification.verified});
    return TrustVerdict::refuse;
  }
  if (env.sender) bump_score(state, env.sender->id, +0.02);
  return TrustVerdict::accept;
}

void oob_confirm(TrustState& state, Micros now_us) {
  state.oob_confirmations += 1;
  if (state.channel_distrust) {
    state.channel_distrust = false;
    state.oob_reset_at = now_us;
    state.forgery_count = 0;
  }
  if (state.pending_oob > 0) state.pending_oob -= 1;
}

LockoutReport lockout_report(const TrustState& state, Micros run_end_us) {
  LockoutReport report;
  for (const auto& r : state.refusals) {
    report.refused_commands += 1;
    if (r.was_verified) report.refused_verified += 1;
  }
  if (state.distrust_since) {
    const Micros end = state.oob_reset_at ? *state.oob_reset_at : run_end_us;
    report.lockout_us =
        end > *state.distrust_since ? end - *state.distrust_since : 0;
  }
  return report;
}

}  // namespace swarmsim
