#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/bytes.hpp"
#include "swarmsim/envelope.hpp"

namespace swarmsim {

enum class TrustMode { baseline, hardened };

const char* to_string(TrustMode m);

enum class TrustVerdict { accept, quarantine, refuse, require_oob };

const char* to_string(TrustVerdict v);

struct QuarantinedEnvelope {
  Micros time_us = 0;
  Envelope env;
  std::string why;
};

struct RefusalRecord {
  Micros time_us = 0;
  std::optional<std::string> claimed_sender;
  bool was_verified = false;  // a verified command refused (must stay 0 in
                              // hardened mode)
};

// Per-defender trust state. Forgery detection is semantic: every genuine
// agent stamps its payload with the beacon tag it announces on the
// heartbeat topic, so a message whose claimed sender's live beacon
// contradicts the stamp is treated as forged without any cryptography.
struct TrustState {
  TrustMode mode = TrustMode::baseline;
  std::size_t distrust_threshold = 5;

  std::map<std::string, double> sender_score;   // in [0,1]
  std::map<std::string, std::string> heartbeat_tag;  // sender -> live beacon
  std::size_t forgery_count = 0;
  bool channel_distrust = false;  // never set in hardened mode
  std::optional<Micros> distrust_since;
  std::optional<Micros> oob_reset_at;

  std::vector<QuarantinedEnvelope> quarantine;
  std::vector<RefusalRecord> refusals;
  std::size_t oob_confirmations = 0;
  std::size_t pending_oob = 0;

  void note_heartbeat(const std::string& sender, const std::string& tag);
};

// Simulated trusted secondary channel; confirmations are axiomatically
// authentic and arrive after a configured human response delay.
struct OobChannel {
  Micros response_delay_us = 60'000'000;  // 60 s default
};

// Decide what to do with a delivered inbox command. Baseline counts
// detected forgeries and, at the threshold, distrusts the whole channel
// until an out-of-band confirmation resets it. Hardened quarantines
// forgeries individually, accepts verified traffic regardless of flood
// volume, and routes unverifiable-but-plausible messages to out-of-band
// confirmation.
TrustVerdict assess(TrustState& state, Micros now_us, const Envelope& env,
                    const VerificationResult& verification);

// Out-of-band confirmation received: clears channel distrust.
void oob_confirm(TrustState& state, Micros now_us);

struct LockoutReport {
  Micros lockout_us = 0;  // distrust set -> OOB reset (or run end if never)
  std::size_t refused_commands = 0;
  std::size_t refused_verified = 0;
};

LockoutReport lockout_report(const TrustState& state, Micros run_end_us);

}  // namespace swarmsim
