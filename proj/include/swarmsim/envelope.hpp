#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

#include "swarmsim/bytes.hpp"
#include "swarmsim/rng.hpp"

namespace swarmsim {

inline constexpr std::size_t kDefaultMaxPayloadBytes = 1 << 20;  // 1 MiB
inline constexpr std::size_t kDefaultNonceWindow = 4096;

struct EnvelopeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Short agent identifier; must be usable as a topic segment.
struct AgentId {
  std::string id;

  static bool valid(std::string_view s);
  auto operator<=>(const AgentId&) const = default;
};

enum class MsgType {
  command,
  echo_probe,
  echo_reply,
  heartbeat,
  audit,
  status,
  state_ref,
};

const char* to_string(MsgType t);
std::optional<MsgType> msg_type_from_string(std::string_view s);

// 128-bit id carried as 32 lowercase hex chars.
struct CorrelationId {
  std::string hex;

  static CorrelationId generate(Rng& rng);
  static bool valid(std::string_view s);
  auto operator<=>(const CorrelationId&) const = default;
};

struct Envelope {
  std::optional<AgentId> sender;
  MsgType msg_type = MsgType::status;
  Micros timestamp_us = 0;
  std::optional<CorrelationId> correlation_id;
  Bytes payload;

  bool operator==(const Envelope&) const = default;
};

struct AuthBlock {
  std::string key_id;
  std::string nonce_hex;     // 32 lowercase hex chars
  std::uint64_t counter = 0; // strictly increasing per (sender, key_id)
  Bytes signature;           // HMAC-SHA256 tag, 32 bytes

  bool operator==(const AuthBlock&) const = default;
};

enum class VerifyReason {
  missing_auth,
  unknown_key,
  bad_signature,
  replayed_nonce,
  stale_counter,
};

const char* to_string(VerifyReason r);

struct VerificationResult {
  bool verified = false;
  std::optional<VerifyReason> reason;  // set exactly when !verified

  static VerificationResult ok() { return {true, std::nullopt}; }
  static VerificationResult rejected(VerifyReason r) { return {false, r}; }
};

struct KeyEntry {
  std::string sender;
  Bytes key;
};

// key_id -> (sender, secret). File format: one entry per line,
// "key_id sender hex_key"; blank lines and '#' comments ignored.
struct Keystore {
  std::map<std::string, KeyEntry> keys;

  void add(const std::string& key_id, const std::string& sender, Bytes key);
  const KeyEntry* find(const std::string& key_id) const;
  std::optional<std::string> key_id_for_sender(const std::string& sender) const;
  bool empty() const { return keys.empty(); }

  static Keystore parse(std::string_view text);  // throws EnvelopeError
  std::string serialize() const;
};

// Per-sender signing counters, advanced by sign_envelope.
struct CounterState {
  std::map<std::pair<std::string, std::string>, std::uint64_t> last;  // (sender, key_id)
};

// Seen-nonce window plus highest accepted counter, per sender.
class ReplayState {
 public:
  explicit ReplayState(std::size_t window = kDefaultNonceWindow)
      : window_(window) {}

  bool nonce_seen(const std::string& sender, const std::string& nonce) const;
  std::uint64_t highest_counter(const std::string& sender,
                                const std::string& key_id) const;
  void record(const std::string& sender, const std::string& key_id,
              const std::string& nonce, std::uint64_t counter);

 private:
  struct PerSender {
    std::deque<std::string> order;
    std::set<std::string> seen;
    std::map<std::string, std::uint64_t> highest;  // key_id -> counter
  };
  std::size_t window_;
  std::map<std::string, PerSender> senders_;
};

enum class DecodeMode { lenient, strict };

enum class DecodeErrorKind {
  malformed,        // not valid serialized form at all
  missing_field,    // strict only, except fields required in both modes
  payload_too_large,
};

struct DecodeError {
  DecodeErrorKind kind;
  std::string detail;  // field name or parse message
};

struct DecodedEnvelope {
  Envelope env;
  std::optional<AuthBlock> auth;
};

using DecodeResult = std::variant<DecodedEnvelope, DecodeError>;

// Canonical encoding: UTF-8 JSON object, lexicographically sorted keys,
// no insignificant whitespace, integers as decimal text, binary fields as
// lowercase hex. Absent optional fields are omitted entirely. The auth
// block, when present, is the top-level "auth" object.
// Throws EnvelopeError when payload exceeds max_payload.
Bytes encode_envelope(const Envelope& env,
                      const std::optional<AuthBlock>& auth = std::nullopt,
                      std::size_t max_payload = kDefaultMaxPayloadBytes);

// Lenient mode tolerates absent sender / correlation_id and ignores unknown
// fields; strict mode requires every envelope field and rejects unknown keys.
DecodeResult decode_envelope(const Bytes& bytes, DecodeMode mode,
                             std::size_t max_payload = kDefaultMaxPayloadBytes);

// MAC input is canonical envelope bytes (without auth) followed by key_id,
// nonce and counter, newline-separated. Advances counter_state by one.
// Throws EnvelopeError when env.sender is absent or the key is not
// registered for the sender.
AuthBlock sign_envelope(const Envelope& env, const std::string& key_id,
                        const Keystore& keystore, Rng& nonce_source,
                        CounterState& counter_state);

// All failures are verdicts. replay_state is updated only on success.
VerificationResult verify_envelope(const Envelope& env,
                                   const std::optional<AuthBlock>& auth,
                                   const Keystore& keystore,
                                   ReplayState& replay_state);

}  // namespace swarmsim
