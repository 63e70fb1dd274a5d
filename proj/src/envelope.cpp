#include "swarmsim/envelope.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "swarmsim/digest.hpp"

namespace swarmsim {

using json = nlohmann::json;

bool AgentId::valid(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == '/' || c == '+' || c == '#') return false;
  }
  return true;
}

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::command: return "command";
    case MsgType::echo_probe: return "echo_probe";
    case MsgType::echo_reply: return "echo_reply";
    case MsgType::heartbeat: return "heartbeat";
    case MsgType::audit: return "audit";
    case MsgType::status: return "status";
    case MsgType::state_ref: return "state_ref";
  }
  return "unknown";
}

std::optional<MsgType> msg_type_from_string(std::string_view s) {
  static const std::map<std::string_view, MsgType> table = {
      {"command", MsgType::command},     {"echo_probe", MsgType::echo_probe},
      {"echo_reply", MsgType::echo_reply}, {"heartbeat", MsgType::heartbeat},
      {"audit", MsgType::audit},         {"status", MsgType::status},
      {"state_ref", MsgType::state_ref},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

const char* to_string(VerifyReason r) {
  switch (r) {
    case VerifyReason::missing_auth: return "missing_auth";
    case VerifyReason::unknown_key: return "unknown_key";
    case VerifyReason::bad_signature: return "bad_signature";
    case VerifyReason::replayed_nonce: return "replayed_nonce";
    case VerifyReason::stale_counter: return "stale_counter";
  }
  return "unknown";
}

namespace {

bool is_hex_lower(std::string_view s) {
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

CorrelationId CorrelationId::generate(Rng& rng) {
  std::uint8_t raw[16];
  for (int half = 0; half < 2; ++half) {
    std::uint64_t v = rng.next_u64();
    for (int i = 0; i < 8; ++i) {
      raw[half * 8 + i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    }
  }
  return CorrelationId{hex_encode(raw, sizeof raw)};
}

bool CorrelationId::valid(std::string_view s) {
  return s.size() == 32 && is_hex_lower(s);
}

void Keystore::add(const std::string& key_id, const std::string& sender,
                   Bytes key) {
  keys[key_id] = KeyEntry{sender, std::move(key)};
}

const KeyEntry* Keystore::find(const std::string& key_id) const {
  auto it = keys.find(key_id);
  return it == keys.end() ? nullptr : &it->second;
}

std::optional<std::string> Keystore::key_id_for_sender(
    const std::string& sender) const {
  for (const auto& [kid, entry] : keys) {
    if (entry.sender == sender) return kid;
  }
  return std::nullopt;
}

Keystore Keystore::parse(std::string_view text) {
  Keystore ks;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string key_id, sender, hexkey;
    if (!(fields >> key_id)) continue;  // blank
    if (!(fields >> sender >> hexkey)) {
      throw EnvelopeError("keystore line " + std::to_string(lineno) +
                          ": expected 'key_id sender hex_key'");
    }
    std::string extra;
    if (fields >> extra) {
      throw EnvelopeError("keystore line " + std::to_string(lineno) +
                          ": trailing tokens");
    }
    auto key = hex_decode(hexkey);
    if (!key || key->empty()) {
      throw EnvelopeError("keystore line " + std::to_string(lineno) +
                          ": bad hex key");
    }
    if (!AgentId::valid(sender)) {
      throw EnvelopeError("keystore line " + std::to_string(lineno) +
                          ": bad sender id");
    }
    ks.add(key_id, sender, std::move(*key));
  }
  return ks;
}

std::string Keystore::serialize() const {
  std::string out;
  for (const auto& [kid, entry] : keys) {
    out += kid + " " + entry.sender + " " + hex_encode(entry.key) + "\n";
  }
  return out;
}

bool ReplayState::nonce_seen(const std::string& sender,
                             const std::string& nonce) const {
  auto it = senders_.find(sender);
  if (it == senders_.end()) return false;
  return it->second.seen.count(nonce) > 0;
}

std::uint64_t ReplayState::highest_counter(const std::string& sender,
                                           const std::string& key_id) const {
  auto it = senders_.find(sender);
  if (it == senders_.end()) return 0;
  auto kt = it->second.highest.find(key_id);
  return kt == it->second.highest.end() ? 0 : kt->second;
}

void ReplayState::record(const std::string& sender, const std::string& key_id,
                         const std::string& nonce, std::uint64_t counter) {
  PerSender& st = senders_[sender];
  if (st.seen.insert(nonce).second) {
    st.order.push_back(nonce);
    while (st.order.size() > window_) {
      st.seen.erase(st.order.front());
      st.order.pop_front();
    }
  }
  std::uint64_t& high = st.highest[key_id];
  if (counter > high) high = counter;
}

namespace {

json auth_to_json(const AuthBlock& auth) {
  json j = json::object();
  j["counter"] = auth.counter;
  j["key_id"] = auth.key_id;
  j["nonce"] = auth.nonce_hex;
  j["sig"] = hex_encode(auth.signature);
  return j;
}

}  // namespace

Bytes encode_envelope(const Envelope& env, const std::optional<AuthBlock>& auth,
                      std::size_t max_payload) {
  if (env.payload.size() > max_payload) {
    throw EnvelopeError("payload exceeds max size (" +
                        std::to_string(env.payload.size()) + " > " +
                        std::to_string(max_payload) + ")");
  }
  // json object keys are kept sorted by the underlying std::map, which is
  // exactly the canonical order.
  json j = json::object();
  if (auth) j["auth"] = auth_to_json(*auth);
  if (env.correlation_id) j["corr_id"] = env.correlation_id->hex;
  j["payload"] = hex_encode(env.payload);
  if (env.sender) j["sender"] = env.sender->id;
  j["ts_us"] = env.timestamp_us;
  j["type"] = to_string(env.msg_type);
  const std::string s = j.dump();
  return Bytes(s.begin(), s.end());
}

namespace {

DecodeResult decode_fail(DecodeErrorKind kind, std::string detail) {
  return DecodeError{kind, std::move(detail)};
}

}  // namespace

DecodeResult decode_envelope(const Bytes& bytes, DecodeMode mode,
                             std::size_t max_payload) {
  const bool strict = mode == DecodeMode::strict;
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return decode_fail(DecodeErrorKind::malformed, "not a JSON object");
  }

  static const std::set<std::string> known = {
      "auth", "corr_id", "payload", "sender", "ts_us", "type"};
  if (strict) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!known.count(it.key())) {
        return decode_fail(DecodeErrorKind::malformed,
                           "unknown field " + it.key());
      }
    }
  }

  DecodedEnvelope out;

  // type: required in both modes
  if (!j.contains("type")) {
    return strict ? decode_fail(DecodeErrorKind::missing_field, "type")
                  : decode_fail(DecodeErrorKind::malformed, "missing type");
  }
  if (!j["type"].is_string()) {
    return decode_fail(DecodeErrorKind::malformed, "type not a string");
  }
  auto mt = msg_type_from_string(j["type"].get<std::string>());
  if (!mt) {
    return decode_fail(DecodeErrorKind::malformed,
                       "unknown type " + j["type"].get<std::string>());
  }
  out.env.msg_type = *mt;

  // ts_us: required in both modes, non-negative integer
  if (!j.contains("ts_us")) {
    return strict ? decode_fail(DecodeErrorKind::missing_field, "ts_us")
                  : decode_fail(DecodeErrorKind::malformed, "missing ts_us");
  }
  if (!j["ts_us"].is_number_integer() ||
      (j["ts_us"].is_number_integer() && !j["ts_us"].is_number_unsigned() &&
       j["ts_us"].get<std::int64_t>() < 0)) {
    return decode_fail(DecodeErrorKind::malformed, "ts_us not a non-negative integer");
  }
  out.env.timestamp_us = j["ts_us"].get<std::uint64_t>();

  // payload: required in both modes
  if (!j.contains("payload")) {
    return strict ? decode_fail(DecodeErrorKind::missing_field, "payload")
                  : decode_fail(DecodeErrorKind::malformed, "missing payload");
  }
  if (!j["payload"].is_string()) {
    return decode_fail(DecodeErrorKind::malformed, "payload not a string");
  }
  {
    const std::string& hex = j["payload"].get_ref<const std::string&>();
    if (!is_hex_lower(hex)) {
      return decode_fail(DecodeErrorKind::malformed, "payload not lowercase hex");
    }
    auto p = hex_decode(hex);
    if (!p) return decode_fail(DecodeErrorKind::malformed, "payload not hex");
    if (p->size() > max_payload) {
      return decode_fail(DecodeErrorKind::payload_too_large,
                         std::to_string(p->size()));
    }
    out.env.payload = std::move(*p);
  }

  // sender: optional in lenient, required in strict
  if (j.contains("sender")) {
    if (!j["sender"].is_string() ||
        !AgentId::valid(j["sender"].get<std::string>())) {
      return decode_fail(DecodeErrorKind::malformed, "bad sender");
    }
    out.env.sender = AgentId{j["sender"].get<std::string>()};
  } else if (strict) {
    return decode_fail(DecodeErrorKind::missing_field, "sender");
  }

  // corr_id: optional in lenient, required in strict
  if (j.contains("corr_id")) {
    if (!j["corr_id"].is_string() ||
        !CorrelationId::valid(j["corr_id"].get<std::string>())) {
      return decode_fail(DecodeErrorKind::malformed, "bad corr_id");
    }
    out.env.correlation_id = CorrelationId{j["corr_id"].get<std::string>()};
  } else if (strict) {
    return decode_fail(DecodeErrorKind::missing_field, "corr_id");
  }

  // auth: optional in both modes
  if (j.contains("auth")) {
    const json& a = j["auth"];
    if (!a.is_object() || !a.contains("key_id") || !a.contains("nonce") ||
        !a.contains("counter") || !a.contains("sig") ||
        !a["key_id"].is_string() || !a["nonce"].is_string() ||
        !a["counter"].is_number_unsigned() || !a["sig"].is_string()) {
      return decode_fail(DecodeErrorKind::malformed, "bad auth block");
    }
    AuthBlock auth;
    auth.key_id = a["key_id"].get<std::string>();
    auth.nonce_hex = a["nonce"].get<std::string>();
    if (auth.nonce_hex.size() != 32 || !is_hex_lower(auth.nonce_hex)) {
      return decode_fail(DecodeErrorKind::malformed, "bad auth nonce");
    }
    auth.counter = a["counter"].get<std::uint64_t>();
    auto sig = hex_decode(a["sig"].get<std::string>());
    if (!sig || sig->size() != 32) {
      return decode_fail(DecodeErrorKind::malformed, "bad auth sig");
    }
    auth.signature = std::move(*sig);
    out.auth = std::move(auth);
  }

  return out;
}

namespace {

Bytes mac_input(const Envelope& env, const std::string& key_id,
                const std::string& nonce_hex, std::uint64_t counter) {
  Bytes input = encode_envelope(env, std::nullopt);
  const std::string tail = "\n" + key_id + "\n" + nonce_hex + "\n" +
                           std::to_string(counter);
  input.insert(input.end(), tail.begin(), tail.end());
  return input;
}

}  // namespace

AuthBlock sign_envelope(const Envelope& env, const std::string& key_id,
                        const Keystore& keystore, Rng& nonce_source,
                        CounterState& counter_state) {
  if (!env.sender) {
    throw EnvelopeError("cannot sign an envelope with absent sender");
  }
  const KeyEntry* entry = keystore.find(key_id);
  if (!entry || entry->sender != env.sender->id) {
    throw EnvelopeError("key " + key_id + " is not registered for sender " +
                        env.sender->id);
  }
  AuthBlock auth;
  auth.key_id = key_id;
  auth.nonce_hex = CorrelationId::generate(nonce_source).hex;
  std::uint64_t& last = counter_state.last[{env.sender->id, key_id}];
  auth.counter = ++last;
  const Digest256 mac =
      hmac_sha256(entry->key, mac_input(env, key_id, auth.nonce_hex, auth.counter));
  auth.signature.assign(mac.begin(), mac.end());
  return auth;
}

VerificationResult verify_envelope(const Envelope& env,
                                   const std::optional<AuthBlock>& auth,
                                   const Keystore& keystore,
                                   ReplayState& replay_state) {
  if (!auth) return VerificationResult::rejected(VerifyReason::missing_auth);
  if (!env.sender) {
    // Anonymous envelopes are unsignable, so no key can bind to them.
    return VerificationResult::rejected(VerifyReason::unknown_key);
  }
  const KeyEntry* entry = keystore.find(auth->key_id);
  if (!entry || entry->sender != env.sender->id) {
    return VerificationResult::rejected(VerifyReason::unknown_key);
  }
  if (auth->signature.size() != 32) {
    return VerificationResult::rejected(VerifyReason::bad_signature);
  }
  const Digest256 expect = hmac_sha256(
      entry->key, mac_input(env, auth->key_id, auth->nonce_hex, auth->counter));
  Digest256 got{};
  std::copy(auth->signature.begin(), auth->signature.end(), got.begin());
  if (!digest_equal(expect, got)) {
    return VerificationResult::rejected(VerifyReason::bad_signature);
  }
  const std::string& sender = env.sender->id;
  if (replay_state.nonce_seen(sender, auth->nonce_hex)) {
    return VerificationResult::rejected(VerifyReason::replayed_nonce);
  }
  if (auth->counter <= replay_state.highest_counter(sender, auth->key_id)) {
    return VerificationResult::rejected(VerifyReason::stale_counter);
  }
  replay_state.record(sender, auth->key_id, auth->nonce_hex, auth->counter);
  return VerificationResult::ok();
}

}  // namespace swarmsim
