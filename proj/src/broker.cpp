#include "swarmsim/broker.hpp"

#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace swarmsim {

using json = nlohmann::json;

const char* to_string(BrokerMode m) {
  return m == BrokerMode::baseline ? "baseline" : "hardened";
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::malformed: return "malformed";
    case RejectReason::missing_field: return "missing_field";
    case RejectReason::payload_too_large: return "payload_too_large";
    case RejectReason::missing_auth: return "missing_auth";
    case RejectReason::unknown_key: return "unknown_key";
    case RejectReason::bad_signature: return "bad_signature";
    case RejectReason::replayed_nonce: return "replayed_nonce";
    case RejectReason::stale_counter: return "stale_counter";
    case RejectReason::acl_denied: return "acl_denied";
  }
  return "unknown";
}

bool Acl::allows_publish(const std::string& principal,
                         const Topic& topic) const {
  for (const AclRule& r : rules) {
    if (r.action == AclAction::publish && r.principal == principal &&
        topic_matches(r.filter, topic)) {
      return true;
    }
  }
  return false;
}

bool Acl::allows_subscribe(const std::string& principal,
                           const TopicFilter& filter) const {
  for (const AclRule& r : rules) {
    if (r.action == AclAction::subscribe && r.principal == principal &&
        filter_covers(r.filter, filter)) {
      return true;
    }
  }
  return false;
}

Acl Acl::parse(std::string_view text) {
  Acl acl;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string principal, action, filter;
    if (!(fields >> principal)) continue;
    if (!(fields >> action >> filter)) {
      throw std::runtime_error("acl line " + std::to_string(lineno) +
                               ": expected 'principal action filter'");
    }
    std::string extra;
    if (fields >> extra) {
      throw std::runtime_error("acl line " + std::to_string(lineno) +
                               ": trailing tokens");
    }
    AclRule rule;
    rule.principal = principal;
    if (action == "publish") {
      rule.action = AclAction::publish;
    } else if (action == "subscribe") {
      rule.action = AclAction::subscribe;
    } else {
      throw std::runtime_error("acl line " + std::to_string(lineno) +
                               ": action must be publish|subscribe");
    }
    auto f = TopicFilter::parse(filter);
    if (!f) {
      throw std::runtime_error("acl line " + std::to_string(lineno) +
                               ": bad topic filter " + filter);
    }
    rule.filter = std::move(*f);
    acl.rules.push_back(std::move(rule));
  }
  return acl;
}

std::string Acl::serialize() const {
  std::string out;
  for (const AclRule& r : rules) {
    out += r.principal;
    out += r.action == AclAction::publish ? " publish " : " subscribe ";
    out += r.filter.str();
    out += "\n";
  }
  return out;
}

Bytes wrap_mirror(const Topic& orig_topic, Micros broker_ts_us,
                  const Bytes& frame) {
  json j = json::object();
  j["broker_ts_us"] = broker_ts_us;
  j["frame"] = hex_encode(frame);
  j["orig_topic"] = orig_topic.str();
  const std::string s = j.dump();
  return Bytes(s.begin(), s.end());
}

std::optional<MirrorFrame> unwrap_mirror(const Bytes& bytes) {
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("broker_ts_us") ||
      !j.contains("frame") || !j.contains("orig_topic")) {
    return std::nullopt;
  }
  MirrorFrame out;
  if (!j["broker_ts_us"].is_number_unsigned() || !j["frame"].is_string() ||
      !j["orig_topic"].is_string()) {
    return std::nullopt;
  }
  out.broker_ts_us = j["broker_ts_us"].get<Micros>();
  out.orig_topic = j["orig_topic"].get<std::string>();
  auto frame = hex_decode(j["frame"].get<std::string>());
  if (!frame) return std::nullopt;
  out.frame = std::move(*frame);
  return out;
}

SessionId Broker::connect(const std::string& principal,
                          const std::string& link) {
  const SessionId id = next_session_++;
  BrokerSession s;
  s.id = id;
  s.principal = principal;
  s.link = link;
  s.connected = true;
  sessions_.emplace(id, std::move(s));
  return id;
}

void Broker::disconnect(SessionId id) {
  BrokerSession* s = session(id);
  if (!s) throw std::out_of_range("unknown session");
  s->parked = true;
}

void Broker::restore(SessionId id) {
  BrokerSession* s = session(id);
  if (!s || !s->connected) throw std::out_of_range("restore of never-connected session");
  s->parked = false;
}

BrokerSession* Broker::session(SessionId id) {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

const BrokerSession* Broker::session(SessionId id) const {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

Broker::SubscribeResult Broker::subscribe(SessionId id,
                                          const TopicFilter& filter,
                                          const BrokerPolicy& policy) {
  BrokerSession* s = session(id);
  if (!s || !s->connected) throw std::out_of_range("subscribe on unknown session");
  if (policy.mode == BrokerMode::hardened &&
      !policy.acl.allows_subscribe(s->principal, filter)) {
    return SubscribeResult{false, 0};
  }
  for (const auto& [sub_id, sub] : s->subs) {
    if (sub.filter == filter) return SubscribeResult{true, sub_id};  // idempotent
  }
  const std::uint64_t sub_id = next_sub_++;
  s->subs.emplace(sub_id, Subscription{sub_id, id, filter});
  return SubscribeResult{true, sub_id};
}

namespace {

RejectReason reason_from_decode(const DecodeError& err) {
  switch (err.kind) {
    case DecodeErrorKind::missing_field: return RejectReason::missing_field;
    case DecodeErrorKind::payload_too_large: return RejectReason::payload_too_large;
    case DecodeErrorKind::malformed: return RejectReason::malformed;
  }
  return RejectReason::malformed;
}

RejectReason reason_from_verify(VerifyReason r) {
  switch (r) {
    case VerifyReason::missing_auth: return RejectReason::missing_auth;
    case VerifyReason::unknown_key: return RejectReason::unknown_key;
    case VerifyReason::bad_signature: return RejectReason::bad_signature;
    case VerifyReason::replayed_nonce: return RejectReason::replayed_nonce;
    case VerifyReason::stale_counter: return RejectReason::stale_counter;
  }
  return RejectReason::bad_signature;
}

}  // namespace

DeliveryRecord Broker::publish(SessionId id, const Topic& topic,
                               const Bytes& bytes, const BrokerPolicy& policy,
                               Micros now_us, std::size_t max_payload) {
  BrokerSession* pub = session(id);
  if (!pub || !pub->connected) throw std::out_of_range("publish on unknown session");

  DeliveryRecord rec;
  rec.broker_time_us = now_us;
  rec.publisher = id;
  rec.publisher_principal = pub->principal;
  rec.topic = topic.str();
  rec.wire_len = bytes.size();
  rec.bytes = bytes;

  // Bookkeeping decode; also the baseline acceptance gate.
  auto lenient = decode_envelope(bytes, DecodeMode::lenient, max_payload);
  if (auto* dec = std::get_if<DecodedEnvelope>(&lenient)) {
    rec.msg_type = dec->env.msg_type;
    if (dec->env.sender) rec.sender = dec->env.sender->id;
    if (dec->env.correlation_id) rec.corr_id = dec->env.correlation_id->hex;
    rec.payload_len = dec->env.payload.size();
  }

  if (policy.mode == BrokerMode::baseline) {
    if (auto* err = std::get_if<DecodeError>(&lenient)) {
      rec.accepted = false;
      rec.reason = reason_from_decode(*err);
      rec.reason_detail = err->detail;
      return rec;
    }
    rec.accepted = true;
  } else {
    auto strict = decode_envelope(bytes, DecodeMode::strict, max_payload);
    if (auto* err = std::get_if<DecodeError>(&strict)) {
      rec.accepted = false;
      rec.reason = reason_from_decode(*err);
      rec.reason_detail = err->detail;
      return rec;
    }
    const DecodedEnvelope& dec = std::get<DecodedEnvelope>(strict);
    VerificationResult ver =
        verify_envelope(dec.env, dec.auth, *policy.keystore, *policy.replay);
    if (!ver.verified) {
      rec.accepted = false;
      rec.reason = reason_from_verify(*ver.reason);
      return rec;
    }
    if (!policy.acl.allows_publish(pub->principal, topic)) {
      rec.accepted = false;
      rec.reason = RejectReason::acl_denied;
      return rec;
    }
    rec.accepted = true;
  }

  // Fan-out: direct matches, then the supervision mirror copy. Deliveries
  // are ordered by (session, subscription) for determinism.
  const bool is_mirror_publish =
      topic.segments == policy.mirror_topic.segments;
  Bytes mirrored;
  if (!is_mirror_publish) {
    mirrored = wrap_mirror(topic, now_us, bytes);
  }
  for (auto& [sid, sess] : sessions_) {
    if (!sess.connected) continue;
    for (auto& [sub_id, sub] : sess.subs) {
      if (topic_matches(sub.filter, topic)) {
        rec.deliveries.push_back(PlannedDelivery{sub_id, sid, rec.topic, bytes,
                                                 false, rec.payload_len});
      }
      if (!is_mirror_publish &&
          topic_matches(sub.filter, policy.mirror_topic)) {
        rec.deliveries.push_back(PlannedDelivery{
            sub_id, sid, policy.mirror_topic.str(), mirrored, true,
            rec.payload_len});
      }
    }
  }
  return rec;
}

}  // namespace swarmsim
