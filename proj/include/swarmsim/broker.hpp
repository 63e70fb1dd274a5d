#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/envelope.hpp"
#include "swarmsim/topic.hpp"

namespace swarmsim {

enum class BrokerMode { baseline, hardened };

const char* to_string(BrokerMode m);

enum class AclAction { publish, subscribe };

struct AclRule {
  std::string principal;
  AclAction action = AclAction::publish;
  TopicFilter filter;
};

// Allow-list; hardened mode is default-deny.
struct Acl {
  std::vector<AclRule> rules;

  bool allows_publish(const std::string& principal, const Topic& topic) const;
  bool allows_subscribe(const std::string& principal,
                        const TopicFilter& filter) const;

  // One rule per line: "principal action filter". '#' comments allowed.
  static Acl parse(std::string_view text);  // throws std::runtime_error
  std::string serialize() const;
};

enum class RejectReason {
  malformed,
  missing_field,
  payload_too_large,
  missing_auth,
  unknown_key,
  bad_signature,
  replayed_nonce,
  stale_counter,
  acl_denied,
};

const char* to_string(RejectReason r);

struct BrokerPolicy {
  BrokerMode mode = BrokerMode::baseline;
  Acl acl;
  const Keystore* keystore = nullptr;  // required in hardened mode
  ReplayState* replay = nullptr;       // broker-side replay window
  Topic mirror_topic;
};

using SessionId = std::uint64_t;

struct Subscription {
  std::uint64_t id = 0;
  SessionId session = 0;
  TopicFilter filter;
};

struct BrokerSession {
  SessionId id = 0;
  std::string principal;
  std::string link;
  bool connected = false;
  bool parked = false;
  Micros unavailable_until = 0;  // deliveries blocked before this time
  std::map<std::uint64_t, Subscription> subs;
  Micros last_uplink_arrival_us = 0;    // FIFO clamp, publisher side
  Micros last_downlink_arrival_us = 0;  // FIFO clamp, subscriber side
};

struct PlannedDelivery {
  std::uint64_t subscription_id = 0;
  SessionId session = 0;
  std::string topic;  // topic the message is delivered under
  Bytes bytes;        // mirror copies carry the wrapped form
  bool is_mirror = false;
  std::size_t latency_payload_len = 0;
};

struct DeliveryRecord {
  Micros broker_time_us = 0;
  SessionId publisher = 0;
  std::string publisher_principal;
  std::string topic;
  bool accepted = false;
  std::optional<RejectReason> reason;
  std::string reason_detail;
  std::optional<MsgType> msg_type;
  std::optional<std::string> sender;
  std::optional<std::string> corr_id;
  std::size_t payload_len = 0;
  std::size_t wire_len = 0;
  Bytes bytes;  // original published bytes
  std::vector<PlannedDelivery> deliveries;  // empty when rejected
};

// Supervision mirror wrapper: original topic + broker receive timestamp
// around the verbatim frame.
Bytes wrap_mirror(const Topic& orig_topic, Micros broker_ts_us,
                  const Bytes& frame);

struct MirrorFrame {
  Micros broker_ts_us = 0;
  std::string orig_topic;
  Bytes frame;
};

std::optional<MirrorFrame> unwrap_mirror(const Bytes& bytes);

// In-process pub/sub state. Latency and delivery execution belong to the
// simulation loop; publish() only renders the verdict and the fan-out plan.
class Broker {
 public:
  SessionId connect(const std::string& principal, const std::string& link);
  void disconnect(SessionId id);  // parks subscriptions
  void restore(SessionId id);     // un-parks after reconnect completes
  BrokerSession* session(SessionId id);
  const BrokerSession* session(SessionId id) const;
  const std::map<SessionId, BrokerSession>& sessions() const { return sessions_; }

  struct SubscribeResult {
    bool granted = false;
    std::uint64_t subscription_id = 0;  // valid when granted
  };
  // Idempotent per (session, filter). Denial is a verdict, not an error.
  SubscribeResult subscribe(SessionId id, const TopicFilter& filter,
                            const BrokerPolicy& policy);

  DeliveryRecord publish(SessionId id, const Topic& topic, const Bytes& bytes,
                         const BrokerPolicy& policy, Micros now_us,
                         std::size_t max_payload = kDefaultMaxPayloadBytes);

 private:
  std::map<SessionId, BrokerSession> sessions_;
  SessionId next_session_ = 1;
  std::uint64_t next_sub_ = 1;
};

}  // namespace swarmsim
