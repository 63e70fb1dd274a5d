#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmsim/bytes.hpp"
#include "swarmsim/rng.hpp"

namespace swarmsim {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VirtualClock {
  Micros now_us = 0;
};

// One-way delivery latency model. A full sample is
//   base + round(lognormal(jitter_median, jitter_sigma)) + round(per_byte*len)
// where len is the envelope payload length. jitter_median == 0 disables
// jitter. The shipped profiles are calibrated so that a two-leg round trip
// reproduces the target figure named in the profile comment.
struct LinkProfile {
  std::string name;
  Micros base_latency_us = 0;
  double jitter_median_us = 0.0;
  double jitter_sigma = 0.0;
  double per_byte_us = 0.0;
  double loss_rate = 0.0;

  bool valid() const {
    return jitter_median_us >= 0.0 && jitter_sigma >= 0.0 &&
           per_byte_us >= 0.0 && loss_rate >= 0.0 && loss_rate <= 1.0;
  }
};

Micros sample_latency(const LinkProfile& profile, std::size_t payload_len,
                      Rng& rng);

// Broker-relative split of a full one-way sample: the publisher-side hop
// takes the floor half, the subscriber-side hop the ceil half, so two hops
// from identical zero-jitter profiles recombine exactly.
inline Micros uplink_half(Micros sample) { return sample / 2; }
inline Micros downlink_half(Micros sample) { return sample - sample / 2; }

struct PartitionSpec {
  std::string link;
  Micros start_us = 0;
  Micros duration_us = 0;
  Micros network_recovery_us = 0;
  Micros bridge_setup_us = 0;

  Micros link_usable_at() const {
    return start_us + duration_us + network_recovery_us + bridge_setup_us;
  }
};

// Downtime bookkeeping for one named link.
class LinkState {
 public:
  // Throws SimError when the new interval overlaps an existing one.
  void add_down_interval(Micros start, Micros usable_at);
  bool is_down(Micros t) const;
  // True when [a, b] touches any down interval (b == interval start and
  // a == interval end are not overlaps).
  bool down_within(Micros a, Micros b) const;

 private:
  std::vector<std::pair<Micros, Micros>> down_;  // [start, usable_at)
};

struct SimEvent {
  Micros fire_at_us = 0;
  std::uint64_t seq = 0;
  std::string kind;
  std::string details;
  std::function<void()> action;
};

struct ProcessedEvent {
  Micros time_us = 0;
  std::uint64_t seq = 0;
  std::string kind;
  std::string details;
};

// Min-queue ordered by (fire_at, insertion sequence). Supports lazy
// cancellation by event id.
class EventQueue {
 public:
  std::uint64_t schedule(const VirtualClock& clock, Micros fire_at_us,
                         std::string kind, std::string details,
                         std::function<void()> action);
  void cancel(std::uint64_t event_id);
  bool empty();
  std::optional<Micros> next_fire_at();

  // Pops the minimum live event, advances the clock to its fire time and
  // runs its action. Returns nullopt when exhausted.
  std::optional<ProcessedEvent> step(VirtualClock& clock);

  std::uint64_t scheduled_count() const { return next_seq_; }

 private:
  struct Entry {
    Micros fire_at;
    std::uint64_t seq;
    bool operator>(const Entry& o) const {
      return fire_at != o.fire_at ? fire_at > o.fire_at : seq > o.seq;
    }
  };
  void prune();

  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  std::map<std::uint64_t, SimEvent> pending_;
  std::set<std::uint64_t> cancelled_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace swarmsim
