#include "swarmsim/netsim.hpp"

#include <cmath>

namespace swarmsim {

Micros sample_latency(const LinkProfile& profile, std::size_t payload_len,
                      Rng& rng) {
  long double total = static_cast<long double>(profile.base_latency_us);
  if (profile.jitter_median_us > 0.0) {
    total += std::llround(
        rng.next_lognormal(profile.jitter_median_us, profile.jitter_sigma));
  }
  total += std::llround(profile.per_byte_us * static_cast<double>(payload_len));
  if (total < 1.0L) total = 1.0L;  // strictly positive
  return static_cast<Micros>(total);
}

void LinkState::add_down_interval(Micros start, Micros usable_at) {
  if (usable_at <= start) throw SimError("partition duration must be > 0");
  for (const auto& [s, e] : down_) {
    if (start < e && s < usable_at) {
      throw SimError("overlapping partition on link");
    }
  }
  down_.emplace_back(start, usable_at);
}

bool LinkState::is_down(Micros t) const {
  for (const auto& [s, e] : down_) {
    if (t >= s && t < e) return true;
  }
  return false;
}

bool LinkState::down_within(Micros a, Micros b) const {
  for (const auto& [s, e] : down_) {
    if (a < e && s < b) return true;
  }
  return false;
}

std::uint64_t EventQueue::schedule(const VirtualClock& clock, Micros fire_at_us,
                                   std::string kind, std::string details,
                                   std::function<void()> action) {
  if (fire_at_us < clock.now_us) {
    throw SimError("schedule in the past: " + std::to_string(fire_at_us) +
                   " < now " + std::to_string(clock.now_us));
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push(Entry{fire_at_us, seq});
  pending_.emplace(seq, SimEvent{fire_at_us, seq, std::move(kind),
                                 std::move(details), std::move(action)});
  return seq;
}

void EventQueue::cancel(std::uint64_t event_id) {
  auto it = pending_.find(event_id);
  if (it != pending_.end()) {
    pending_.erase(it);
    cancelled_.insert(event_id);
  }
}

void EventQueue::prune() {
  while (!heap_.empty()) {
    const std::uint64_t seq = heap_.top().seq;
    if (cancelled_.count(seq)) {
      cancelled_.erase(seq);
      heap_.pop();
      continue;
    }
    if (!pending_.count(seq)) {
      heap_.pop();
      continue;
    }
    break;
  }
}

bool EventQueue::empty() {
  prune();
  return heap_.empty();
}

std::optional<Micros> EventQueue::next_fire_at() {
  prune();
  if (heap_.empty()) return std::nullopt;
  return heap_.top().fire_at;
}

std::optional<ProcessedEvent> EventQueue::step(VirtualClock& clock) {
  prune();
  if (heap_.empty()) return std::nullopt;
  const Entry top = heap_.top();
  heap_.pop();
  auto it = pending_.find(top.seq);
  SimEvent ev = std::move(it->second);
  pending_.erase(it);
  clock.now_us = ev.fire_at_us;
  ProcessedEvent done{ev.fire_at_us, ev.seq, ev.kind, ev.details};
  if (ev.action) ev.action();
  return done;
}

}  // namespace swarmsim
