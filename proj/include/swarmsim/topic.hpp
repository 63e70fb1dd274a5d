#pragma once

#include <optional>
#include <string>
#include <vector>

namespace swarmsim {

// Concrete topic: "/"-separated non-empty segments, no wildcards.
struct Topic {
  std::vector<std::string> segments;

  static std::optional<Topic> parse(std::string_view path);
  std::string str() const;
  auto operator<=>(const Topic&) const = default;
};

// Filter: "+" matches one segment, trailing "#" matches any remainder
// (including none).
struct TopicFilter {
  std::vector<std::string> segments;

  static std::optional<TopicFilter> parse(std::string_view path);
  std::string str() const;
  bool is_concrete() const;
  auto operator<=>(const TopicFilter&) const = default;
};

bool topic_matches(const TopicFilter& filter, const Topic& topic);

// True when every topic matched by `narrow` is also matched by `wide`.
// Used for ACL checks on subscription filters.
bool filter_covers(const TopicFilter& wide, const TopicFilter& narrow);

}  // namespace swarmsim
