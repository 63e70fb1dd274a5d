#include "swarmsim/topic.hpp"

namespace swarmsim {

namespace {

std::optional<std::vector<std::string>> split_path(std::string_view path) {
  if (path.empty()) return std::nullopt;
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = path.find('/', start);
    std::string_view seg = (slash == std::string_view::npos)
                               ? path.substr(start)
                               : path.substr(start, slash - start);
    if (seg.empty()) return std::nullopt;
    segs.emplace_back(seg);
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return segs;
}

std::string join(const std::vector<std::string>& segs) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += '/';
    out += segs[i];
  }
  return out;
}

bool has_wildcard_chars(std::string_view seg) {
  return seg.find('+') != std::string_view::npos ||
         seg.find('#') != std::string_view::npos;
}

}  // namespace

std::optional<Topic> Topic::parse(std::string_view path) {
  auto segs = split_path(path);
  if (!segs) return std::nullopt;
  for (const auto& s : *segs) {
    if (has_wildcard_chars(s)) return std::nullopt;
  }
  return Topic{std::move(*segs)};
}

std::string Topic::str() const { return join(segments); }

std::optional<TopicFilter> TopicFilter::parse(std::string_view path) {
  auto segs = split_path(path);
  if (!segs) return std::nullopt;
  for (std::size_t i = 0; i < segs->size(); ++i) {
    const std::string& s = (*segs)[i];
    if (s == "+") continue;
    if (s == "#") {
      if (i + 1 != segs->size()) return std::nullopt;  // '#' only final
      continue;
    }
    if (has_wildcard_chars(s)) return std::nullopt;
  }
  return TopicFilter{std::move(*segs)};
}

std::string TopicFilter::str() const { return join(segments); }

bool TopicFilter::is_concrete() const {
  for (const auto& s : segments) {
    if (s == "+" || s == "#") return false;
  }
  return true;
}

bool topic_matches(const TopicFilter& filter, const Topic& topic) {
  std::size_t i = 0;
  for (; i < filter.segments.size(); ++i) {
    const std::string& f = filter.segments[i];
    if (f == "#") return true;  // matches remainder, including none
    if (i >= topic.segments.size()) return false;
    if (f == "+") continue;
    if (f != topic.segments[i]) return false;
  }
  return i == topic.segments.size();
}

bool filter_covers(const TopicFilter& wide, const TopicFilter& narrow) {
  std::size_t i = 0;
  for (; i < wide.segments.size(); ++i) {
    const std::string& w = wide.segments[i];
    if (w == "#") return true;
    if (i >= narrow.segments.size()) return false;
    const std::string& n = narrow.segments[i];
    if (n == "#") return false;  // narrow reaches deeper than wide allows
    if (w == "+") continue;      // literal or "+" in narrow is one segment
    if (n == "+" || n != w) return false;
  }
  return i == narrow.segments.size();
}

}  // namespace swarmsim
