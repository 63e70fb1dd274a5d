#include "swarmsim/agents.hpp"

#include <nlohmann/json.hpp>

namespace swarmsim {

using json = nlohmann::json;

Bytes make_raw_payload(std::map<std::string, std::string> fields) {
  json j = json::object();
  for (auto& [k, v] : fields) j[k] = v;
  const std::string s = j.dump();
  return Bytes(s.begin(), s.end());
}

Bytes make_agent_payload(const AgentRuntime& agent,
                         std::map<std::string, std::string> fields) {
  fields["from"] = agent.spec.id.id;
  fields["tag"] = agent.beacon_tag;
  return make_raw_payload(std::move(fields));
}

std::optional<std::map<std::string, std::string>> parse_payload(const Bytes& b) {
  json j = json::parse(b.begin(), b.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  std::map<std::string, std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) return std::nullopt;
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

Bytes make_filler(std::size_t n) {
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz";
  Bytes out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(static_cast<std::uint8_t>(alphabet[i % 26]));
  }
  return out;
}

}  // namespace swarmsim
