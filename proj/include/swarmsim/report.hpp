#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "swarmsim/world.hpp"

namespace swarmsim {

inline constexpr int kReportSchemaVersion = 1;

// Machine-readable run document. Deterministic: keys are sorted, numbers
// are integers or fixed-format strings derived from integer microseconds.
nlohmann::json build_report(const World& world);

// Human-readable tables rendered from the machine document. Deterministic
// for a given document.
std::string render_text(const nlohmann::json& report);

// Provenance coverage over the supervision mirror's command stream.
ProvenanceAudit provenance_audit(const std::vector<MirrorReceipt>& mirror_log);

// Gap samples joining issued commands to audit visibility at the mirror.
ActuationAuditReport build_actuation_audit(const World& world);

std::string format_ms(Micros us);      // e.g. "23.6 ms"
std::string format_seconds(Micros us); // e.g. "35.709 s"
std::string format_pct(double fraction);

}  // namespace swarmsim
