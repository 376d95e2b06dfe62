#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rrc/cutoff.hpp"
#include "rrc/market.hpp"

namespace rrc {

enum class MechanismKind { kIrc, kImc, kIdc, kIuc, kRsd, kCsd };

inline constexpr MechanismKind kAllMechanisms[] = {
    MechanismKind::kIrc, MechanismKind::kImc, MechanismKind::kIdc,
    MechanismKind::kIuc, MechanismKind::kRsd, MechanismKind::kCsd};

const char* to_string(MechanismKind kind);
/// Accepts irc, imc, idc, iuc, rsd, csd. Throws Error otherwise.
MechanismKind parse_mechanism(std::string_view name);
bool is_cutoff_mechanism(MechanismKind kind);

/// Entries of one college raised together by one unit.
struct CutoffRaise {
  CollegeId college = 0;
  std::vector<ResourceId> resources;
  friend bool operator==(const CutoffRaise&, const CutoffRaise&) = default;
};

using Move = std::variant<CutoffRaise, Contract>;

struct RunTrace {
  MechanismKind kind = MechanismKind::kIrc;
  std::uint64_t seed = 0;
  /// Accepted moves only, in order.
  std::vector<Move> moves;
  Matching matching;
  /// Final profile of the cutoff mechanisms.
  std::optional<CutoffProfile> cutoffs;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

RunTrace run_irc(const Market& m, std::uint64_t seed);
/// Per college, raises the largest feasible set of its lowest non-maximal
/// cutoffs. When no set at the lowest value is feasible the next value is
/// tried, so that a pass without change means no increment is feasible.
RunTrace run_imc(const Market& m, std::uint64_t seed);
RunTrace run_idc(const Market& m, std::uint64_t seed);
RunTrace run_iuc(const Market& m, std::uint64_t seed);
RunTrace run_rsd(const Market& m, std::uint64_t seed);
/// RSD with a fixed student order; the trace seed is 0.
RunTrace run_rsd_ordered(const Market& m, std::span<const StudentId> order);
RunTrace run_csd(const Market& m, std::uint64_t seed);

RunTrace run_mechanism(MechanismKind kind, const Market& m, std::uint64_t seed);

/// Rebuilds the final matching from the moves alone.
Matching replay(const Market& m, const RunTrace& trace);

nlohmann::json trace_to_json(const RunTrace& trace);
RunTrace trace_from_json(const nlohmann::json& doc, int n_students);

}  // namespace rrc
