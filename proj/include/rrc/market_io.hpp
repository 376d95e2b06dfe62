#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rrc/market.hpp"

namespace rrc {

using Json = nlohmann::json;

// Market documents:
//   {"students": N,
//    "colleges": [{"quota": q}, ...],
//    "resources": [{"quota": q, "region": [college ids]}, ...],   // r1, r2, ...
//    "priorities": [[student ids, best first], ...],
//    "preferences": [[[college, resource], ...], ...]}
// Resource 0 is the empty resource; it never appears in "resources".
// Keys are emitted in sorted order, so dump() output is canonical.

Json market_to_json(const Market& m);
/// Throws Error on malformed documents. Does not run validate_market().
Market market_from_json(const Json& doc);

/// Canonical text form (two-space indent, trailing newline).
std::string dump_market(const Market& m);
Market parse_market(const std::string& text);

Market load_market(const std::filesystem::path& path);
void save_market(const Market& m, const std::filesystem::path& path);

Json contract_to_json(const Contract& x);
Json matching_to_json(const Matching& mu);
Matching matching_from_json(const Json& doc, int n_students);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rrc
