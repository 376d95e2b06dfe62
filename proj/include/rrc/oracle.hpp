#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rrc/blocking.hpp"
#include "rrc/cutoff.hpp"
#include "rrc/market.hpp"
#include "rrc/mechanisms.hpp"

namespace rrc {

inline constexpr std::uint64_t kDefaultEnumerationBound = 10'000'000;

/// Every feasible individually rational matching, in lexicographic order of
/// per-student choices (unmatched last). Throws Error when the product over
/// students of (list size + 1) exceeds bound.
std::vector<Matching> enumerate_matchings(const Market& m,
                                          std::uint64_t bound = kDefaultEnumerationBound);

struct StabilityCensus {
  std::vector<Matching> matchings;
  std::vector<BlockingReport> reports;
  /// Indices into matchings.
  std::vector<std::size_t> stable;
  std::vector<std::size_t> direct_envy_stable;
  std::vector<std::size_t> weakly_stable;
  std::vector<std::size_t> envy_free;
  std::vector<std::size_t> pareto_efficient;

  std::vector<Matching> pick(const std::vector<std::size_t>& set) const;
  /// Index of mu in matchings, if present.
  std::optional<std::size_t> find(const Matching& mu) const;
};

StabilityCensus census(const Market& m, std::uint64_t bound = kDefaultEnumerationBound);
nlohmann::ordered_json census_to_json(const StabilityCensus& c);

/// Every student weakly prefers b to a and one strictly.
bool pareto_dominates(const Market& m, const Matching& b, const Matching& a);

/// Blocking report computed from the definitions alone: each candidate
/// contract and victim is checked by building the modified matching and
/// calling is_feasible. Dominance tries every outside contract at the college.
BlockingReport audit_definitional(const Market& m, const Matching& mu);

/// Every valid profile of m whose size fits within bound (throws otherwise).
std::vector<CutoffProfile> enumerate_profiles(const Market& m,
                                              std::uint64_t bound = kDefaultEnumerationBound);

/// College-proposing deferred acceptance over empty-resource contracts.
/// Throws Error if m has non-empty resources.
Matching college_proposing_da(const Market& m);

struct ProbeOptions {
  std::uint64_t seed = 0;
  /// Cap on misreports tried, and on student orders in all-orders mode.
  std::uint64_t bound = 100'000;
  /// RSD only: compare outcome distributions over every student order.
  bool all_orders = false;
};

struct Misreport {
  StudentId student = 0;
  std::vector<Choice> report;
  std::optional<Choice> truthful;
  std::optional<Choice> manipulated;
};

/// Searches strict orders over subsets of the student's true list for one
/// that gets the student a strictly better contract. In all-orders mode a report
/// counts when its outcome distribution is not first-order stochastically
/// dominated by the truthful one. Throws Error when a space exceeds bound.
std::optional<Misreport> strategyproofness_probe(const Market& m, MechanismKind kind,
                                                 StudentId s, const ProbeOptions& options = {});

struct Expectation {
  std::string description;
  bool holds = false;
};

struct FixtureMarket {
  std::string name;
  std::string description;
  Market market;
  std::function<std::vector<Expectation>(const Market&)> verify;
};

const std::vector<FixtureMarket>& fixtures();
/// Throws Error for an unknown name.
const FixtureMarket& fixture(std::string_view name);

}  // namespace rrc
