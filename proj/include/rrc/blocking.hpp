#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "rrc/market.hpp"

namespace rrc {

enum class BlockClass { kSeatWaste, kResourceWaste, kDirectEnvy, kIndirectEnvy };

const char* to_string(BlockClass c);

/// Read-only index over a feasible, individually rational matching with
/// per-college and per-resource counts, so that the swaps in the blocking
/// definitions are checked in O(1) instead of by rescanning the matching.
class MatchingView {
 public:
  MatchingView(const Market& m, const Matching& mu);

  const Market& market() const { return *market_; }
  const Matching& matching() const { return *matching_; }

  /// Preference position of what s currently holds (list size if unmatched).
  int held_position(StudentId s) const { return held_pos_[s]; }
  int college_count(CollegeId c) const { return college_count_[c]; }
  int resource_count(ResourceId r) const { return resource_count_[r]; }
  const std::vector<StudentId>& members(CollegeId c) const { return members_[c]; }

  /// (c, r) acceptable to s and strictly better than what s holds.
  bool improves(StudentId s, Choice x) const {
    const int p = market_->position(s, x);
    return p >= 0 && p < held_pos_[s];
  }

  /// (mu \ {mu_s}) + (s, x) is feasible.
  bool can_move(StudentId s, Choice x) const;
  /// (mu \ {mu_s, victim}) + (s, x) is feasible; the victim sits at x.college.
  bool can_swap(StudentId s, Choice x, StudentId victim) const;

  /// Waste class of (s, x) when it waste-blocks, nullopt otherwise.
  std::optional<BlockClass> waste_class(StudentId s, Choice x) const;
  /// Appends every contract (s, x) envy-blocks through; returns the number
  /// of direct ones among them.
  int envy_victims(StudentId s, Choice x, std::vector<Contract>& victims) const;
  bool direct_envy_blocks(StudentId s, Choice x) const;

 private:
  const Market* market_;
  const Matching* matching_;
  std::vector<int> held_pos_;
  std::vector<int> college_count_;
  std::vector<int> resource_count_;
  std::vector<std::vector<StudentId>> members_;
};

// Single-contract predicates. Each requires mu feasible and individually
// rational and x not in mu; envy_blocks also requires x acceptable to its
// student. Violations throw Error.

/// Contracts of mu that x envy-blocks through (empty if x does not envy-block).
std::vector<Contract> envy_blocks(const Market& m, const Matching& mu, const Contract& x);

struct DirectEnvyResult {
  bool blocking = false;
  /// Victims holding x's resource or any victim when x demands r0.
  std::vector<Contract> witnesses;
};
DirectEnvyResult is_direct_envy_block(const Market& m, const Matching& mu, const Contract& x);

std::optional<BlockClass> waste_block_class(const Market& m, const Matching& mu,
                                            const Contract& x);

struct DominanceResult {
  bool dominated = false;
  std::optional<Contract> witness;
};
/// x must waste-block mu.
DominanceResult is_dominated(const Market& m, const Matching& mu, const Contract& x);

struct BlockCounts {
  int resource = 0;
  int seat = 0;
  int direct_envy = 0;
  int indirect_envy = 0;

  int total() const { return resource + seat + direct_envy + indirect_envy; }
  friend bool operator==(const BlockCounts&, const BlockCounts&) = default;
};

struct StabilityFlags {
  bool stable = false;
  bool envy_free = false;
  bool direct_envy_free = false;
  bool non_wasteful = false;
  bool seat_efficient = false;
  bool resource_efficient = false;
  bool weakly_stable = false;
  bool direct_envy_stable = false;

  friend bool operator==(const StabilityFlags&, const StabilityFlags&) = default;
};

struct EnvyWitness {
  Contract contract;
  std::vector<Contract> victims;
  friend bool operator==(const EnvyWitness&, const EnvyWitness&) = default;
};

struct WasteWitness {
  Contract contract;
  /// Set when the waste-block is dominated.
  std::optional<Contract> dominated_by;
  friend bool operator==(const WasteWitness&, const WasteWitness&) = default;
};

/// Every blocking contract of a matching, classified.
///
/// A contract that is both waste- and envy-blocking is listed (and counted)
/// in its waste class and in its envy class, so counts.total() is the row sum
/// of the four classes, not the number of distinct blocking contracts.
struct BlockingReport {
  BlockCounts counts;
  StabilityFlags flags;
  std::vector<WasteWitness> seat_waste;
  std::vector<WasteWitness> resource_waste;
  std::vector<EnvyWitness> direct_envy;
  std::vector<EnvyWitness> indirect_envy;
  /// Number of (contract, victim) pairs over both envy classes.
  int envy_pairs = 0;
  int undominated_waste = 0;

  friend bool operator==(const BlockingReport&, const BlockingReport&) = default;
};

/// Full classification; parallel over students when built with OpenMP.
/// threads <= 0 uses the OpenMP default.
BlockingReport audit(const Market& m, const Matching& mu, int threads = 0);

/// Same classification on one thread. Reference for audit().
BlockingReport audit_serial(const Market& m, const Matching& mu);

nlohmann::ordered_json report_to_json(const BlockingReport& report, bool with_witnesses);

}  // namespace rrc
