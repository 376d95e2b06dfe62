#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "rrc/market.hpp"

namespace rrc {

/// Admission thresholds, one per (college, resource id).
///
/// Entry k admits the k best students of that college for that resource.
/// The empty-resource entry of a college is never below its other entries.
class CutoffProfile {
 public:
  CutoffProfile() = default;
  CutoffProfile(int n_colleges, int n_resource_ids, int n_students, int fill = 0);
  static CutoffProfile zeros(const Market& m) {
    return {m.n_colleges(), m.n_resource_ids(), m.n_students(), 0};
  }
  static CutoffProfile maximal(const Market& m) {
    return {m.n_colleges(), m.n_resource_ids(), m.n_students(), m.n_students()};
  }

  int n_colleges() const { return n_colleges_; }
  int n_resource_ids() const { return n_resource_ids_; }
  int max_value() const { return max_value_; }

  int operator()(CollegeId c, ResourceId r) const { return values_[c * n_resource_ids_ + r]; }
  int& at(CollegeId c, ResourceId r) { return values_[c * n_resource_ids_ + r]; }
  bool is_maximal(CollegeId c, ResourceId r) const { return (*this)(c, r) == max_value_; }

  /// Entries in range and empty-resource dominance hold.
  bool valid() const;

  friend bool operator==(const CutoffProfile&, const CutoffProfile&) = default;
  friend auto operator<=>(const CutoffProfile&, const CutoffProfile&) = default;

 private:
  int n_colleges_ = 0;
  int n_resource_ids_ = 0;
  int max_value_ = 0;
  std::vector<int> values_;
};

/// Contracts (s, c, r) with s among the first K[c][r] of c and (c, r)
/// acceptable to s. Throws Error if K is not a valid profile for m.
std::vector<Contract> eligible_contracts(const Market& m, const CutoffProfile& k);

/// Each student takes the best contract they are eligible for. May be infeasible.
Matching induced_matching(const Market& m, const CutoffProfile& k);

/// Entries raised together when (c, r) goes up by one: r alone, or r with the
/// empty resource when the two are equal.
std::vector<ResourceId> coupled_entries(const CutoffProfile& k, CollegeId c, ResourceId r);

/// K with (c, r) raised by one unit, coupled as above. Throws Error if
/// (c, r) is maximal.
CutoffProfile increment(const Market& m, const CutoffProfile& k, CollegeId c, ResourceId r);

/// Induced matching feasible and every non-maximal increment infeasible.
bool is_optimal(const Market& m, const CutoffProfile& k);

/// The optimal profile inducing a direct-envy stable matching.
///
/// K[c][r] is one less than the rank of the best student at c who prefers
/// (c, r) to what they hold, or maximal when there is none. The resource
/// entries are capped at the empty-resource entry; in a direct-envy stable
/// matching nobody ranked below that cap holds a contract at c, so the cap
/// changes nothing the profile admits. Throws Error if mu is not direct-envy
/// stable.
CutoffProfile cutoffs_of(const Market& m, const Matching& mu);

/// Rows are colleges, columns are resource ids with r0 first.
nlohmann::json profile_to_json(const CutoffProfile& k);
CutoffProfile profile_from_json(const nlohmann::json& doc, int n_students);

/// Cutoff profile plus its induced matching, updated in place.
///
/// Starts from K = 0. Raising entries of one college can only change the
/// choice of the students who become eligible, so each trial touches at most
/// one student per raised entry and feasibility is re-checked only on the
/// constraints those students touch. Every state kept is feasible.
class CutoffWalk {
 public:
  explicit CutoffWalk(const Market& m);

  const CutoffProfile& profile() const { return profile_; }
  Matching matching() const;

  /// Raises the given entries of college c by one together and keeps the
  /// change iff the induced matching stays feasible. The entries must be
  /// non-maximal and the raised profile must stay valid.
  bool try_raise(CollegeId c, std::span<const ResourceId> entries);

 private:
  struct Change {
    StudentId student;
    int from;
    int to;
  };

  Choice choice_at(StudentId s, int pos) const { return market_->preferences(s)[pos]; }
  void apply(const Change& ch, int sign_from, int sign_to);

  const Market* market_;
  CutoffProfile profile_;
  std::vector<int> held_;  // preference position, or list size when unmatched
  std::vector<int> college_count_;
  std::vector<int> resource_count_;
  std::vector<Change> changes_;
};

}  // namespace rrc
