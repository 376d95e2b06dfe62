#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrc {

using StudentId = int;
using CollegeId = int;
/// 0 is the empty resource; 1..n_resources are the non-empty ones.
using ResourceId = int;

inline constexpr ResourceId kEmptyResource = 0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A (college, resource) bundle a student can rank.
struct Choice {
  CollegeId college = 0;
  ResourceId resource = kEmptyResource;

  friend auto operator<=>(const Choice&, const Choice&) = default;
};

struct Contract {
  StudentId student = 0;
  CollegeId college = 0;
  ResourceId resource = kEmptyResource;

  Choice choice() const { return {college, resource}; }
  friend auto operator<=>(const Contract&, const Contract&) = default;
};

std::string to_string(const Contract& x);

struct ResourceSpec {
  int quota = 1;
  std::vector<CollegeId> region;
};

/// A market with resource-regional caps.
///
/// The empty resource is implicit: its region is every college and its quota
/// is the number of students. Construction never throws on bad data; call
/// validate_market() before trusting a market built from external input.
class Market {
 public:
  Market() = default;
  Market(int n_students, std::vector<int> college_quota,
         std::vector<ResourceSpec> resources,
         std::vector<std::vector<StudentId>> priorities,
         std::vector<std::vector<Choice>> preferences);

  int n_students() const { return n_students_; }
  int n_colleges() const { return static_cast<int>(college_quota_.size()); }
  /// Count of non-empty resources.
  int n_resources() const { return static_cast<int>(resources_.size()); }
  /// Resource ids including the empty one.
  int n_resource_ids() const { return n_resources() + 1; }

  int college_quota(CollegeId c) const { return college_quota_[c]; }
  /// Quota of any resource id; the empty resource reports n_students.
  int resource_quota(ResourceId r) const {
    return r == kEmptyResource ? n_students_ : resources_[r - 1].quota;
  }
  const ResourceSpec& resource(ResourceId r) const { return resources_[r - 1]; }
  bool in_region(ResourceId r, CollegeId c) const {
    return r == kEmptyResource || in_region_[(r - 1) * n_colleges() + c] != 0;
  }

  /// Best-first priority order of college c.
  std::span<const StudentId> priority(CollegeId c) const { return priorities_[c]; }
  /// Best-first acceptable list of student s.
  std::span<const Choice> preferences(StudentId s) const { return preferences_[s]; }

  /// 1-based position of s in c's priority; 0 when s is missing.
  int rank(CollegeId c, StudentId s) const { return rank_[c * n_students_ + s]; }

  /// Student holding position k (1-based) in c's priority.
  StudentId at_rank(CollegeId c, int k) const { return priorities_[c][k - 1]; }

  /// 0-based index of (c, r) in s's list, or -1 when unacceptable.
  int position(StudentId s, Choice x) const {
    return pref_pos_[(static_cast<std::size_t>(s) * n_colleges() + x.college) *
                         n_resource_ids() +
                     x.resource];
  }
  bool acceptable(StudentId s, Choice x) const { return position(s, x) >= 0; }

  bool valid_student(StudentId s) const { return s >= 0 && s < n_students_; }
  bool valid_college(CollegeId c) const { return c >= 0 && c < n_colleges(); }
  bool valid_resource(ResourceId r) const { return r >= 0 && r <= n_resources(); }

  const std::vector<int>& college_quotas() const { return college_quota_; }
  const std::vector<ResourceSpec>& resources() const { return resources_; }
  const std::vector<std::vector<StudentId>>& priorities() const { return priorities_; }
  const std::vector<std::vector<Choice>>& all_preferences() const { return preferences_; }

  /// Copy of this market with student s reporting `report` instead.
  Market with_preferences(StudentId s, std::vector<Choice> report) const;

  friend bool operator==(const Market& a, const Market& b) {
    return a.n_students_ == b.n_students_ && a.college_quota_ == b.college_quota_ &&
           a.priorities_ == b.priorities_ && a.preferences_ == b.preferences_ &&
           a.same_resources(b);
  }

 private:
  bool same_resources(const Market& other) const;
  void build_caches();

  int n_students_ = 0;
  std::vector<int> college_quota_;
  std::vector<ResourceSpec> resources_;
  std::vector<std::vector<StudentId>> priorities_;
  std::vector<std::vector<Choice>> preferences_;

  std::vector<int> rank_;
  std::vector<int> pref_pos_;
  std::vector<char> in_region_;
};

/// Set of contracts with at most one contract per student.
class Matching {
 public:
  Matching() = default;
  explicit Matching(int n_students) : assigned_(n_students) {}
  Matching(int n_students, std::initializer_list<Contract> contracts);

  int n_students() const { return static_cast<int>(assigned_.size()); }

  /// Throws if the student already holds a contract.
  void add(const Contract& x);
  void remove(StudentId s) { assigned_[s].reset(); }
  /// Replaces whatever s holds.
  void assign(StudentId s, std::optional<Choice> x) { assigned_[s] = x; }

  const std::optional<Choice>& of(StudentId s) const { return assigned_[s]; }
  bool contains(const Contract& x) const {
    return assigned_[x.student] && *assigned_[x.student] == x.choice();
  }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  /// Contracts ordered by student id.
  std::vector<Contract> contracts() const;
  std::vector<Contract> at_college(CollegeId c) const;
  std::vector<Contract> with_resource(ResourceId r) const;

  friend bool operator==(const Matching&, const Matching&) = default;
  friend auto operator<=>(const Matching& a, const Matching& b) {
    return a.contracts() <=> b.contracts();
  }

 private:
  std::vector<std::optional<Choice>> assigned_;
};

std::string to_string(const Matching& mu);

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity;
  std::string message;
};

std::vector<Diagnostic> validate_market(const Market& m);
bool has_errors(std::span<const Diagnostic> diagnostics);

/// Throws Error listing every error-level diagnostic.
void require_valid(const Market& m);

bool is_feasible(const Market& m, const Matching& mu);
bool is_individually_rational(const Market& m, const Matching& mu);

/// 1-based rank of s in c's priority.
inline int rank(const Market& m, CollegeId c, StudentId s) { return m.rank(c, s); }

/// Preference position on the totalized order: acceptable pairs by list
/// position, then unmatched, then every unacceptable pair.
inline int preference_position(const Market& m, StudentId s, const std::optional<Choice>& x) {
  const int unmatched = static_cast<int>(m.preferences(s).size());
  if (!x) return unmatched;
  const int p = m.position(s, *x);
  return p < 0 ? unmatched + 1 : p;
}

/// Strict preference of s for a over b; nullopt means unmatched.
inline bool prefers(const Market& m, StudentId s, const std::optional<Choice>& a,
                    const std::optional<Choice>& b) {
  return preference_position(m, s, a) < preference_position(m, s, b);
}

}  // namespace rrc
