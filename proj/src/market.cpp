#include "rrc/market.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <set>

namespace rrc {

std::string to_string(const Contract& x) {
  if (x.resource == kEmptyResource) {
    return fmt::format("(s{},c{},r0)", x.student + 1, x.college + 1);
  }
  return fmt::format("(s{},c{},r{})", x.student + 1, x.college + 1, x.resource);
}

std::string to_string(const Matching& mu) {
  std::string out = "{";
  bool first = true;
  for (const auto& x : mu.contracts()) {
    if (!first) out += ",";
    out += to_string(x);
    first = false;
  }
  return out + "}";
}

Market::Market(int n_students, std::vector<int> college_quota,
               std::vector<ResourceSpec> resources,
               std::vector<std::vector<StudentId>> priorities,
               std::vector<std::vector<Choice>> preferences)
    : n_students_(n_students),
      college_quota_(std::move(college_quota)),
      resources_(std::move(resources)),
      priorities_(std::move(priorities)),
      preferences_(std::move(preferences)) {
  priorities_.resize(college_quota_.size());
  preferences_.resize(static_cast<std::size_t>(std::max(n_students_, 0)));
  build_caches();
}

void Market::build_caches() {
  const int n = std::max(n_students_, 0);
  const int nc = n_colleges();
  const int nr = n_resource_ids();

  rank_.assign(static_cast<std::size_t>(nc) * n, 0);
  for (int c = 0; c < nc; ++c) {
    const auto& order = priorities_[c];
    for (std::size_t k = 0; k < order.size(); ++k) {
      const StudentId s = order[k];
      if (s >= 0 && s < n && rank_[c * n + s] == 0) {
        rank_[c * n + s] = static_cast<int>(k) + 1;
      }
    }
  }

  pref_pos_.assign(static_cast<std::size_t>(n) * nc * nr, -1);
  for (int s = 0; s < n; ++s) {
    const auto& list = preferences_[s];
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Choice x = list[k];
      if (!valid_college(x.college) || !valid_resource(x.resource)) continue;
      int& slot = pref_pos_[(static_cast<std::size_t>(s) * nc + x.college) * nr + x.resource];
      if (slot < 0) slot = static_cast<int>(k);
    }
  }

  in_region_.assign(static_cast<std::size_t>(n_resources()) * nc, 0);
  for (int r = 0; r < n_resources(); ++r) {
    for (CollegeId c : resources_[r].region) {
      if (valid_college(c)) in_region_[r * nc + c] = 1;
    }
  }
}

bool Market::same_resources(const Market& other) const {
  if (resources_.size() != other.resources_.size()) return false;
  for (std::size_t r = 0; r < resources_.size(); ++r) {
    if (resources_[r].quota != other.resources_[r].quota ||
        resources_[r].region != other.resources_[r].region) {
      return false;
    }
  }
  return true;
}

Market Market::with_preferences(StudentId s, std::vector<Choice> report) const {
  auto prefs = preferences_;
  prefs[s] = std::move(report);
  return Market(n_students_, college_quota_, resources_, priorities_, std::move(prefs));
}

Matching::Matching(int n_students, std::initializer_list<Contract> contracts)
    : assigned_(n_students) {
  for (const auto& x : contracts) add(x);
}

void Matching::add(const Contract& x) {
  if (x.student < 0 || x.student >= n_students()) {
    throw Error("contract " + to_string(x) + " references an unknown student");
  }
  if (assigned_[x.student]) {
    throw Error("student already holds a contract: " + to_string(x));
  }
  assigned_[x.student] = x.choice();
}

std::size_t Matching::size() const {
  return static_cast<std::size_t>(
      std::count_if(assigned_.begin(), assigned_.end(), [](const auto& a) { return a.has_value(); }));
}

std::vector<Contract> Matching::contracts() const {
  std::vector<Contract> out;
  for (int s = 0; s < n_students(); ++s) {
    if (assigned_[s]) out.push_back({s, assigned_[s]->college, assigned_[s]->resource});
  }
  return out;
}

std::vector<Contract> Matching::at_college(CollegeId c) const {
  std::vector<Contract> out;
  for (const auto& x : contracts()) {
    if (x.college == c) out.push_back(x);
  }
  return out;
}

std::vector<Contract> Matching::with_resource(ResourceId r) const {
  std::vector<Contract> out;
  for (const auto& x : contracts()) {
    if (x.resource == r) out.push_back(x);
  }
  return out;
}

std::vector<Diagnostic> validate_market(const Market& m) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string msg) { out.push_back({Severity::kError, std::move(msg)}); };
  auto warning = [&](std::string msg) { out.push_back({Severity::kWarning, std::move(msg)}); };

  const int n = m.n_students();
  if (n < 0) error("student count must be non-negative");
  if (m.n_colleges() == 0) error("market needs at least one college");

  for (int c = 0; c < m.n_colleges(); ++c) {
    if (m.college_quota(c) < 1) {
      error(fmt::format("college c{}: quota must be positive", c + 1));
    }
  }

  for (ResourceId r = 1; r <= m.n_resources(); ++r) {
    const auto& spec = m.resource(r);
    if (spec.quota < 1) error(fmt::format("resource r{}: quota must be positive", r));
    if (spec.region.empty()) error(fmt::format("resource r{}: region must be non-empty", r));
    std::set<CollegeId> seen;
    for (CollegeId c : spec.region) {
      if (!m.valid_college(c)) {
        error(fmt::format("resource r{}: region names unknown college {}", r, c));
      } else if (!seen.insert(c).second) {
        error(fmt::format("resource r{}: region lists college c{} twice", r, c + 1));
      }
    }
  }

  for (int c = 0; c < m.n_colleges() && n >= 0; ++c) {
    auto order = m.priority(c);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    bool ok = static_cast<int>(order.size()) == n;
    for (StudentId s : order) {
      if (s < 0 || s >= n || seen[s]) {
        ok = false;
        break;
      }
      seen[s] = 1;
    }
    if (!ok) error(fmt::format("college c{}: priority is not a permutation of all students", c + 1));
  }

  for (StudentId s = 0; s < n; ++s) {
    auto list = m.preferences(s);
    std::set<Choice> seen;
    bool structural_ok = true;
    for (const Choice& x : list) {
      if (!m.valid_college(x.college) || !m.valid_resource(x.resource)) {
        error(fmt::format("student s{}: preference ({},{}) references unknown ids", s + 1,
                          x.college, x.resource));
        structural_ok = false;
      } else if (!seen.insert(x).second) {
        error(fmt::format("student s{}: duplicate preference (c{},r{})", s + 1, x.college + 1,
                          x.resource));
        structural_ok = false;
      }
    }
    if (!structural_ok) continue;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Choice x = list[k];
      if (x.resource == kEmptyResource) continue;
      const int empty_pos = m.position(s, {x.college, kEmptyResource});
      if (empty_pos < 0 || empty_pos < static_cast<int>(k)) {
        warning(fmt::format("student s{}: (c{},r{}) is not followed by (c{},r0)", s + 1,
                            x.college + 1, x.resource, x.college + 1));
      }
    }
  }
  return out;
}

bool has_errors(std::span<const Diagnostic> diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::kError; });
}

void require_valid(const Market& m) {
  std::string message;
  for (const auto& d : validate_market(m)) {
    if (d.severity == Severity::kError) message += "\n  " + d.message;
  }
  if (!message.empty()) throw Error("invalid market:" + message);
}

bool is_feasible(const Market& m, const Matching& mu) {
  std::vector<int> college_count(m.n_colleges(), 0);
  std::vector<int> resource_count(m.n_resource_ids(), 0);
  for (const auto& x : mu.contracts()) {
    if (!m.valid_college(x.college) || !m.valid_resource(x.resource)) return false;
    if (++college_count[x.college] > m.college_quota(x.college)) return false;
    if (x.resource == kEmptyResource) continue;
    if (!m.in_region(x.resource, x.college)) return false;
    if (++resource_count[x.resource] > m.resource_quota(x.resource)) return false;
  }
  return true;
}

bool is_individually_rational(const Market& m, const Matching& mu) {
  for (const auto& x : mu.contracts()) {
    if (!m.valid_college(x.college) || !m.valid_resource(x.resource)) return false;
    if (!m.acceptable(x.student, x.choice())) return false;
  }
  return true;
}

}  // namespace rrc
