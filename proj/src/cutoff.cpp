#include "rrc/cutoff.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "rrc/blocking.hpp"

namespace rrc {

CutoffProfile::CutoffProfile(int n_colleges, int n_resource_ids, int n_students, int fill)
    : n_colleges_(n_colleges),
      n_resource_ids_(n_resource_ids),
      max_value_(n_students),
      values_(static_cast<std::size_t>(n_colleges) * n_resource_ids, fill) {}

bool CutoffProfile::valid() const {
  for (CollegeId c = 0; c < n_colleges_; ++c) {
    for (ResourceId r = 0; r < n_resource_ids_; ++r) {
      const int v = (*this)(c, r);
      if (v < 0 || v > max_value_) return false;
      if (v > (*this)(c, kEmptyResource)) return false;
    }
  }
  return true;
}

namespace {

void require_profile(const Market& m, const CutoffProfile& k) {
  if (k.n_colleges() != m.n_colleges() || k.n_resource_ids() != m.n_resource_ids() ||
      k.max_value() != m.n_students()) {
    throw Error("cutoff profile shape does not match the market");
  }
  if (!k.valid()) throw Error("cutoff profile violates range or empty-resource dominance");
}

}  // namespace

std::vector<Contract> eligible_contracts(const Market& m, const CutoffProfile& k) {
  require_profile(m, k);
  std::vector<Contract> out;
  for (StudentId s = 0; s < m.n_students(); ++s) {
    for (const Choice& x : m.preferences(s)) {
      if (m.rank(x.college, s) <= k(x.college, x.resource)) {
        out.push_back({s, x.college, x.resource});
      }
    }
  }
  return out;
}

Matching induced_matching(const Market& m, const CutoffProfile& k) {
  Matching mu(m.n_students());
  for (StudentId s = 0; s < m.n_students(); ++s) {
    for (const Choice& x : m.preferences(s)) {
      if (m.rank(x.college, s) <= k(x.college, x.resource)) {
        mu.assign(s, x);
        break;
      }
    }
  }
  return mu;
}

std::vector<ResourceId> coupled_entries(const CutoffProfile& k, CollegeId c, ResourceId r) {
  if (r != kEmptyResource && k(c, r) == k(c, kEmptyResource)) return {r, kEmptyResource};
  return {r};
}

CutoffProfile increment(const Market& m, const CutoffProfile& k, CollegeId c, ResourceId r) {
  require_profile(m, k);
  if (k.is_maximal(c, r)) {
    throw Error(fmt::format("cutoff (c{},r{}) is already maximal", c + 1, r));
  }
  CutoffProfile out = k;
  for (ResourceId e : coupled_entries(k, c, r)) ++out.at(c, e);
  return out;
}

bool is_optimal(const Market& m, const CutoffProfile& k) {
  require_profile(m, k);
  if (!is_feasible(m, induced_matching(m, k))) return false;
  for (CollegeId c = 0; c < m.n_colleges(); ++c) {
    for (ResourceId r = 0; r < m.n_resource_ids(); ++r) {
      if (k.is_maximal(c, r)) continue;
      if (is_feasible(m, induced_matching(m, increment(m, k, c, r)))) return false;
    }
  }
  return true;
}

CutoffProfile cutoffs_of(const Market& m, const Matching& mu) {
  if (!audit(m, mu).flags.direct_envy_stable) {
    throw Error("matching is not direct-envy stable: " + to_string(mu));
  }
  CutoffProfile k = CutoffProfile::maximal(m);
  for (CollegeId c = 0; c < m.n_colleges(); ++c) {
    for (ResourceId r = 0; r < m.n_resource_ids(); ++r) {
      for (int rank = 1; rank <= m.n_students(); ++rank) {
        const StudentId s = m.at_rank(c, rank);
        if (prefers(m, s, Choice{c, r}, mu.of(s))) {
          k.at(c, r) = rank - 1;
          break;
        }
      }
    }
    for (ResourceId r = 1; r < m.n_resource_ids(); ++r) {
      k.at(c, r) = std::min(k(c, r), k(c, kEmptyResource));
    }
  }
  return k;
}

nlohmann::json profile_to_json(const CutoffProfile& k) {
  nlohmann::json rows = nlohmann::json::array();
  for (CollegeId c = 0; c < k.n_colleges(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (ResourceId r = 0; r < k.n_resource_ids(); ++r) row.push_back(k(c, r));
    rows.push_back(std::move(row));
  }
  return rows;
}

CutoffProfile profile_from_json(const nlohmann::json& doc, int n_students) {
  const int n_colleges = static_cast<int>(doc.size());
  const int n_ids = n_colleges > 0 ? static_cast<int>(doc.at(0).size()) : 0;
  CutoffProfile k(n_colleges, n_ids, n_students);
  for (CollegeId c = 0; c < n_colleges; ++c) {
    if (static_cast<int>(doc.at(c).size()) != n_ids) throw Error("ragged cutoff matrix");
    for (ResourceId r = 0; r < n_ids; ++r) k.at(c, r) = doc.at(c).at(r).get<int>();
  }
  return k;
}

CutoffWalk::CutoffWalk(const Market& m)
    : market_(&m),
      profile_(CutoffProfile::zeros(m)),
      held_(m.n_students()),
      college_count_(m.n_colleges(), 0),
      resource_count_(m.n_resource_ids(), 0) {
  for (StudentId s = 0; s < m.n_students(); ++s) {
    held_[s] = static_cast<int>(m.preferences(s).size());
  }
}

Matching CutoffWalk::matching() const {
  Matching mu(market_->n_students());
  for (StudentId s = 0; s < market_->n_students(); ++s) {
    if (held_[s] < static_cast<int>(market_->preferences(s).size())) {
      mu.assign(s, choice_at(s, held_[s]));
    }
  }
  return mu;
}

void CutoffWalk::apply(const Change& ch, int sign_from, int sign_to) {
  const int unmatched = static_cast<int>(market_->preferences(ch.student).size());
  if (ch.from < unmatched) {
    const Choice x = choice_at(ch.student, ch.from);
    college_count_[x.college] += sign_from;
    resource_count_[x.resource] += sign_from;
  }
  if (ch.to < unmatched) {
    const Choice x = choice_at(ch.student, ch.to);
    college_count_[x.college] += sign_to;
    resource_count_[x.resource] += sign_to;
  }
}

bool CutoffWalk::try_raise(CollegeId c, std::span<const ResourceId> entries) {
  const Market& m = *market_;
  changes_.clear();
  for (ResourceId r : entries) {
    const StudentId s = m.at_rank(c, profile_(c, r) + 1);
    const int p = m.position(s, {c, r});
    if (p < 0) continue;
    auto it = std::find_if(changes_.begin(), changes_.end(),
                           [&](const Change& ch) { return ch.student == s; });
    if (it == changes_.end()) {
      if (p < held_[s]) changes_.push_back({s, held_[s], p});
    } else {
      it->to = std::min(it->to, p);
    }
  }

  for (const auto& ch : changes_) apply(ch, -1, +1);
  bool feasible = true;
  for (const auto& ch : changes_) {
    const Choice x = choice_at(ch.student, ch.to);
    if (college_count_[x.college] > m.college_quota(x.college) ||
        (x.resource != kEmptyResource &&
         (!m.in_region(x.resource, x.college) ||
          resource_count_[x.resource] > m.resource_quota(x.resource)))) {
      feasible = false;
      break;
    }
  }
  if (!feasible) {
    for (const auto& ch : changes_) apply(ch, +1, -1);
    return false;
  }
  for (const auto& ch : changes_) held_[ch.student] = ch.to;
  for (ResourceId r : entries) ++profile_.at(c, r);
  return true;
}

}  // namespace rrc
