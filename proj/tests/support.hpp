#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "rrc/market.hpp"
#include "rrc/oracle.hpp"
#include "rrc/rng.hpp"

namespace rrc::testing {

struct SmallMarketShape {
  int max_students = 4;
  int max_colleges = 3;
  int max_resources = 1;
  int max_quota = 2;
};

/// Random valid market with arbitrary acceptable lists, quotas and regions.
inline Market random_small_market(Rng& rng, const SmallMarketShape& shape = {}) {
  const int n = 1 + rng.index(shape.max_students);
  const int n_c = 1 + rng.index(shape.max_colleges);
  const int n_r = rng.index(shape.max_resources + 1);

  std::vector<int> quotas(n_c);
  for (int& q : quotas) q = 1 + rng.index(shape.max_quota);

  std::vector<ResourceSpec> resources(n_r);
  for (auto& spec : resources) {
    spec.quota = 1 + rng.index(shape.max_quota);
    for (CollegeId c = 0; c < n_c; ++c) {
      if (rng.index(4) != 0) spec.region.push_back(c);
    }
    if (spec.region.empty()) spec.region.push_back(rng.index(n_c));
  }

  std::vector<std::vector<StudentId>> priorities(n_c, std::vector<StudentId>(n));
  for (auto& p : priorities) {
    std::iota(p.begin(), p.end(), 0);
    rng.shuffle(std::span(p));
  }

  std::vector<std::vector<Choice>> preferences(n);
  for (auto& list : preferences) {
    for (CollegeId c = 0; c < n_c; ++c) {
      for (ResourceId r = 0; r <= n_r; ++r) {
        if (r != kEmptyResource) {
          const auto& region = resources[r - 1].region;
          if (std::find(region.begin(), region.end(), c) == region.end()) continue;
        }
        if (rng.index(3) != 0) list.push_back({c, r});
      }
    }
    rng.shuffle(std::span(list));
  }
  return Market(n, std::move(quotas), std::move(resources), std::move(priorities),
                std::move(preferences));
}

/// Uniformly chosen member of the enumerated feasible IR matchings.
inline Matching random_matching(const Market& m, Rng& rng) {
  const auto all = enumerate_matchings(m);
  return all[rng.index(all.size())];
}

/// Same classification, ignoring which dominating contract was reported.
inline bool same_classification(const BlockingReport& a, const BlockingReport& b) {
  if (!(a.counts == b.counts) || !(a.flags == b.flags) || a.envy_pairs != b.envy_pairs ||
      a.undominated_waste != b.undominated_waste || a.direct_envy != b.direct_envy ||
      a.indirect_envy != b.indirect_envy) {
    return false;
  }
  auto same_waste = [](const std::vector<WasteWitness>& x, const std::vector<WasteWitness>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i].contract == y[i].contract)) return false;
      if (x[i].dominated_by.has_value() != y[i].dominated_by.has_value()) return false;
    }
    return true;
  };
  return same_waste(a.seat_waste, b.seat_waste) && same_waste(a.resource_waste, b.resource_waste);
}

}  // namespace rrc::testing
