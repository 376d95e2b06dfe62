#include "rrc/blocking.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rrc/market_io.hpp"

namespace rrc {

const char* to_string(BlockClass c) {
  switch (c) {
    case BlockClass::kSeatWaste:
      return "seat";
    case BlockClass::kResourceWaste:
      return "resource";
    case BlockClass::kDirectEnvy:
      return "direct_envy";
    case BlockClass::kIndirectEnvy:
      return "indirect_envy";
  }
  return "?";
}

MatchingView::MatchingView(const Market& m, const Matching& mu)
    : market_(&m),
      matching_(&mu),
      held_pos_(m.n_students()),
      college_count_(m.n_colleges(), 0),
      resource_count_(m.n_resource_ids(), 0),
      members_(m.n_colleges()) {
  for (StudentId s = 0; s < m.n_students(); ++s) {
    held_pos_[s] = preference_position(m, s, mu.of(s));
    if (const auto& x = mu.of(s)) {
      ++college_count_[x->college];
      ++resource_count_[x->resource];
      members_[x->college].push_back(s);
    }
  }
}

bool MatchingView::can_move(StudentId s, Choice x) const {
  const Market& m = *market_;
  const auto& held = matching_->of(s);
  const int seats = college_count_[x.college] - (held && held->college == x.college ? 1 : 0);
  if (seats + 1 > m.college_quota(x.college)) return false;
  if (x.resource == kEmptyResource) return true;
  if (!m.in_region(x.resource, x.college)) return false;
  const int units = resource_count_[x.resource] - (held && held->resource == x.resource ? 1 : 0);
  return units + 1 <= m.resource_quota(x.resource);
}

bool MatchingView::can_swap(StudentId s, Choice x, StudentId victim) const {
  const Market& m = *market_;
  const auto& held = matching_->of(s);
  const Choice evicted = *matching_->of(victim);
  const int seats = college_count_[x.college] - (evicted.college == x.college ? 1 : 0) -
                    (held && held->college == x.college ? 1 : 0);
  if (seats + 1 > m.college_quota(x.college)) return false;
  if (x.resource == kEmptyResource) return true;
  if (!m.in_region(x.resource, x.college)) return false;
  const int units = resource_count_[x.resource] - (evicted.resource == x.resource ? 1 : 0) -
                    (held && held->resource == x.resource ? 1 : 0);
  return units + 1 <= m.resource_quota(x.resource);
}

std::optional<BlockClass> MatchingView::waste_class(StudentId s, Choice x) const {
  if (!improves(s, x) || !can_move(s, x)) return std::nullopt;
  const auto& held = matching_->of(s);
  return held && held->college == x.college ? BlockClass::kResourceWaste : BlockClass::kSeatWaste;
}

int MatchingView::envy_victims(StudentId s, Choice x, std::vector<Contract>& victims) const {
  if (!improves(s, x)) return 0;
  const Market& m = *market_;
  const int my_rank = m.rank(x.college, s);
  int direct = 0;
  for (StudentId v : members_[x.college]) {
    if (m.rank(x.college, v) <= my_rank || !can_swap(s, x, v)) continue;
    const Choice held = *matching_->of(v);
    victims.push_back({v, held.college, held.resource});
    if (x.resource == kEmptyResource || held.resource == x.resource) ++direct;
  }
  return direct;
}

bool MatchingView::direct_envy_blocks(StudentId s, Choice x) const {
  if (!improves(s, x)) return false;
  const Market& m = *market_;
  const int my_rank = m.rank(x.college, s);
  for (StudentId v : members_[x.college]) {
    if (m.rank(x.college, v) <= my_rank) continue;
    if (x.resource != kEmptyResource && matching_->of(v)->resource != x.resource) continue;
    if (can_swap(s, x, v)) return true;
  }
  return false;
}

namespace {

void require_audit_inputs(const Market& m, const Matching& mu) {
  if (mu.n_students() != m.n_students()) {
    throw Error("matching and market disagree on the number of students");
  }
  if (!is_feasible(m, mu)) throw Error("matching is not feasible: " + to_string(mu));
  if (!is_individually_rational(m, mu)) {
    throw Error("matching is not individually rational: " + to_string(mu));
  }
}

void require_outside(const Market& m, const Matching& mu, const Contract& x) {
  require_audit_inputs(m, mu);
  if (!m.valid_student(x.student) || !m.valid_college(x.college) ||
      !m.valid_resource(x.resource)) {
    throw Error("contract " + to_string(x) + " references unknown ids");
  }
  if (mu.contains(x)) throw Error("contract " + to_string(x) + " is already in the matching");
}

/// Finds an x' = (s', c, r') dominating the waste-block (s, c, r).
///
/// Only the student s changes between mu and mu' = (mu \ mu_s) + (s,c,r), and a
/// direct-envy block whose victim is not s is unaffected by that change, so x'
/// must gain s as a direct victim: s' outranks s at c and r' is r or r0.
std::optional<Contract> find_dominator(const MatchingView& view, StudentId s, Choice x) {
  const Market& m = view.market();
  Matching moved = view.matching();
  moved.assign(s, x);
  const MatchingView after(m, moved);

  const int my_rank = m.rank(x.college, s);
  for (int k = 1; k < my_rank; ++k) {
    const StudentId other = m.at_rank(x.college, k);
    const int n_candidates = x.resource == kEmptyResource ? 1 : 2;
    const ResourceId candidates[2] = {x.resource, kEmptyResource};
    for (int i = 0; i < n_candidates; ++i) {
      const ResourceId r = candidates[i];
      const Choice candidate{x.college, r};
      if (!m.acceptable(other, candidate)) continue;
      if (view.matching().contains({other, x.college, r})) continue;
      if (view.waste_class(other, candidate) || view.direct_envy_blocks(other, candidate)) continue;
      if (after.direct_envy_blocks(other, candidate)) return Contract{other, x.college, r};
    }
  }
  return std::nullopt;
}

struct StudentScan {
  std::vector<WasteWitness> seat;
  std::vector<WasteWitness> resource;
  std::vector<EnvyWitness> direct;
  std::vector<EnvyWitness> indirect;
  int envy_pairs = 0;
};

void scan_student(const MatchingView& view, StudentId s, StudentScan& out) {
  const auto list = view.market().preferences(s);
  const int held = view.held_position(s);
  std::vector<Contract> victims;
  for (int k = 0; k < held; ++k) {
    const Choice x = list[k];
    const Contract contract{s, x.college, x.resource};
    if (const auto waste = view.waste_class(s, x)) {
      (*waste == BlockClass::kSeatWaste ? out.seat : out.resource).push_back({contract, {}});
    }
    victims.clear();
    const int direct = view.envy_victims(s, x, victims);
    if (victims.empty()) continue;
    out.envy_pairs += static_cast<int>(victims.size());
    if (direct > 0) {
      std::erase_if(victims, [&](const Contract& v) {
        return x.resource != kEmptyResource && v.resource != x.resource;
      });
      out.direct.push_back({contract, victims});
    } else {
      out.indirect.push_back({contract, victims});
    }
  }
}

BlockingReport assemble(std::vector<StudentScan>& scans) {
  BlockingReport report;
  for (auto& scan : scans) {
    std::move(scan.seat.begin(), scan.seat.end(), std::back_inserter(report.seat_waste));
    std::move(scan.resource.begin(), scan.resource.end(),
              std::back_inserter(report.resource_waste));
    std::move(scan.direct.begin(), scan.direct.end(), std::back_inserter(report.direct_envy));
    std::move(scan.indirect.begin(), scan.indirect.end(),
              std::back_inserter(report.indirect_envy));
    report.envy_pairs += scan.envy_pairs;
  }
  auto& c = report.counts;
  c.seat = static_cast<int>(report.seat_waste.size());
  c.resource = static_cast<int>(report.resource_waste.size());
  c.direct_envy = static_cast<int>(report.direct_envy.size());
  c.indirect_envy = static_cast<int>(report.indirect_envy.size());
  return report;
}

void finish_flags(const MatchingView& view, BlockingReport& report) {
  const Market& m = view.market();
  const auto& c = report.counts;
  auto& f = report.flags;
  f.direct_envy_free = c.direct_envy == 0;
  f.envy_free = f.direct_envy_free && c.indirect_envy == 0;
  f.seat_efficient = c.seat == 0;
  f.resource_efficient = c.resource == 0;
  f.non_wasteful = f.seat_efficient && f.resource_efficient;
  f.stable = f.envy_free && f.non_wasteful;

  bool waste_on_exhausted_resources = true;
  report.undominated_waste = 0;
  for (const auto* list : {&report.seat_waste, &report.resource_waste}) {
    for (const auto& w : *list) {
      const ResourceId r = w.contract.resource;
      if (r == kEmptyResource || view.resource_count(r) < m.resource_quota(r)) {
        waste_on_exhausted_resources = false;
      }
      if (!w.dominated_by) ++report.undominated_waste;
    }
  }
  f.weakly_stable = f.direct_envy_free && waste_on_exhausted_resources;
  f.direct_envy_stable = f.direct_envy_free && report.undominated_waste == 0;
}

std::vector<WasteWitness*> waste_list(BlockingReport& report) {
  std::vector<WasteWitness*> all;
  for (auto& w : report.seat_waste) all.push_back(&w);
  for (auto& w : report.resource_waste) all.push_back(&w);
  return all;
}

}  // namespace

std::vector<Contract> envy_blocks(const Market& m, const Matching& mu, const Contract& x) {
  require_outside(m, mu, x);
  if (!m.acceptable(x.student, x.choice())) {
    throw Error("contract " + to_string(x) + " is unacceptable to its student");
  }
  const MatchingView view(m, mu);
  std::vector<Contract> victims;
  view.envy_victims(x.student, x.choice(), victims);
  return victims;
}

DirectEnvyResult is_direct_envy_block(const Market& m, const Matching& mu, const Contract& x) {
  DirectEnvyResult result;
  for (const auto& v : envy_blocks(m, mu, x)) {
    if (x.resource == kEmptyResource || v.resource == x.resource) result.witnesses.push_back(v);
  }
  result.blocking = !result.witnesses.empty();
  return result;
}

std::optional<BlockClass> waste_block_class(const Market& m, const Matching& mu,
                                            const Contract& x) {
  require_outside(m, mu, x);
  return MatchingView(m, mu).waste_class(x.student, x.choice());
}

DominanceResult is_dominated(const Market& m, const Matching& mu, const Contract& x) {
  require_outside(m, mu, x);
  const MatchingView view(m, mu);
  if (!view.waste_class(x.student, x.choice())) {
    throw Error("contract " + to_string(x) + " does not waste-block the matching");
  }
  DominanceResult result;
  result.witness = find_dominator(view, x.student, x.choice());
  result.dominated = result.witness.has_value();
  return result;
}

BlockingReport audit(const Market& m, const Matching& mu, int threads) {
  require_audit_inputs(m, mu);
  const MatchingView view(m, mu);
  const int n = m.n_students();
  std::vector<StudentScan> scans(n);

#ifdef _OPENMP
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(team)
#endif
  for (int s = 0; s < n; ++s) scan_student(view, s, scans[s]);

  BlockingReport report = assemble(scans);
  auto waste = waste_list(report);
  const int n_waste = static_cast<int>(waste.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
  for (int i = 0; i < n_waste; ++i) {
    const auto& x = waste[i]->contract;
    waste[i]->dominated_by = find_dominator(view, x.student, x.choice());
  }

  finish_flags(view, report);
  return report;
}

BlockingReport audit_serial(const Market& m, const Matching& mu) {
  require_audit_inputs(m, mu);
  const MatchingView view(m, mu);
  std::vector<StudentScan> scans(m.n_students());
  for (int s = 0; s < m.n_students(); ++s) scan_student(view, s, scans[s]);
  BlockingReport report = assemble(scans);
  for (auto* w : waste_list(report)) {
    w->dominated_by = find_dominator(view, w->contract.student, w->contract.choice());
  }
  finish_flags(view, report);
  return report;
}

nlohmann::ordered_json report_to_json(const BlockingReport& report, bool with_witnesses) {
  using OJson = nlohmann::ordered_json;
  const auto& c = report.counts;
  const auto& f = report.flags;
  OJson out;
  out["counts"] = {{"resource", c.resource},
                   {"seat", c.seat},
                   {"direct_envy", c.direct_envy},
                   {"indirect_envy", c.indirect_envy},
                   {"total", c.total()}};
  out["flags"] = {{"stable", f.stable},
                  {"envy_free", f.envy_free},
                  {"direct_envy_free", f.direct_envy_free},
                  {"non_wasteful", f.non_wasteful},
                  {"seat_efficient", f.seat_efficient},
                  {"resource_efficient", f.resource_efficient},
                  {"weakly_stable", f.weakly_stable},
                  {"direct_envy_stable", f.direct_envy_stable}};
  out["envy_pairs"] = report.envy_pairs;
  out["undominated_waste"] = report.undominated_waste;
  if (!with_witnesses) return out;

  auto contract = [](const Contract& x) {
    return OJson::array({x.student, x.college, x.resource});
  };
  auto waste = [&](const std::vector<WasteWitness>& list) {
    OJson arr = OJson::array();
    for (const auto& w : list) {
      OJson item{{"contract", contract(w.contract)}};
      item["dominated_by"] = w.dominated_by ? contract(*w.dominated_by) : OJson(nullptr);
      arr.push_back(std::move(item));
    }
    return arr;
  };
  auto envy = [&](const std::vector<EnvyWitness>& list) {
    OJson arr = OJson::array();
    for (const auto& e : list) {
      OJson victims = OJson::array();
      for (const auto& v : e.victims) victims.push_back(contract(v));
      arr.push_back({{"contract", contract(e.contract)}, {"victims", std::move(victims)}});
    }
    return arr;
  };
  out["witnesses"] = {{"resource", waste(report.resource_waste)},
                      {"seat", waste(report.seat_waste)},
                      {"direct_envy", envy(report.direct_envy)},
                      {"indirect_envy", envy(report.indirect_envy)}};
  return out;
}

}  // namespace rrc
