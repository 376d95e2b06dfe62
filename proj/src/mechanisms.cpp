#include "rrc/mechanisms.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <fmt/format.h>

#include "rrc/market_io.hpp"
#include "rrc/rng.hpp"

namespace rrc {

const char* to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kIrc: return "irc";
    case MechanismKind::kImc: return "imc";
    case MechanismKind::kIdc: return "idc";
    case MechanismKind::kIuc: return "iuc";
    case MechanismKind::kRsd: return "rsd";
    case MechanismKind::kCsd: return "csd";
  }
  return "?";
}

MechanismKind parse_mechanism(std::string_view name) {
  for (MechanismKind k : kAllMechanisms) {
    if (name == to_string(k)) return k;
  }
  throw Error(fmt::format("unknown mechanism '{}' (expected irc, imc, idc, iuc, rsd or csd)", name));
}

bool is_cutoff_mechanism(MechanismKind kind) {
  return kind != MechanismKind::kRsd && kind != MechanismKind::kCsd;
}

namespace {

RunTrace cutoff_trace(MechanismKind kind, std::uint64_t seed) {
  RunTrace t;
  t.kind = kind;
  t.seed = seed;
  return t;
}

void finish(RunTrace& t, const CutoffWalk& walk) {
  t.matching = walk.matching();
  t.cutoffs = walk.profile();
}

bool raise(CutoffWalk& walk, RunTrace& t, CollegeId c, std::vector<ResourceId> entries) {
  if (!walk.try_raise(c, entries)) return false;
  t.moves.push_back(CutoffRaise{c, std::move(entries)});
  return true;
}

std::vector<CollegeId> college_order(const Market& m, Rng& rng) {
  std::vector<CollegeId> order(m.n_colleges());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  return order;
}

/// Running college and resource counts for the serial dictatorships.
class Occupancy {
 public:
  explicit Occupancy(const Market& m)
      : m_(&m), college_(m.n_colleges(), 0), resource_(m.n_resource_ids(), 0) {}

  bool fits(Choice x) const {
    if (college_[x.college] >= m_->college_quota(x.college)) return false;
    if (x.resource == kEmptyResource) return true;
    return m_->in_region(x.resource, x.college) &&
           resource_[x.resource] < m_->resource_quota(x.resource);
  }
  void take(Choice x) {
    ++college_[x.college];
    ++resource_[x.resource];
  }
  std::optional<Choice> best_fit(StudentId s) const {
    for (const Choice& x : m_->preferences(s)) {
      if (fits(x)) return x;
    }
    return std::nullopt;
  }

 private:
  const Market* m_;
  std::vector<int> college_;
  std::vector<int> resource_;
};

}  // namespace

RunTrace run_irc(const Market& m, std::uint64_t seed) {
  RunTrace t = cutoff_trace(MechanismKind::kIrc, seed);
  Rng rng(seed);
  CutoffWalk walk(m);
  std::vector<Choice> pool;
  auto refill = [&] {
    pool.clear();
    for (CollegeId c = 0; c < m.n_colleges(); ++c) {
      for (ResourceId r = 0; r < m.n_resource_ids(); ++r) {
        if (!walk.profile().is_maximal(c, r)) pool.push_back({c, r});
      }
    }
  };
  refill();
  while (!pool.empty()) {
    const int i = rng.index(pool.size());
    const Choice e = pool[i];
    if (raise(walk, t, e.college, coupled_entries(walk.profile(), e.college, e.resource))) {
      refill();
    } else {
      pool[i] = pool.back();
      pool.pop_back();
    }
  }
  finish(t, walk);
  return t;
}

RunTrace run_imc(const Market& m, std::uint64_t seed) {
  RunTrace t = cutoff_trace(MechanismKind::kImc, seed);
  Rng rng(seed);
  CutoffWalk walk(m);
  const int n_ids = m.n_resource_ids();

  auto step = [&](CollegeId c) {
    const CutoffProfile& k = walk.profile();
    std::vector<int> levels;
    for (ResourceId r = 0; r < n_ids; ++r) {
      if (!k.is_maximal(c, r)) levels.push_back(k(c, r));
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    for (int v : levels) {
      std::vector<ResourceId> tied;
      for (ResourceId r = 0; r < n_ids; ++r) {
        if (k(c, r) == v) tied.push_back(r);
      }
      // Entries level with r0 may only rise together with it.
      const bool with_empty = tied.front() == kEmptyResource;
      const unsigned n_masks = 1u << tied.size();
      for (int size = static_cast<int>(tied.size()); size >= 1; --size) {
        std::vector<unsigned> masks;
        for (unsigned mask = 1; mask < n_masks; ++mask) {
          if (std::popcount(mask) != size) continue;
          if (with_empty && !(mask & 1u)) continue;
          masks.push_back(mask);
        }
        rng.shuffle(std::span(masks));
        for (unsigned mask : masks) {
          std::vector<ResourceId> subset;
          for (std::size_t i = 0; i < tied.size(); ++i) {
            if (mask >> i & 1u) subset.push_back(tied[i]);
          }
          if (raise(walk, t, c, std::move(subset))) return true;
        }
      }
    }
    return false;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (CollegeId c : college_order(m, rng)) changed |= step(c);
  }
  finish(t, walk);
  return t;
}

RunTrace run_idc(const Market& m, std::uint64_t seed) {
  RunTrace t = cutoff_trace(MechanismKind::kIdc, seed);
  Rng rng(seed);
  CutoffWalk walk(m);
  std::vector<Choice> entries;
  for (CollegeId c = 0; c < m.n_colleges(); ++c) {
    for (ResourceId r = 0; r < m.n_resource_ids(); ++r) entries.push_back({c, r});
  }
  bool changed = true;
  while (changed) {
    changed = false;
    rng.shuffle(std::span(entries));
    for (const Choice& e : entries) {
      while (!walk.profile().is_maximal(e.college, e.resource) &&
             raise(walk, t, e.college,
                   coupled_entries(walk.profile(), e.college, e.resource))) {
        changed = true;
      }
    }
  }
  finish(t, walk);
  return t;
}

RunTrace run_iuc(const Market& m, std::uint64_t seed) {
  RunTrace t = cutoff_trace(MechanismKind::kIuc, seed);
  Rng rng(seed);
  CutoffWalk walk(m);
  std::vector<ResourceId> all(m.n_resource_ids());
  std::iota(all.begin(), all.end(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (CollegeId c : college_order(m, rng)) {
      if (walk.profile().is_maximal(c, kEmptyResource)) continue;
      changed |= raise(walk, t, c, all);
    }
  }
  finish(t, walk);
  return t;
}

RunTrace run_rsd_ordered(const Market& m, std::span<const StudentId> order) {
  RunTrace t;
  t.kind = MechanismKind::kRsd;
  t.matching = Matching(m.n_students());
  Occupancy occ(m);
  for (StudentId s : order) {
    if (!m.valid_student(s)) throw Error(fmt::format("student order names unknown student {}", s));
    if (t.matching.of(s)) throw Error(fmt::format("student order repeats s{}", s + 1));
    if (auto x = occ.best_fit(s)) {
      occ.take(*x);
      const Contract added{s, x->college, x->resource};
      t.matching.add(added);
      t.moves.push_back(added);
    }
  }
  return t;
}

RunTrace run_rsd(const Market& m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<StudentId> order(m.n_students());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  RunTrace t = run_rsd_ordered(m, order);
  t.seed = seed;
  return t;
}

RunTrace run_csd(const Market& m, std::uint64_t seed) {
  RunTrace t;
  t.kind = MechanismKind::kCsd;
  t.seed = seed;
  t.matching = Matching(m.n_students());
  Rng rng(seed);
  Occupancy occ(m);
  std::vector<StudentId> waiting(m.n_students());
  std::iota(waiting.begin(), waiting.end(), 0);
  std::vector<Contract> best;
  while (true) {
    best.clear();
    int best_rank = 0;
    std::size_t kept = 0;
    for (StudentId s : waiting) {
      const auto x = occ.best_fit(s);
      // Counts only grow, so a student with nothing that fits never gets anything.
      if (!x) continue;
      waiting[kept++] = s;
      const int rank = m.rank(x->college, s);
      if (best.empty() || rank < best_rank) {
        best.clear();
        best_rank = rank;
      }
      if (rank == best_rank) best.push_back({s, x->college, x->resource});
    }
    waiting.resize(kept);
    if (best.empty()) break;
    const Contract pick = best.size() == 1 ? best.front() : best[rng.index(best.size())];
    occ.take(pick.choice());
    t.matching.add(pick);
    t.moves.push_back(pick);
    std::erase(waiting, pick.student);
  }
  return t;
}

RunTrace run_mechanism(MechanismKind kind, const Market& m, std::uint64_t seed) {
  switch (kind) {
    case MechanismKind::kIrc: return run_irc(m, seed);
    case MechanismKind::kImc: return run_imc(m, seed);
    case MechanismKind::kIdc: return run_idc(m, seed);
    case MechanismKind::kIuc: return run_iuc(m, seed);
    case MechanismKind::kRsd: return run_rsd(m, seed);
    case MechanismKind::kCsd: return run_csd(m, seed);
  }
  throw Error("unknown mechanism");
}

Matching replay(const Market& m, const RunTrace& trace) {
  if (is_cutoff_mechanism(trace.kind)) {
    CutoffProfile k = CutoffProfile::zeros(m);
    for (const Move& move : trace.moves) {
      const auto& raise = std::get<CutoffRaise>(move);
      for (ResourceId r : raise.resources) ++k.at(raise.college, r);
    }
    return induced_matching(m, k);
  }
  Matching mu(m.n_students());
  for (const Move& move : trace.moves) mu.add(std::get<Contract>(move));
  return mu;
}

nlohmann::json trace_to_json(const RunTrace& trace) {
  nlohmann::json moves = nlohmann::json::array();
  for (const Move& move : trace.moves) {
    if (const auto* raise = std::get_if<CutoffRaise>(&move)) {
      moves.push_back({{"college", raise->college}, {"resources", raise->resources}});
    } else {
      moves.push_back(contract_to_json(std::get<Contract>(move)));
    }
  }
  nlohmann::json doc = {{"mechanism", to_string(trace.kind)},
                        {"seed", trace.seed},
                        {"moves", std::move(moves)},
                        {"matching", matching_to_json(trace.matching)}};
  if (trace.cutoffs) doc["cutoffs"] = profile_to_json(*trace.cutoffs);
  return doc;
}

RunTrace trace_from_json(const nlohmann::json& doc, int n_students) {
  RunTrace t;
  t.kind = parse_mechanism(doc.at("mechanism").get<std::string>());
  t.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& move : doc.at("moves")) {
    if (move.is_object()) {
      t.moves.push_back(CutoffRaise{move.at("college").get<int>(),
                                    move.at("resources").get<std::vector<int>>()});
    } else {
      t.moves.push_back(Contract{move.at(0).get<int>(), move.at(1).get<int>(), move.at(2).get<int>()});
    }
  }
  t.matching = matching_from_json(doc.at("matching"), n_students);
  if (doc.contains("cutoffs")) t.cutoffs = profile_from_json(doc.at("cutoffs"), n_students);
  return t;
}

}  // namespace rrc
