// Acceptance checks 1 to 13. With no argument every criterion runs; with a
// number only that one does. Exit status is non-zero when any selected
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "rrc/blocking.hpp"
#include "rrc/cutoff.hpp"
#include "rrc/generator.hpp"
#include "rrc/harness.hpp"
#include "rrc/market_io.hpp"
#include "rrc/mechanisms.hpp"
#include "rrc/oracle.hpp"
#include "support.hpp"

using namespace rrc;
namespace fs = std::filesystem;

namespace {

constexpr ResourceId r0 = kEmptyResource;
constexpr ResourceId r1 = 1;

// Wall-clock budgets in seconds.
constexpr double kFixtureBudget = 1.0;
constexpr double kMinuteBudget = 60.0;
constexpr double kProfileBudget = 300.0;
constexpr double kGridBudget = 600.0;

constexpr std::size_t kMinAudits = 10'000;
constexpr int kTinyMarkets = 200;
constexpr int kGridReplicas = 100;
constexpr int kGridSeeds = 5;
constexpr int kZeroResourceMarkets = 100;
constexpr int kOrderingReplicas = 100;
constexpr double kSignificance = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  double budget;
  std::function<Outcome()> check;
};

std::vector<Matching> sorted(std::vector<Matching> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string list(const std::vector<Matching>& v) {
  std::string out;
  for (const auto& mu : v) out += (out.empty() ? "" : " ") + to_string(mu);
  return out.empty() ? "none" : out;
}

Outcome example1() {
  const auto c = census(fixture("example1").market);
  const bool ok = c.matchings.size() == 5 && c.stable.empty();
  return {ok, fmt::format("{} feasible IR matchings, {} stable", c.matchings.size(), c.stable.size())};
}

Outcome unique_des() {
  const Market m = fixture("prop2").market;
  const auto c = census(m);
  const Matching expected(3, {{0, 0, r0}, {2, 1, r0}});
  const auto des = c.pick(c.direct_envy_stable);
  const bool unique = des.size() == 1 && des[0] == expected;
  const bool inefficient = unique && !c.reports[c.direct_envy_stable[0]].flags.resource_efficient;
  return {unique && inefficient,
          fmt::format("direct-envy stable: {}; resource-inefficient: {}", list(des), inefficient)};
}

Outcome two_des() {
  const auto c = census(fixture("prop4").market);
  const auto des = sorted(c.pick(c.direct_envy_stable));
  const auto expected = sorted({Matching(3, {{0, 2, r0}, {1, 1, r1}, {2, 0, r0}}),
                                Matching(3, {{0, 0, r0}, {1, 1, r0}, {2, 2, r1}})});
  bool envy_free = false;
  for (std::size_t i : c.direct_envy_stable) envy_free = envy_free || c.reports[i].flags.envy_free;
  return {des == expected && !envy_free,
          fmt::format("direct-envy stable: {}; any envy-free: {}", list(des), envy_free)};
}

Outcome des_implies_weak() {
  std::size_t audits = 0;
  std::size_t violations = 0;
  std::string first;
  auto scan = [&](const std::string& where, const Market& m) {
    for (const auto& mu : enumerate_matchings(m)) {
      const auto rep = audit(m, mu, 1);
      ++audits;
      if (rep.flags.direct_envy_stable && !rep.flags.weakly_stable) {
        if (violations++ == 0) first = where + " " + to_string(mu);
      }
    }
  };
  for (const auto& f : fixtures()) scan(f.name, f.market);
  Rng rng(2718);
  int markets = 0;
  while (audits < kMinAudits) {
    scan(fmt::format("random market {}", markets), testing::random_small_market(rng, {6, 3, 2, 2}));
    ++markets;
  }
  std::string detail = fmt::format("{} violations of direct_envy_stable => weakly_stable in {} audits "
                                   "({} fixtures, {} random markets)",
                                   violations, audits, fixtures().size(), markets);
  if (violations) detail += "; first: " + first;
  return {violations == 0, detail};
}

Outcome cutoff_equivalence() {
  Rng rng(1618);
  int mismatched = 0;
  int round_trip_failures = 0;
  for (int i = 0; i < kTinyMarkets; ++i) {
    const Market m = testing::random_small_market(rng, {3, 2, 1, 2});
    const auto c = census(m);
    std::set<Matching> induced;
    for (const auto& k : enumerate_profiles(m)) {
      if (is_optimal(m, k)) induced.insert(induced_matching(m, k));
    }
    const auto des = c.pick(c.direct_envy_stable);
    if (induced != std::set<Matching>(des.begin(), des.end())) ++mismatched;
    for (const auto& mu : des) {
      if (induced_matching(m, cutoffs_of(m, mu)) != mu) ++round_trip_failures;
    }
  }
  return {mismatched == 0 && round_trip_failures == 0,
          fmt::format("{} tiny markets: {} set mismatches, {} cutoffs_of round-trip failures",
                      kTinyMarkets, mismatched, round_trip_failures)};
}

struct GridRun {
  std::map<std::string, std::vector<RunResult>> by_regime;
  std::map<std::string, std::vector<MarketEntry>> markets;
};

/// 100 markets per regime at 100 students, 10 colleges and 4 non-empty resources, each run with five mechanism seeds.
const GridRun& grid() {
  static const GridRun run = [] {
    GridRun g;
    const std::vector<std::pair<Alignment, std::vector<MechanismKind>>> regimes{
        {Alignment::kNone, {std::begin(kAllMechanisms), std::end(kAllMechanisms)}},
        {Alignment::kStudentFull, {std::begin(kAllMechanisms), std::end(kAllMechanisms)}},
        {Alignment::kCollegeFull, {std::begin(kAllMechanisms), std::end(kAllMechanisms)}},
        {Alignment::kStudentAndCollegeFull, {MechanismKind::kCsd}}};
    for (const auto& [alignment, mechanisms] : regimes) {
      ExperimentConfig e;
      e.replicas = kGridReplicas;
      e.master_seed = 20240601;
      GenConfig base;
      base.alignment = alignment;
      e.regimes.push_back({to_string(alignment), base});
      const auto markets = generate_batch(e);
      auto& out = g.by_regime[to_string(alignment)];
      for (int seed = 1; seed <= kGridSeeds; ++seed) {
        auto results = run_batch(markets, mechanisms, seed);
        out.insert(out.end(), results.begin(), results.end());
      }
      g.markets[to_string(alignment)] = markets;
    }
    return g;
  }();
  return run;
}

const std::vector<std::string> kGridRegimes{"none", "student_full", "college_full"};

Outcome cutoff_des() {
  int runs = 0;
  int bad = 0;
  for (const auto& regime : kGridRegimes) {
    for (const auto& r : grid().by_regime.at(regime)) {
      if (r.mechanism != MechanismKind::kIrc && r.mechanism != MechanismKind::kImc &&
          r.mechanism != MechanismKind::kIdc) {
        continue;
      }
      ++runs;
      if (!r.flags.direct_envy_stable) ++bad;
    }
  }
  return {runs == 3 * 3 * kGridReplicas * kGridSeeds && bad == 0,
          fmt::format("{} irc/imc/idc runs, {} not direct-envy stable", runs, bad)};
}

Outcome iuc_envy_free() {
  int runs = 0;
  int bad = 0;
  for (const auto& regime : kGridRegimes) {
    for (const auto& r : grid().by_regime.at(regime)) {
      if (r.mechanism != MechanismKind::kIuc) continue;
      ++runs;
      if (r.counts.direct_envy || r.counts.indirect_envy || r.counts.resource) ++bad;
    }
  }
  return {runs == 3 * kGridReplicas * kGridSeeds && bad == 0,
          fmt::format("{} iuc runs, {} with envy or resource waste", runs, bad)};
}

Outcome dictatorships_efficient() {
  int runs = 0;
  int wasteful = 0;
  for (const auto& regime : kGridRegimes) {
    for (const auto& r : grid().by_regime.at(regime)) {
      if (r.mechanism != MechanismKind::kRsd && r.mechanism != MechanismKind::kCsd) continue;
      ++runs;
      if (r.counts.resource || r.counts.seat) ++wasteful;
    }
  }
  Rng rng(1414);
  int checked = 0;
  int dominated = 0;
  for (int i = 0; i < kTinyMarkets; ++i) {
    const Market m = testing::random_small_market(rng, {4, 3, 2, 2});
    const auto c = census(m);
    for (MechanismKind k : {MechanismKind::kRsd, MechanismKind::kCsd}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto idx = c.find(run_mechanism(k, m, seed).matching);
        ++checked;
        if (!idx || !std::binary_search(c.pareto_efficient.begin(), c.pareto_efficient.end(), *idx)) {
          ++dominated;
        }
      }
    }
  }
  return {runs == 2 * 3 * kGridReplicas * kGridSeeds && wasteful == 0 && dominated == 0,
          fmt::format("{} rsd/csd grid runs, {} wasteful; {} oracle-checked runs, {} not Pareto-efficient",
                      runs, wasteful, checked, dominated)};
}

Outcome csd_aligned() {
  int runs = 0;
  int blocked = 0;
  for (const char* regime : {"college_full", "student_and_college_full"}) {
    for (const auto& r : grid().by_regime.at(regime)) {
      if (r.mechanism != MechanismKind::kCsd) continue;
      ++runs;
      if (r.counts.total() != 0) ++blocked;
    }
  }
  return {runs == 2 * kGridReplicas * kGridSeeds && blocked == 0,
          fmt::format("{} csd runs under aligned priorities, {} with blocking contracts", runs, blocked)};
}

Outcome no_resources_da() {
  int disagree = 0;
  int not_da = 0;
  int unstable = 0;
  for (int i = 0; i < kZeroResourceMarkets; ++i) {
    GenConfig g;
    g.n_resources = 0;
    g.seed = derive_seed(9, i);
    const Market m = generate_market(g);
    const Matching da = college_proposing_da(m);
    const Matching irc = run_irc(m, 4 * i).matching;
    if (run_imc(m, 4 * i + 1).matching != irc || run_idc(m, 4 * i + 2).matching != irc ||
        run_iuc(m, 4 * i + 3).matching != irc) {
      ++disagree;
    }
    if (irc != da) ++not_da;
    if (!audit(m, irc, 1).flags.stable) ++unstable;
  }
  return {disagree == 0 && not_da == 0 && unstable == 0,
          fmt::format("{} zero-resource markets: {} disagreements, {} differ from deferred "
                      "acceptance, {} unstable",
                      kZeroResourceMarkets, disagree, not_da, unstable)};
}

Outcome manipulation() {
  const Market m = fixture("prop8_market2").market;
  const Market lied = m.with_preferences(0, {{1, r0}});
  std::string detail;
  bool all_improve = true;
  for (MechanismKind k : {MechanismKind::kIrc, MechanismKind::kImc, MechanismKind::kIdc,
                          MechanismKind::kIuc}) {
    const auto truthful = run_mechanism(k, m, 0).matching.of(0);
    const auto manipulated = run_mechanism(k, lied, 0).matching.of(0);
    const bool improves = prefers(m, 0, manipulated, truthful);
    all_improve = all_improve && improves;
    detail += fmt::format("{} {}; ", to_string(k), improves ? "improves" : "does not improve");
  }
  Rng rng(8080);
  int probes = 0;
  int found = 0;
  for (int i = 0; i < kTinyMarkets; ++i) {
    const Market tiny = testing::random_small_market(rng, {3, 2, 1, 1});
    for (StudentId s = 0; s < tiny.n_students(); ++s) {
      probes += 2;
      if (strategyproofness_probe(tiny, MechanismKind::kRsd, s, {static_cast<std::uint64_t>(i)})) ++found;
      if (strategyproofness_probe(tiny, MechanismKind::kRsd, s, {0, 100'000, true})) ++found;
    }
  }
  detail += fmt::format("rsd probes: {} counterexamples in {} probes", found, probes);
  return {all_improve && found == 0, detail};
}

struct PairedTest {
  double mean_diff;
  double t;
  double p;
};

/// One-sided paired t-test of mean(b - a) > 0.
PairedTest paired_greater(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] - a[i];
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= n;
  double sq = 0.0;
  for (double x : d) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / (n - 1));
  if (sd == 0.0) return {mean, mean > 0 ? INFINITY : 0.0, mean > 0 ? 0.0 : 1.0};
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  return {mean, t, boost::math::cdf(boost::math::complement(dist, t))};
}

Outcome ordering() {
  ExperimentConfig e;
  e.replicas = kOrderingReplicas;
  e.master_seed = 1212;
  e.regimes.push_back({"none", GenConfig{}});
  const auto markets = generate_batch(e);
  const auto results =
      run_batch(markets, {MechanismKind::kIrc, MechanismKind::kImc, MechanismKind::kIdc}, 1212);
  std::map<MechanismKind, std::vector<double>> totals;
  for (const auto& r : results) totals[r.mechanism].push_back(r.counts.total());
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const auto& imc = totals[MechanismKind::kImc];
  const auto& irc = totals[MechanismKind::kIrc];
  const auto& idc = totals[MechanismKind::kIdc];
  const PairedTest lo = paired_greater(imc, irc);
  const PairedTest hi = paired_greater(irc, idc);
  const bool ok = mean(imc) < mean(irc) && mean(irc) < mean(idc) && lo.p < kSignificance &&
                  hi.p < kSignificance;
  return {ok, fmt::format("mean total imc {:.2f} < irc {:.2f} < idc {:.2f}; paired one-sided "
                          "p(irc>imc) = {:.3g}, p(idc>irc) = {:.3g}",
                          mean(imc), mean(irc), mean(idc), lo.p, hi.p)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "rrc_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto config = nlohmann::json::parse(R"({
    "name": "determinism",
    "replicas": 10,
    "master_seed": 13,
    "regimes": [{"alignment": "none"},
                {"alignment": "student_semi"},
                {"alignment": "college_full", "college_balance": "colleges_down",
                 "resource_balance": "resources_up"}]
  })");
  write_text(root / "config.json", config.dump(2));
  std::ostringstream log;
  for (const char* pass : {"a", "b"}) {
    cmd_generate(root / "config.json", root / pass, std::nullopt, 0, log);
    cmd_run(root / pass, RunOptions{}, log);
    cmd_table(root / pass, log);
  }
  int files = 0;
  int differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "timings.json") continue;
    ++files;
    const fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
    if (!fs::exists(twin) || read_text(entry.path()) != read_text(twin)) ++differing;
  }
  const bool complete = fs::exists(root / "a" / "results.json") && fs::exists(root / "a" / "table.csv");
  fs::remove_all(root);
  return {complete && differing == 0 && files == 34,
          fmt::format("{} files compared (markets, manifest, results, csv, text table), {} differ",
                      files, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, kFixtureBudget, example1},
      {2, kFixtureBudget, unique_des},
      {3, kFixtureBudget, two_des},
      {4, kMinuteBudget, des_implies_weak},
      {5, kProfileBudget, cutoff_equivalence},
      {6, kGridBudget, cutoff_des},
      {7, kGridBudget, iuc_envy_free},
      {8, kGridBudget, dictatorships_efficient},
      {9, kGridBudget, csd_aligned},
      {10, kMinuteBudget, no_resources_da},
      {11, kMinuteBudget, manipulation},
      {12, kGridBudget, ordering},
      {13, kProfileBudget, determinism}};

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 13) {
      std::cerr << "usage: " << argv[0] << " [criterion 1-13]\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << fmt::format("criterion {}: {} {} ({:.2f}s of {:.0f}s{})", c.id,
                             pass ? "PASS" : "FAIL", o.detail, seconds, c.budget,
                             in_time ? "" : ", over budget")
              << std::endl;
  }
  return all_pass ? 0 : 1;
}
