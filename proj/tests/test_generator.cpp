#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "rrc/generator.hpp"
#include "rrc/market_io.hpp"

using namespace rrc;

namespace {

// Upper 5% points of the chi-square distribution.
constexpr double kChi2Df4 = 9.488;
constexpr double kChi2Df5 = 11.070;
constexpr double kChi2Df9 = 16.919;

double chi_square(const std::map<std::vector<Choice>, int>& counts, int categories, int draws) {
  const double expected = static_cast<double>(draws) / categories;
  double stat = 0.0;
  for (const auto& [_, n] : counts) stat += (n - expected) * (n - expected) / expected;
  stat += (categories - static_cast<int>(counts.size())) * expected;
  return stat;
}

/// (c, r) comes after (c+1, r) and after (c, r+1) with r0 ranked last.
bool is_linear_extension(const std::vector<Choice>& order, int n_colleges, int n_resources) {
  std::map<Choice, int> at;
  for (int i = 0; i < static_cast<int>(order.size()); ++i) at[order[i]] = i;
  if (static_cast<int>(at.size()) != n_colleges * (n_resources + 1)) return false;
  for (const auto& [x, i] : at) {
    if (x.college + 1 < n_colleges && at[{x.college + 1, x.resource}] > i) return false;
    if (x.resource < n_resources && at[{x.college, x.resource + 1}] > i) return false;
  }
  return true;
}

bool is_unaligned_order(const std::vector<Choice>& order, int n_colleges, int n_resources) {
  std::set<Choice> seen;
  for (const Choice& x : order) {
    if (x.resource == kEmptyResource) {
      for (ResourceId r = 1; r <= n_resources; ++r) {
        if (!seen.count({x.college, r})) return false;
      }
    }
    seen.insert(x);
  }
  return static_cast<int>(seen.size()) == n_colleges * (n_resources + 1);
}

GenConfig config(int n, int c, int r) {
  GenConfig g;
  g.n_students = n;
  g.n_colleges = c;
  g.n_resources = r;
  return g;
}

}  // namespace

TEST_CASE("unaligned orders keep each r0 below its college's resources, uniformly") {
  Rng rng(1);
  std::map<std::vector<Choice>, int> counts;
  constexpr int kDraws = 6000;
  for (int i = 0; i < kDraws; ++i) {
    const auto order = sample_unaligned_order(2, 1, rng);
    REQUIRE(is_unaligned_order(order, 2, 1));
    ++counts[order];
  }
  CHECK(counts.size() == 6);
  CHECK(chi_square(counts, 6, kDraws) < kChi2Df5);
  CHECK(is_unaligned_order(sample_unaligned_order(4, 3, rng), 4, 3));
}

TEST_CASE("fully aligned orders are uniform linear extensions of the product chain") {
  Rng rng(2);
  std::map<std::vector<Choice>, int> counts;
  constexpr int kDraws = 5000;
  for (int i = 0; i < kDraws; ++i) {
    const auto order = sample_aligned_order(2, 2, rng);
    REQUIRE(is_linear_extension(order, 2, 2));
    ++counts[order];
  }
  CHECK(counts.size() == 5);
  CHECK(chi_square(counts, 5, kDraws) < kChi2Df4);
  for (int i = 0; i < 50; ++i) CHECK(is_linear_extension(sample_aligned_order(5, 3, rng), 5, 3));
}

TEST_CASE("frontier orders are linear extensions starting at the best contract") {
  Rng rng(3);
  for (SemiSampler s : {SemiSampler::kQualityWeighted, SemiSampler::kUniformFrontier}) {
    for (Quality q : {Quality::kAscending, Quality::kEqual}) {
      for (int i = 0; i < 50; ++i) {
        const auto order = sample_frontier_order(4, 3, s, q, rng);
        CHECK(is_linear_extension(order, 4, 3));
        CHECK(order.front() == Choice{3, 3});
        CHECK(order.back() == Choice{0, kEmptyResource});
      }
    }
  }
}

TEST_CASE("quality weighting favours better colleges on the frontier") {
  // After (c2,r1) both (c1,r1) and (c2,r0) are open; weights are 1 and 2.
  Rng rng(4);
  constexpr int kDraws = 9000;
  int better = 0;
  for (int i = 0; i < kDraws; ++i) {
    const auto order =
        sample_frontier_order(2, 1, SemiSampler::kQualityWeighted, Quality::kAscending, rng);
    if (order[1] == Choice{1, kEmptyResource}) ++better;
  }
  const double share = static_cast<double>(better) / kDraws;
  CHECK(share == doctest::Approx(2.0 / 3.0).epsilon(0.03));
  int uniform_better = 0;
  for (int i = 0; i < kDraws; ++i) {
    const auto order =
        sample_frontier_order(2, 1, SemiSampler::kUniformFrontier, Quality::kAscending, rng);
    if (order[1] == Choice{1, kEmptyResource}) ++uniform_better;
  }
  CHECK(static_cast<double>(uniform_better) / kDraws == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("suffix truncation keeps a uniform prefix length") {
  Rng rng(5);
  std::vector<Choice> base;
  for (int i = 0; i < 9; ++i) base.push_back({i, 0});
  std::map<std::vector<Choice>, int> counts;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    auto list = base;
    truncate_suffix(list, rng);
    CHECK(std::equal(list.begin(), list.end(), base.begin()));
    ++counts[list];
  }
  CHECK(counts.size() == 10);
  CHECK(chi_square(counts, 10, kDraws) < kChi2Df9);
}

TEST_CASE("seat and resource budgets follow the balance settings") {
  GenConfig g = config(100, 10, 5);
  CHECK(seat_budget(g) == 100);
  g.college_balance = CollegeBalance::kUp;
  CHECK(seat_budget(g) == 200);
  g.college_balance = CollegeBalance::kDown;
  CHECK(seat_budget(g) == 50);
  g.resource_balance = ResourceBalance::kDown;
  CHECK(resource_budget(g) == 50);
  g.resource_balance = ResourceBalance::kUp;
  CHECK(resource_budget(g) == 200);
  CHECK(balance_label(g) == "colleges_down+resources_up");
  CHECK(balance_label(config(1, 1, 0)) == "balanced");
}

TEST_CASE("quota splits are positive and sum to the budget") {
  Rng rng(6);
  GenConfig g = config(23, 5, 2);
  CHECK(gen_college_quotas(g, rng) == std::vector<int>{5, 5, 5, 4, 4});
  g.quota_split = QuotaSplit::kRandom;
  for (int i = 0; i < 100; ++i) {
    const auto q = gen_college_quotas(g, rng);
    CHECK(std::accumulate(q.begin(), q.end(), 0) == 23);
    CHECK(*std::min_element(q.begin(), q.end()) >= 1);
  }
}

TEST_CASE("region schemes") {
  Rng rng(7);
  GenConfig g = config(40, 7, 3);
  std::vector<int> quotas;
  for (const auto& spec : gen_resources(g, rng)) {
    CHECK(spec.region.size() == 7);
    quotas.push_back(spec.quota);
  }
  CHECK(quotas == std::vector<int>{14, 13, 13});
  g.region_scheme = RegionScheme::kRandomSubset;
  g.region_size = 3;
  for (const auto& spec : gen_resources(g, rng)) {
    CHECK(spec.region.size() == 3);
    CHECK(std::is_sorted(spec.region.begin(), spec.region.end()));
  }
  g.region_scheme = RegionScheme::kPartition;
  std::vector<int> owner(7, 0);
  for (const auto& spec : gen_resources(g, rng)) {
    for (CollegeId c : spec.region) ++owner[c];
  }
  CHECK(owner == std::vector<int>(7, 1));
}

TEST_CASE("generated markets are valid, reproducible and respect regions") {
  for (Alignment a : {Alignment::kNone, Alignment::kStudentSemi, Alignment::kStudentFull,
                      Alignment::kCollegeFull, Alignment::kStudentAndCollegeFull}) {
    GenConfig g = config(60, 6, 3);
    g.alignment = a;
    g.region_scheme = RegionScheme::kRandomSubset;
    g.region_size = 2;
    g.seed = 99;
    const Market m = generate_market(g);
    CHECK_FALSE(has_errors(validate_market(m)));
    CHECK(dump_market(generate_market(g)) == dump_market(m));
    g.seed = 100;
    CHECK_FALSE(generate_market(g) == m);
    for (StudentId s = 0; s < m.n_students(); ++s) {
      for (const Choice& x : m.preferences(s)) CHECK(m.in_region(x.resource, x.college));
    }
  }
}

TEST_CASE("college alignment gives every college the same priority") {
  GenConfig g = config(12, 4, 2);
  g.alignment = Alignment::kCollegeFull;
  const Market m = generate_market(g);
  for (CollegeId c = 0; c < 4; ++c) {
    const auto p = m.priority(c);
    CHECK(std::vector<StudentId>(p.begin(), p.end()) ==
          std::vector<StudentId>{11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0});
  }
}

TEST_CASE("without truncation every list is complete") {
  GenConfig g = config(10, 3, 2);
  g.truncation = Truncation::kNone;
  const Market m = generate_market(g);
  for (StudentId s = 0; s < 10; ++s) CHECK(m.preferences(s).size() == 9);
}

TEST_CASE("config json round-trips and rejects unknown names") {
  GenConfig g = config(50, 5, 2);
  g.alignment = Alignment::kStudentSemi;
  g.semi_sampler = SemiSampler::kUniformFrontier;
  g.quota_split = QuotaSplit::kRandom;
  g.seed = 42;
  CHECK(config_from_json(config_to_json(g)) == g);
  CHECK(config_from_json(nlohmann::json::object()) == GenConfig{});
  CHECK_THROWS_WITH_AS(config_from_json({{"alignment", "diagonal"}}),
                       "config: alignment must be one of none, student_semi, student_full, "
                       "college_full, student_and_college_full (got 'diagonal')",
                       Error);
  CHECK_THROWS_AS(config_from_json({{"n_students", "many"}}), Error);
}

TEST_CASE("unusable configs are rejected") {
  CHECK_THROWS_AS(validate_config(config(0, 1, 0)), Error);
  CHECK_THROWS_AS(validate_config(config(5, 0, 0)), Error);
  CHECK_THROWS_AS(validate_config(config(5, 2, -1)), Error);
  CHECK_THROWS_WITH_AS(validate_config(config(3, 2, 5)),
                       "config: resource budget 3 is smaller than the number of resources 5", Error);
  CHECK_THROWS_WITH_AS(validate_config(config(3, 5, 0)),
                       "config: seat budget 3 is smaller than the number of colleges 5", Error);
  GenConfig g = config(10, 2, 3);
  g.region_scheme = RegionScheme::kPartition;
  CHECK_THROWS_AS(generate_market(g), Error);
  g.region_scheme = RegionScheme::kRandomSubset;
  g.region_size = 4;
  CHECK_THROWS_AS(generate_market(g), Error);
}
