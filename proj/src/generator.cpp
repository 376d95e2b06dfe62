#include "rrc/generator.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string_view>
#include <utility>

#include <fmt/format.h>

namespace rrc {

namespace {

template <class E, std::size_t N>
using Names = std::array<std::pair<E, std::string_view>, N>;

constexpr Names<Alignment, 5> kAlignmentNames{{
    {Alignment::kNone, "none"},
    {Alignment::kStudentSemi, "student_semi"},
    {Alignment::kStudentFull, "student_full"},
    {Alignment::kCollegeFull, "college_full"},
    {Alignment::kStudentAndCollegeFull, "student_and_college_full"},
}};
constexpr Names<SemiSampler, 2> kSamplerNames{{
    {SemiSampler::kQualityWeighted, "quality_weighted"},
    {SemiSampler::kUniformFrontier, "uniform_frontier"},
}};
constexpr Names<Quality, 2> kQualityNames{{
    {Quality::kAscending, "ascending"},
    {Quality::kEqual, "equal"},
}};
constexpr Names<CollegeBalance, 3> kCollegeBalanceNames{{
    {CollegeBalance::kBalanced, "balanced"},
    {CollegeBalance::kUp, "colleges_up"},
    {CollegeBalance::kDown, "colleges_down"},
}};
constexpr Names<ResourceBalance, 3> kResourceBalanceNames{{
    {ResourceBalance::kBalanced, "resources_balanced"},
    {ResourceBalance::kUp, "resources_up"},
    {ResourceBalance::kDown, "resources_down"},
}};
constexpr Names<RegionScheme, 3> kRegionNames{{
    {RegionScheme::kAllColleges, "all_colleges"},
    {RegionScheme::kRandomSubset, "random_subset"},
    {RegionScheme::kPartition, "partition"},
}};
constexpr Names<QuotaSplit, 2> kSplitNames{{
    {QuotaSplit::kEqual, "equal"},
    {QuotaSplit::kRandom, "random"},
}};
constexpr Names<Truncation, 2> kTruncationNames{{
    {Truncation::kUniformSuffix, "uniform_suffix"},
    {Truncation::kNone, "none"},
}};

template <class E, std::size_t N>
std::string_view name_of(const Names<E, N>& names, E value) {
  for (const auto& [e, name] : names) {
    if (e == value) return name;
  }
  return "?";
}

template <class E, std::size_t N>
void read_enum(const nlohmann::json& doc, const char* key, const Names<E, N>& names, E& out) {
  if (!doc.contains(key)) return;
  const auto text = doc.at(key).get<std::string>();
  for (const auto& [e, name] : names) {
    if (name == text) {
      out = e;
      return;
    }
  }
  std::string options;
  for (const auto& [e, name] : names) options += (options.empty() ? "" : ", ") + std::string(name);
  throw Error(fmt::format("config: {} must be one of {} (got '{}')", key, options, text));
}

/// Splits total into n positive parts: equal with the remainder going to the
/// lowest indices, or a uniformly random composition.
std::vector<int> split(int total, int n, QuotaSplit scheme, Rng& rng) {
  if (total < n) {
    throw Error(fmt::format("cannot split a budget of {} into {} positive quotas", total, n));
  }
  std::vector<int> parts(n);
  if (scheme == QuotaSplit::kEqual) {
    for (int i = 0; i < n; ++i) parts[i] = total / n + (i < total % n ? 1 : 0);
    return parts;
  }
  std::vector<int> cuts(total - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  for (int i = 0; i < n - 1; ++i) {
    std::swap(cuts[i], cuts[i + rng.below(cuts.size() - i)]);
  }
  cuts.resize(n - 1);
  std::sort(cuts.begin(), cuts.end());
  int last = 0;
  for (int i = 0; i < n - 1; ++i) {
    parts[i] = cuts[i] - last;
    last = cuts[i];
  }
  parts[n - 1] = total - last;
  return parts;
}

int budget(int n_students, int scale) {
  if (scale > 0) return 2 * n_students;
  if (scale < 0) return std::max(1, n_students / 2);
  return n_students;
}

}  // namespace

std::string to_string(Alignment a) { return std::string(name_of(kAlignmentNames, a)); }

std::string balance_label(const GenConfig& c) {
  if (c.college_balance == CollegeBalance::kBalanced &&
      c.resource_balance == ResourceBalance::kBalanced) {
    return "balanced";
  }
  return fmt::format("{}+{}", name_of(kCollegeBalanceNames, c.college_balance),
                     name_of(kResourceBalanceNames, c.resource_balance));
}

void validate_config(const GenConfig& c) {
  if (c.n_students <= 0) throw Error("config: n_students must be positive");
  if (c.n_colleges <= 0) throw Error("config: n_colleges must be positive");
  if (c.n_resources < 0) throw Error("config: n_resources must be non-negative");
  if (c.region_scheme == RegionScheme::kRandomSubset &&
      (c.region_size < 1 || c.region_size > c.n_colleges)) {
    throw Error("config: region_size must lie in [1, n_colleges]");
  }
  if (c.region_scheme == RegionScheme::kPartition && c.n_resources > c.n_colleges) {
    throw Error("config: partition regions need n_resources <= n_colleges");
  }
  if (c.n_resources > 0 && resource_budget(c) < c.n_resources) {
    throw Error(fmt::format("config: resource budget {} is smaller than the number of resources {}",
                            resource_budget(c), c.n_resources));
  }
  if (seat_budget(c) < c.n_colleges) {
    throw Error(fmt::format("config: seat budget {} is smaller than the number of colleges {}",
                            seat_budget(c), c.n_colleges));
  }
}

nlohmann::json config_to_json(const GenConfig& c) {
  return {{"n_students", c.n_students},
          {"n_colleges", c.n_colleges},
          {"n_resources", c.n_resources},
          {"alignment", name_of(kAlignmentNames, c.alignment)},
          {"semi_sampler", name_of(kSamplerNames, c.semi_sampler)},
          {"quality", name_of(kQualityNames, c.quality)},
          {"college_balance", name_of(kCollegeBalanceNames, c.college_balance)},
          {"resource_balance", name_of(kResourceBalanceNames, c.resource_balance)},
          {"region_scheme", name_of(kRegionNames, c.region_scheme)},
          {"region_size", c.region_size},
          {"quota_split", name_of(kSplitNames, c.quota_split)},
          {"truncation", name_of(kTruncationNames, c.truncation)},
          {"seed", c.seed}};
}

GenConfig config_from_json(const nlohmann::json& doc) {
  GenConfig c;
  try {
    if (doc.contains("n_students")) c.n_students = doc.at("n_students").get<int>();
    if (doc.contains("n_colleges")) c.n_colleges = doc.at("n_colleges").get<int>();
    if (doc.contains("n_resources")) c.n_resources = doc.at("n_resources").get<int>();
    if (doc.contains("region_size")) c.region_size = doc.at("region_size").get<int>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    read_enum(doc, "alignment", kAlignmentNames, c.alignment);
    read_enum(doc, "semi_sampler", kSamplerNames, c.semi_sampler);
    read_enum(doc, "quality", kQualityNames, c.quality);
    read_enum(doc, "college_balance", kCollegeBalanceNames, c.college_balance);
    read_enum(doc, "resource_balance", kResourceBalanceNames, c.resource_balance);
    read_enum(doc, "region_scheme", kRegionNames, c.region_scheme);
    read_enum(doc, "quota_split", kSplitNames, c.quota_split);
    read_enum(doc, "truncation", kTruncationNames, c.truncation);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return c;
}

std::vector<Choice> sample_unaligned_order(int n_colleges, int n_resources, Rng& rng) {
  std::vector<Choice> order;
  for (CollegeId c = 0; c < n_colleges; ++c) {
    for (ResourceId r = 0; r <= n_resources; ++r) order.push_back({c, r});
  }
  rng.shuffle(std::span(order));
  // Moving each college's r0 to the last slot of that college's positions is
  // (R+1)-to-one onto the constrained orders, so the result stays uniform.
  std::vector<int> last(n_colleges, -1);
  std::vector<int> empty_at(n_colleges, -1);
  for (int i = 0; i < static_cast<int>(order.size()); ++i) {
    last[order[i].college] = i;
    if (order[i].resource == kEmptyResource) empty_at[order[i].college] = i;
  }
  for (CollegeId c = 0; c < n_colleges; ++c) std::swap(order[empty_at[c]], order[last[c]]);
  return order;
}

std::vector<Choice> sample_frontier_order(int n_colleges, int n_resources, SemiSampler sampler,
                                          Quality quality, Rng& rng) {
  // Each college row is consumed from its best resource down, so the only
  // candidate in row c is next[c], available once row c+1 has passed it.
  std::vector<int> next(n_colleges, n_resources);
  std::vector<Choice> order;
  const int total = n_colleges * (n_resources + 1);
  std::vector<CollegeId> open;
  while (static_cast<int>(order.size()) < total) {
    open.clear();
    for (CollegeId c = 0; c < n_colleges; ++c) {
      if (next[c] < 0) continue;
      if (c + 1 < n_colleges && next[c + 1] >= next[c]) continue;
      open.push_back(c);
    }
    CollegeId pick = open.front();
    if (sampler == SemiSampler::kUniformFrontier || quality == Quality::kEqual) {
      pick = open[rng.index(open.size())];
    } else {
      long weight = 0;
      for (CollegeId c : open) weight += c + 1;
      long ticket = static_cast<long>(rng.below(weight));
      for (CollegeId c : open) {
        ticket -= c + 1;
        if (ticket < 0) {
          pick = c;
          break;
        }
      }
    }
    order.push_back({pick, next[pick]});
    --next[pick];
  }
  return order;
}

std::vector<Choice> sample_aligned_order(int n_colleges, int n_resources, Rng& rng) {
  // Hook walk: place labels N..1 at corners reached by uniform hook moves.
  const int rows = n_colleges;
  const int cols = n_resources + 1;
  std::vector<int> length(rows, cols);
  int cells = rows * cols;
  std::vector<Choice> order(cells);
  while (cells > 0) {
    int pick = rng.index(cells);
    int i = 0;
    while (pick >= length[i]) pick -= length[i++];
    int j = pick;
    while (true) {
      const int arm = length[i] - j - 1;
      int leg = 0;
      while (i + leg + 1 < rows && length[i + leg + 1] > j) ++leg;
      if (arm + leg == 0) break;
      const int step = rng.index(arm + leg);
      if (step < arm) {
        j += step + 1;
      } else {
        i += step - arm + 1;
      }
    }
    --cells;
    order[cells] = {n_colleges - 1 - i, n_resources - j};
    --length[i];
  }
  return order;
}

void truncate_suffix(std::vector<Choice>& list, Rng& rng) {
  list.resize(rng.below(list.size() + 1));
}

int seat_budget(const GenConfig& c) {
  const int scale = c.college_balance == CollegeBalance::kUp     ? 1
                    : c.college_balance == CollegeBalance::kDown ? -1
                                                                 : 0;
  return budget(c.n_students, scale);
}

int resource_budget(const GenConfig& c) {
  const int scale = c.resource_balance == ResourceBalance::kUp     ? 1
                    : c.resource_balance == ResourceBalance::kDown ? -1
                                                                   : 0;
  return budget(c.n_students, scale);
}

std::vector<int> gen_college_quotas(const GenConfig& c, Rng& rng) {
  return split(seat_budget(c), c.n_colleges, c.quota_split, rng);
}

std::vector<ResourceSpec> gen_resources(const GenConfig& c, Rng& rng) {
  std::vector<ResourceSpec> out(c.n_resources);
  std::vector<CollegeId> all(c.n_colleges);
  std::iota(all.begin(), all.end(), 0);
  const auto blocks = c.region_scheme == RegionScheme::kPartition && c.n_resources > 0
                          ? split(c.n_colleges, c.n_resources, QuotaSplit::kEqual, rng)
                          : std::vector<int>{};
  const auto quotas = c.n_resources > 0
                          ? split(resource_budget(c), c.n_resources, c.quota_split, rng)
                          : std::vector<int>{};
  int block_start = 0;
  for (int k = 0; k < c.n_resources; ++k) {
    out[k].quota = quotas[k];
    switch (c.region_scheme) {
      case RegionScheme::kAllColleges:
        out[k].region = all;
        break;
      case RegionScheme::kRandomSubset: {
        std::vector<CollegeId> pool = all;
        for (int i = 0; i < c.region_size; ++i) {
          std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
        }
        pool.resize(c.region_size);
        std::sort(pool.begin(), pool.end());
        out[k].region = std::move(pool);
        break;
      }
      case RegionScheme::kPartition:
        for (int i = 0; i < blocks[k]; ++i) out[k].region.push_back(block_start + i);
        block_start += blocks[k];
        break;
    }
  }
  return out;
}

Market generate_market(const GenConfig& config) {
  validate_config(config);
  const int n = config.n_students;
  const int n_c = config.n_colleges;
  const int n_r = config.n_resources;

  Rng quota_rng(derive_seed(config.seed, 1));
  auto quotas = gen_college_quotas(config, quota_rng);
  Rng region_rng(derive_seed(config.seed, 2));
  auto resources = gen_resources(config, region_rng);

  const bool common_priority = config.alignment == Alignment::kCollegeFull ||
                               config.alignment == Alignment::kStudentAndCollegeFull;
  std::vector<std::vector<StudentId>> priorities(n_c, std::vector<StudentId>(n));
  for (CollegeId c = 0; c < n_c; ++c) {
    auto& p = priorities[c];
    if (common_priority) {
      for (int k = 0; k < n; ++k) p[k] = n - 1 - k;
    } else {
      std::iota(p.begin(), p.end(), 0);
      Rng rng(derive_seed(config.seed, 3, c));
      rng.shuffle(std::span(p));
    }
  }

  std::vector<std::vector<Choice>> preferences(n);
  for (StudentId s = 0; s < n; ++s) {
    Rng rng(derive_seed(config.seed, 4, s));
    auto& list = preferences[s];
    switch (config.alignment) {
      case Alignment::kNone:
      case Alignment::kCollegeFull:
        list = sample_unaligned_order(n_c, n_r, rng);
        break;
      case Alignment::kStudentSemi:
        list = sample_frontier_order(n_c, n_r, config.semi_sampler, config.quality, rng);
        break;
      case Alignment::kStudentFull:
      case Alignment::kStudentAndCollegeFull:
        list = sample_aligned_order(n_c, n_r, rng);
        break;
    }
    if (config.truncation == Truncation::kUniformSuffix) truncate_suffix(list, rng);
    std::erase_if(list, [&](const Choice& x) {
      if (x.resource == kEmptyResource) return false;
      const auto& region = resources[x.resource - 1].region;
      return !std::binary_search(region.begin(), region.end(), x.college);
    });
  }

  return Market(n, std::move(quotas), std::move(resources), std::move(priorities),
                std::move(preferences));
}

}  // namespace rrc
