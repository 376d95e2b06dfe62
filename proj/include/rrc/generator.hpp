#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrc/market.hpp"
#include "rrc/rng.hpp"

namespace rrc {

enum class Alignment { kNone, kStudentSemi, kStudentFull, kCollegeFull, kStudentAndCollegeFull };
enum class SemiSampler { kQualityWeighted, kUniformFrontier };
enum class Quality { kAscending, kEqual };
enum class CollegeBalance { kBalanced, kUp, kDown };
enum class ResourceBalance { kBalanced, kUp, kDown };
enum class RegionScheme { kAllColleges, kRandomSubset, kPartition };
enum class QuotaSplit { kEqual, kRandom };
enum class Truncation { kUniformSuffix, kNone };

struct GenConfig {
  int n_students = 100;
  int n_colleges = 10;
  /// Non-empty resources, not counting r0.
  int n_resources = 4;
  Alignment alignment = Alignment::kNone;
  SemiSampler semi_sampler = SemiSampler::kQualityWeighted;
  Quality quality = Quality::kAscending;
  CollegeBalance college_balance = CollegeBalance::kBalanced;
  ResourceBalance resource_balance = ResourceBalance::kBalanced;
  RegionScheme region_scheme = RegionScheme::kAllColleges;
  /// Region size for kRandomSubset.
  int region_size = 1;
  QuotaSplit quota_split = QuotaSplit::kEqual;
  Truncation truncation = Truncation::kUniformSuffix;
  std::uint64_t seed = 0;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

/// Throws Error on non-positive counts or an unusable region scheme.
void validate_config(const GenConfig& config);

/// Every field, with enum values as their lower-case names.
nlohmann::json config_to_json(const GenConfig& config);
/// Missing keys keep their defaults; unknown enum names throw Error.
GenConfig config_from_json(const nlohmann::json& doc);

/// "none", "student_semi", "student_full", "college_full" or
/// "student_and_college_full".
std::string to_string(Alignment a);
/// "balanced" or e.g. "colleges_up+resources_down".
std::string balance_label(const GenConfig& config);

/// Full strict order over C x R0 with every (c, r) above (c, r0), uniform
/// among such orders. Colleges and resources are 0-based ids.
std::vector<Choice> sample_unaligned_order(int n_colleges, int n_resources, Rng& rng);

/// Algorithm-1 frontier over the product of the college chain (higher id
/// better) and the resource chain (higher id better, r0 last). A contract
/// becomes available once every contract directly above it has been taken.
std::vector<Choice> sample_frontier_order(int n_colleges, int n_resources, SemiSampler sampler,
                                          Quality quality, Rng& rng);

/// Uniformly random linear extension of the same product order, drawn as a
/// uniform standard Young tableau of the colleges x resource-ids rectangle.
std::vector<Choice> sample_aligned_order(int n_colleges, int n_resources, Rng& rng);

/// Keeps a uniformly random prefix length in [0, size].
void truncate_suffix(std::vector<Choice>& list, Rng& rng);

/// College quotas summing to the regime's seat budget.
std::vector<int> gen_college_quotas(const GenConfig& config, Rng& rng);
/// Resource quotas splitting the resource budget, with regions per the scheme.
std::vector<ResourceSpec> gen_resources(const GenConfig& config, Rng& rng);
int seat_budget(const GenConfig& config);
int resource_budget(const GenConfig& config);

/// Deterministic in (config, config.seed); passes validate_market without errors.
Market generate_market(const GenConfig& config);

}  // namespace rrc
