#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrc/blocking.hpp"
#include "rrc/generator.hpp"
#include "rrc/market.hpp"
#include "rrc/mechanisms.hpp"

namespace rrc {

struct Regime {
  std::string label;
  GenConfig config;
};

/// A batch of regimes, each generated `replicas` times.
///
/// JSON form: {"name", "replicas", "master_seed", "mechanisms", "market",
/// "regimes"}. "market" holds shared generator settings and each entry of
/// "regimes" overrides some of them; without "regimes" the market settings
/// form the only regime.
struct ExperimentConfig {
  std::string name = "experiment";
  int replicas = 100;
  std::uint64_t master_seed = 0;
  std::vector<MechanismKind> mechanisms{std::begin(kAllMechanisms), std::end(kAllMechanisms)};
  std::vector<Regime> regimes;
};

ExperimentConfig experiment_from_json(const nlohmann::json& doc);
nlohmann::json experiment_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment(const std::filesystem::path& path);
/// FNV-1a of the canonical JSON form, as 16 hex digits.
std::string config_digest(const ExperimentConfig& config);

/// Alignment, then ":uniform_frontier" for that semi sampler, then
/// ":<balance>" for unbalanced markets.
std::string default_regime_label(const GenConfig& config);

struct MarketEntry {
  std::string regime;
  int replica = 0;
  std::uint64_t seed = 0;
  Market market;
};

/// Replica r of regime k uses seed derive_seed(master, k + 1, r).
std::vector<MarketEntry> generate_batch(const ExperimentConfig& config, int jobs = 0);

struct RunResult {
  std::string regime;
  int replica = 0;
  std::uint64_t market_seed = 0;
  MechanismKind mechanism = MechanismKind::kIrc;
  std::uint64_t seed = 0;
  BlockCounts counts;
  StabilityFlags flags;
  int envy_pairs = 0;
  int undominated_waste = 0;
  double seconds = 0.0;
  /// Blocking witnesses when requested.
  std::optional<nlohmann::ordered_json> witnesses;
};

/// Seed of a mechanism run on one market; independent of which other
/// mechanisms are selected.
std::uint64_t mechanism_seed(std::uint64_t master_seed, std::uint64_t market_seed,
                             MechanismKind kind);

/// Runs and audits every (market, mechanism) pair, in parallel over pairs.
/// Output is ordered by market then mechanism, whatever the thread count.
std::vector<RunResult> run_batch(const std::vector<MarketEntry>& markets,
                                 const std::vector<MechanismKind>& mechanisms,
                                 std::uint64_t master_seed, int jobs = 0,
                                 bool with_witnesses = false);

nlohmann::ordered_json results_to_json(const std::vector<RunResult>& results,
                                       const std::string& digest, std::uint64_t master_seed);
std::vector<RunResult> results_from_json(const nlohmann::json& doc);
nlohmann::ordered_json timings_to_json(const std::vector<RunResult>& results);

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

/// Per (regime, mechanism) over replicas; std is the sample (n-1) estimate.
struct AggregateRow {
  std::string regime;
  MechanismKind mechanism = MechanismKind::kIrc;
  int n = 0;
  Stat resource, seat, direct_envy, indirect_envy, total;
};

/// Rows in first-appearance order of regimes, mechanisms in canonical order.
std::vector<AggregateRow> aggregate(const std::vector<RunResult>& results);

/// Rounds to `decimals` places and drops trailing zeros, keeping one.
std::string format_number(double value, int decimals);
/// "mean±std" with 2 and 3 decimals.
std::string format_cell(const Stat& s);

std::string table_csv(const std::vector<AggregateRow>& rows);
std::string table_text(const std::vector<AggregateRow>& rows);

// Subcommands. Each writes its files under out_dir and reports progress on log.

/// markets/<regime>_r<replica>_<seed>.json plus manifest.json.
void cmd_generate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                  std::optional<std::uint64_t> seed, int jobs, std::ostream& log);

struct RunOptions {
  /// Explicit market files; when empty, out_dir/manifest.json is read.
  std::vector<std::filesystem::path> markets;
  std::vector<MechanismKind> mechanisms{std::begin(kAllMechanisms), std::end(kAllMechanisms)};
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool with_witnesses = false;
};

/// results.json (deterministic) and timings.json (wall clock per run).
void cmd_run(const std::filesystem::path& out_dir, const RunOptions& options, std::ostream& log);

/// table.csv and table.txt from results.json; the text table also goes to log.
void cmd_table(const std::filesystem::path& out_dir, std::ostream& log);

/// Census of a named fixture or a market file; returns false when a fixture
/// expectation fails.
bool cmd_oracle(const std::string& target, bool with_witnesses, std::ostream& out);

void cmd_fixtures(const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace rrc
