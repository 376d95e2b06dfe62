#include "rrc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rrc/market_io.hpp"
#include "rrc/oracle.hpp"

namespace rrc {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

namespace {

int team_size(int jobs) {
#ifdef _OPENMP
  return jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
  return 1;
#endif
}

/// Runs body(i) for i in [0, n) on `jobs` threads and rethrows the first
/// error in index order.
template <class F>
void parallel_for(int n, int jobs, F body) {
  std::vector<std::string> errors(n);
  [[maybe_unused]] const int team = team_size(jobs);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(e);
  }
}

std::vector<MechanismKind> mechanisms_from_json(const nlohmann::json& doc) {
  std::vector<MechanismKind> out;
  for (const auto& name : doc) out.push_back(parse_mechanism(name.get<std::string>()));
  if (out.empty()) throw Error("config: mechanisms must not be empty");
  return out;
}

std::string hex(std::uint64_t x) { return fmt::format("{:016x}", x); }

OJson counts_json(const BlockCounts& c) {
  return {{"resource", c.resource},
          {"seat", c.seat},
          {"direct_envy", c.direct_envy},
          {"indirect_envy", c.indirect_envy},
          {"total", c.total()}};
}

}  // namespace

std::string default_regime_label(const GenConfig& c) {
  std::string label = to_string(c.alignment);
  if (c.alignment == Alignment::kStudentSemi && c.semi_sampler == SemiSampler::kUniformFrontier) {
    label += ":uniform_frontier";
  }
  const std::string balance = balance_label(c);
  if (balance != "balanced") label += ":" + balance;
  return label;
}

ExperimentConfig experiment_from_json(const nlohmann::json& doc) {
  ExperimentConfig e;
  try {
    if (doc.contains("name")) e.name = doc.at("name").get<std::string>();
    if (doc.contains("replicas")) e.replicas = doc.at("replicas").get<int>();
    if (doc.contains("master_seed")) e.master_seed = doc.at("master_seed").get<std::uint64_t>();
    if (doc.contains("mechanisms")) e.mechanisms = mechanisms_from_json(doc.at("mechanisms"));
    const nlohmann::json base = doc.value("market", nlohmann::json::object());
    const nlohmann::json regimes =
        doc.contains("regimes") ? doc.at("regimes") : nlohmann::json::array({nlohmann::json::object()});
    for (const auto& overrides : regimes) {
      nlohmann::json merged = base;
      std::string label;
      for (const auto& [key, value] : overrides.items()) {
        if (key == "label") {
          label = value.get<std::string>();
        } else {
          merged[key] = value;
        }
      }
      Regime r{label, config_from_json(merged)};
      validate_config(r.config);
      if (r.label.empty()) r.label = default_regime_label(r.config);
      e.regimes.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("config: ") + ex.what());
  }
  if (e.replicas < 0) throw Error("config: replicas must be non-negative");
  for (std::size_t i = 0; i < e.regimes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (e.regimes[i].label == e.regimes[j].label) {
        throw Error(fmt::format("config: duplicate regime label '{}'", e.regimes[i].label));
      }
    }
  }
  return e;
}

nlohmann::json experiment_to_json(const ExperimentConfig& e) {
  nlohmann::json mechanisms = nlohmann::json::array();
  for (MechanismKind k : e.mechanisms) mechanisms.push_back(to_string(k));
  nlohmann::json regimes = nlohmann::json::array();
  for (const auto& r : e.regimes) {
    nlohmann::json item = config_to_json(r.config);
    item.erase("seed");
    item["label"] = r.label;
    regimes.push_back(std::move(item));
  }
  return {{"name", e.name},
          {"replicas", e.replicas},
          {"master_seed", e.master_seed},
          {"mechanisms", std::move(mechanisms)},
          {"regimes", std::move(regimes)}};
}

ExperimentConfig load_experiment(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return experiment_from_json(doc);
}

std::string config_digest(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : experiment_to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hex(h);
}

std::vector<MarketEntry> generate_batch(const ExperimentConfig& config, int jobs) {
  std::vector<MarketEntry> out;
  for (std::size_t k = 0; k < config.regimes.size(); ++k) {
    for (int r = 0; r < config.replicas; ++r) {
      out.push_back({config.regimes[k].label, r, derive_seed(config.master_seed, k + 1, r), {}});
    }
  }
  std::vector<std::size_t> regime_of;
  for (std::size_t k = 0; k < config.regimes.size(); ++k) {
    regime_of.insert(regime_of.end(), config.replicas, k);
  }
  parallel_for(static_cast<int>(out.size()), jobs, [&](int i) {
    GenConfig g = config.regimes[regime_of[i]].config;
    g.seed = out[i].seed;
    out[i].market = generate_market(g);
  });
  return out;
}

std::uint64_t mechanism_seed(std::uint64_t master_seed, std::uint64_t market_seed,
                             MechanismKind kind) {
  return derive_seed(master_seed, market_seed, static_cast<std::uint64_t>(kind) + 1);
}

std::vector<RunResult> run_batch(const std::vector<MarketEntry>& markets,
                                 const std::vector<MechanismKind>& mechanisms,
                                 std::uint64_t master_seed, int jobs, bool with_witnesses) {
  std::vector<MechanismKind> order = mechanisms;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  std::vector<RunResult> out(markets.size() * order.size());
  parallel_for(static_cast<int>(out.size()), jobs, [&](int i) {
    const MarketEntry& entry = markets[i / order.size()];
    RunResult& r = out[i];
    r.regime = entry.regime;
    r.replica = entry.replica;
    r.market_seed = entry.seed;
    r.mechanism = order[i % order.size()];
    r.seed = mechanism_seed(master_seed, entry.seed, r.mechanism);
    const auto start = std::chrono::steady_clock::now();
    const RunTrace trace = run_mechanism(r.mechanism, entry.market, r.seed);
    const BlockingReport report = audit(entry.market, trace.matching, 1);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.counts = report.counts;
    r.flags = report.flags;
    r.envy_pairs = report.envy_pairs;
    r.undominated_waste = report.undominated_waste;
    if (with_witnesses) r.witnesses = report_to_json(report, true)["witnesses"];
  });
  return out;
}

OJson results_to_json(const std::vector<RunResult>& results, const std::string& digest,
                      std::uint64_t master_seed) {
  OJson rows = OJson::array();
  for (const auto& r : results) {
    BlockingReport shell;
    shell.flags = r.flags;
    OJson row;
    row["regime"] = r.regime;
    row["replica"] = r.replica;
    row["market_seed"] = r.market_seed;
    row["mechanism"] = to_string(r.mechanism);
    row["seed"] = r.seed;
    row["counts"] = counts_json(r.counts);
    row["flags"] = report_to_json(shell, false)["flags"];
    row["envy_pairs"] = r.envy_pairs;
    row["undominated_waste"] = r.undominated_waste;
    if (r.witnesses) row["witnesses"] = *r.witnesses;
    rows.push_back(std::move(row));
  }
  OJson doc;
  doc["config_digest"] = digest;
  doc["master_seed"] = master_seed;
  doc["results"] = std::move(rows);
  return doc;
}

std::vector<RunResult> results_from_json(const nlohmann::json& doc) {
  std::vector<RunResult> out;
  try {
    for (const auto& row : doc.at("results")) {
      RunResult r;
      r.regime = row.at("regime").get<std::string>();
      r.replica = row.at("replica").get<int>();
      r.market_seed = row.at("market_seed").get<std::uint64_t>();
      r.mechanism = parse_mechanism(row.at("mechanism").get<std::string>());
      r.seed = row.at("seed").get<std::uint64_t>();
      const auto& c = row.at("counts");
      r.counts = {c.at("resource").get<int>(), c.at("seat").get<int>(),
                  c.at("direct_envy").get<int>(), c.at("indirect_envy").get<int>()};
      if (c.at("total").get<int>() != r.counts.total()) {
        throw Error("results: total is not the sum of the four categories");
      }
      const auto& f = row.at("flags");
      r.flags = {f.at("stable").get<bool>(),           f.at("envy_free").get<bool>(),
                 f.at("direct_envy_free").get<bool>(), f.at("non_wasteful").get<bool>(),
                 f.at("seat_efficient").get<bool>(),   f.at("resource_efficient").get<bool>(),
                 f.at("weakly_stable").get<bool>(),    f.at("direct_envy_stable").get<bool>()};
      r.envy_pairs = row.at("envy_pairs").get<int>();
      r.undominated_waste = row.at("undominated_waste").get<int>();
      if (row.contains("witnesses")) r.witnesses = OJson(row.at("witnesses"));
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("results: ") + e.what());
  }
  return out;
}

OJson timings_to_json(const std::vector<RunResult>& results) {
  OJson rows = OJson::array();
  for (const auto& r : results) {
    rows.push_back({{"regime", r.regime},
                    {"replica", r.replica},
                    {"mechanism", to_string(r.mechanism)},
                    {"seconds", r.seconds}});
  }
  return rows;
}

namespace {

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / (xs.size() - 1));
  }
  return s;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw Error("no results to aggregate");
  std::vector<std::string> regimes;
  std::map<std::pair<std::string, MechanismKind>, std::vector<const RunResult*>> groups;
  for (const auto& r : results) {
    if (std::find(regimes.begin(), regimes.end(), r.regime) == regimes.end()) {
      regimes.push_back(r.regime);
    }
    groups[{r.regime, r.mechanism}].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& regime : regimes) {
    for (MechanismKind k : kAllMechanisms) {
      const auto it = groups.find({regime, k});
      if (it == groups.end()) continue;
      std::vector<double> resource, seat, direct, indirect, total;
      for (const RunResult* r : it->second) {
        resource.push_back(r->counts.resource);
        seat.push_back(r->counts.seat);
        direct.push_back(r->counts.direct_envy);
        indirect.push_back(r->counts.indirect_envy);
        total.push_back(r->counts.total());
      }
      rows.push_back({regime, k, static_cast<int>(total.size()), stat_of(resource), stat_of(seat),
                      stat_of(direct), stat_of(indirect), stat_of(total)});
    }
  }
  return rows;
}

std::string format_number(double value, int decimals) {
  std::string s = fmt::format("{:.{}f}", value, decimals);
  if (s.find('.') == std::string::npos) return s + ".0";
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.push_back('0');
  if (s == "-0.0") s = "0.0";
  return s;
}

std::string format_cell(const Stat& s) {
  return format_number(s.mean, 2) + "±" + format_number(s.std, 3);
}

std::string table_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "alignment,mechanism,resource,seat,direct_envy,indirect_envy,total_mean,total_std\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.regime, to_string(r.mechanism),
                       format_cell(r.resource), format_cell(r.seat), format_cell(r.direct_envy),
                       format_cell(r.indirect_envy), format_number(r.total.mean, 2),
                       format_number(r.total.std, 3));
  }
  return out;
}

std::string table_text(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> cells{
      {"Alignment", "Mechanism", "Resource", "Seat", "Direct-Envy", "Indirect-Envy", "Total"}};
  for (const auto& r : rows) {
    std::string mech = to_string(r.mechanism);
    std::transform(mech.begin(), mech.end(), mech.begin(), ::toupper);
    cells.push_back({r.regime, mech, format_cell(r.resource), format_cell(r.seat),
                     format_cell(r.direct_envy), format_cell(r.indirect_envy),
                     format_cell(r.total)});
  }
  // "±" is two bytes but one column wide.
  auto width = [](const std::string& s) {
    return s.size() - (s.find("±") == std::string::npos ? 0 : 1);
  };
  std::vector<std::size_t> w(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], width(row[i]));
  }
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (std::size_t i = 0; i < cells[k].size(); ++i) {
      out += cells[k][i] + std::string(w[i] - width(cells[k][i]) + (i + 1 < w.size() ? 2 : 0), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (k == 0) {
      std::size_t line = 0;
      for (std::size_t x : w) line += x + 2;
      out += std::string(line - 2, '-') + '\n';
    }
  }
  return out;
}

void cmd_generate(const fs::path& config_path, const fs::path& out_dir,
                  std::optional<std::uint64_t> seed, int jobs, std::ostream& log) {
  ExperimentConfig config = load_experiment(config_path);
  if (seed) config.master_seed = *seed;
  const auto batch = generate_batch(config, jobs);

  fs::create_directories(out_dir / "markets");
  OJson entries = OJson::array();
  for (const auto& m : batch) {
    std::string stem = m.regime;
    std::replace(stem.begin(), stem.end(), ':', '_');
    std::replace(stem.begin(), stem.end(), '+', '_');
    const std::string file = fmt::format("markets/{}_r{:03d}_{}.json", stem, m.replica, hex(m.seed));
    save_market(m.market, out_dir / file);
    entries.push_back({{"regime", m.regime}, {"replica", m.replica}, {"seed", m.seed}, {"file", file}});
  }
  OJson manifest;
  manifest["config_digest"] = config_digest(config);
  manifest["master_seed"] = config.master_seed;
  manifest["config"] = experiment_to_json(config);
  manifest["markets"] = std::move(entries);
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  log << fmt::format("wrote {} markets and manifest.json to {}\n", batch.size(), out_dir.string());
}

void cmd_run(const fs::path& out_dir, const RunOptions& options, std::ostream& log) {
  std::vector<MarketEntry> markets;
  std::string digest = "custom";
  std::uint64_t master_seed = options.seed.value_or(0);
  if (options.markets.empty()) {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(read_text(out_dir / "manifest.json"));
      digest = manifest.at("config_digest").get<std::string>();
      if (!options.seed) master_seed = manifest.at("master_seed").get<std::uint64_t>();
      for (const auto& e : manifest.at("markets")) {
        markets.push_back({e.at("regime").get<std::string>(), e.at("replica").get<int>(),
                           e.at("seed").get<std::uint64_t>(), {}});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("manifest.json: " + std::string(e.what()));
    }
    const auto& files = manifest.at("markets");
    parallel_for(static_cast<int>(markets.size()), options.jobs, [&](int i) {
      markets[i].market = load_market(out_dir / files[i].at("file").get<std::string>());
    });
  } else {
    for (std::size_t i = 0; i < options.markets.size(); ++i) {
      markets.push_back({options.markets[i].stem().string(), 0, 0, load_market(options.markets[i])});
    }
  }
  for (const auto& m : markets) require_valid(m.market);

  const auto results = run_batch(markets, options.mechanisms, master_seed, options.jobs,
                                 options.with_witnesses);
  fs::create_directories(out_dir);
  write_text(out_dir / "results.json", results_to_json(results, digest, master_seed).dump(2) + "\n");
  write_text(out_dir / "timings.json", timings_to_json(results).dump(2) + "\n");
  log << fmt::format("wrote {} results to {}\n", results.size(), (out_dir / "results.json").string());
}

void cmd_table(const fs::path& out_dir, std::ostream& log) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(out_dir / "results.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("results.json: " + std::string(e.what()));
  }
  const auto rows = aggregate(results_from_json(doc));
  write_text(out_dir / "table.csv", table_csv(rows));
  const std::string text = table_text(rows);
  write_text(out_dir / "table.txt", text);
  log << text;
}

bool cmd_oracle(const std::string& target, bool with_witnesses, std::ostream& out) {
  const FixtureMarket* fix = nullptr;
  for (const auto& f : fixtures()) {
    if (f.name == target) fix = &f;
  }
  const Market market = fix ? fix->market : load_market(target);
  require_valid(market);
  const StabilityCensus c = census(market);

  auto print_set = [&](const char* name, const std::vector<std::size_t>& set) {
    if (set.empty()) {
      out << name << ": empty\n";
      return;
    }
    out << name << ":\n";
    for (std::size_t i : set) out << "  " << to_string(c.matchings[i]) << "\n";
  };
  out << "feasible individually rational matchings: " << c.matchings.size() << "\n";
  print_set("stable set", c.stable);
  print_set("direct-envy stable set", c.direct_envy_stable);
  print_set("weakly stable set", c.weakly_stable);
  print_set("envy-free set", c.envy_free);
  print_set("pareto-efficient set", c.pareto_efficient);
  if (with_witnesses) {
    for (std::size_t i = 0; i < c.matchings.size(); ++i) {
      out << to_string(c.matchings[i]) << " " << report_to_json(c.reports[i], true).dump() << "\n";
    }
  }

  bool ok = true;
  if (fix) {
    for (const auto& e : fix->verify(market)) {
      out << (e.holds ? "PASS " : "FAIL ") << e.description << "\n";
      ok = ok && e.holds;
    }
  }
  return ok;
}

void cmd_fixtures(const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  for (const auto& f : fixtures()) {
    save_market(f.market, out_dir / (f.name + ".json"));
    log << fmt::format("{}: {}\n", f.name, f.description);
  }
}

}  // namespace rrc
