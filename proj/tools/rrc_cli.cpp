#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rrc/harness.hpp"

namespace {

std::vector<rrc::MechanismKind> parse_list(const std::string& text) {
  std::vector<rrc::MechanismKind> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(rrc::parse_mechanism(item));
  }
  if (out.empty()) throw rrc::Error("--mechanisms needs at least one name");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matching under resource-regional caps: generate markets, run mechanisms, audit blocking contracts"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  std::string mechanisms = "irc,imc,idc,iuc,rsd,csd";
  std::uint64_t seed = 0;
  int jobs = 0;
  bool witnesses = false;
  std::vector<std::string> markets;
  std::string target;

  auto* gen = app.add_subcommand("generate", "Write replica markets and a manifest");
  gen->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output directory");
  auto* gen_seed = gen->add_option("--seed", seed, "Master seed (overrides the config)");
  gen->add_option("--jobs", jobs, "Worker threads (0 = all cores)");

  auto* run = app.add_subcommand("run", "Run mechanisms on generated or given markets and audit them");
  run->add_option("--out", out, "Directory holding manifest.json; results are written here");
  run->add_option("--market", markets, "Market file(s) to use instead of the manifest")->check(CLI::ExistingFile);
  run->add_option("--mechanisms", mechanisms, "Comma-separated subset of irc,imc,idc,iuc,rsd,csd");
  auto* run_seed = run->add_option("--seed", seed, "Master seed for mechanism randomness");
  run->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  run->add_flag("--verbose-witnesses", witnesses, "Store blocking witnesses with each result");

  auto* table = app.add_subcommand("table", "Aggregate results.json into table.csv and table.txt");
  table->add_option("--out", out, "Directory holding results.json");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive stability census of a fixture or market file");
  oracle->add_option("target", target, "Fixture name or market file")->required();
  oracle->add_flag("--verbose-witnesses", witnesses, "Print every matching's blocking witnesses");

  auto* fixtures = app.add_subcommand("fixtures", "Write the fixture markets as JSON files");
  fixtures->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      rrc::cmd_generate(config, out, gen_seed->count() ? std::optional(seed) : std::nullopt, jobs,
                        std::cout);
    } else if (run->parsed()) {
      rrc::RunOptions options;
      options.markets.assign(markets.begin(), markets.end());
      options.mechanisms = parse_list(mechanisms);
      if (run_seed->count()) options.seed = seed;
      options.jobs = jobs;
      options.with_witnesses = witnesses;
      rrc::cmd_run(out, options, std::cout);
    } else if (table->parsed()) {
      rrc::cmd_table(out, std::cout);
    } else if (oracle->parsed()) {
      return rrc::cmd_oracle(target, witnesses, std::cout) ? 0 : 1;
    } else if (fixtures->parsed()) {
      rrc::cmd_fixtures(out, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
