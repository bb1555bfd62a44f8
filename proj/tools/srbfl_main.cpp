#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "srbfl/io.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 usage, 2 config/parse, 3 runtime, 4 integrity.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIntegrity = 4;

bool quiet_logs() {
  const char* level = std::getenv("SRBFL_LOG");
  return level != nullptr && std::string(level) == "quiet";
}

int cmd_validate(const std::string& config_path) {
  try {
    const srbfl::SimConfig cfg = srbfl::load_config(config_path);
    const auto diags = srbfl::validate_config(cfg);
    if (diags.empty()) {
      if (!quiet_logs()) std::cout << "config ok: " << config_path << "\n";
      return kExitOk;
    }
    for (const std::string& d : diags) std::cerr << "invalid: " << d << "\n";
    return kExitConfig;
  } catch (const srbfl::ConfigError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed_override,
            const std::optional<bool>& gating_override) {
  srbfl::SimConfig cfg;
  try {
    cfg = srbfl::load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (gating_override) cfg.gating = *gating_override;
    const auto diags = srbfl::validate_config(cfg);
    if (!diags.empty()) {
      for (const std::string& d : diags) std::cerr << "invalid: " << d << "\n";
      return kExitConfig;
    }
  } catch (const srbfl::ConfigError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const srbfl::SimResult result = srbfl::run_simulation(cfg);
    if (!quiet_logs()) {
      for (const srbfl::RoundMetrics& rm : result.rounds) {
        std::uint64_t committed = 0;
        std::cout << "round " << rm.round << ":";
        for (const srbfl::TaskRoundRow& t : rm.tasks) {
          committed += t.committed;
          std::cout << " task" << t.task << "=" << t.global_accuracy;
        }
        std::cout << " committed=" << committed << "\n";
      }
    }
    const srbfl::RunOutputs outputs =
        srbfl::write_run_outputs(out_dir, cfg, result);
    if (!quiet_logs())
      std::cout << "wrote " << outputs.manifest.string() << " (head "
                << srbfl::to_hex(result.main_chain.head_digest()) << ")\n";
    return kExitOk;
  } catch (const srbfl::Error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_verify(const std::string& chain_path, const std::string& offchain_dir) {
  srbfl::Chain chain{srbfl::ChainTag::main()};
  srbfl::OffChainStore store;
  try {
    chain = srbfl::load_chain(chain_path);
    store = srbfl::load_offchain_dir(offchain_dir);
  } catch (const srbfl::ConfigError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  }
  const srbfl::ChainVerification verdict = srbfl::verify_chain(chain, store);
  if (!verdict.ok) {
    std::cerr << "integrity failure at block " << verdict.block_height << ": "
              << verdict.reason << "\n";
    return kExitIntegrity;
  }
  if (!quiet_logs())
    std::cout << "chain ok: " << chain.height() << " blocks, head "
              << srbfl::to_hex(chain.head_digest()) << "\n";
  return kExitOk;
}

int cmd_report(const std::string& out_dir) {
  try {
    const srbfl::ReportFiles files = srbfl::write_report(out_dir);
    std::cout << files.summary;
    if (!quiet_logs())
      std::cout << "wrote " << files.report.string() << " and "
                << files.credits.string() << "\n";
    return kExitOk;
  } catch (const srbfl::ConfigError& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kExitConfig;
  } catch (const srbfl::Error& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "srbfl: sharded blockchain federated-learning simulator.\n"
      "Devices train locally, commit updates to per-shard sub-chains under\n"
      "quorum validation, promote the best update to a main chain, and are\n"
      "scored by a multiweight subjective-logic reputation engine."};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string chain_path;
  std::string offchain_dir;
  std::optional<std::uint64_t> seed_override;
  std::string gating;

  CLI::App* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("--config", config_path, "Path to the JSON config")
      ->required();

  CLI::App* run = app.add_subcommand("run", "Run a simulation");
  run->add_option("--config", config_path, "Path to the JSON config (or a manifest)")
      ->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed_override, "Override the config seed");
  run->add_option("--gating", gating, "Override reputation gating (on|off)")
      ->check(CLI::IsMember({"on", "off"}));

  CLI::App* verify = app.add_subcommand("verify", "Verify a chain export");
  verify->add_option("chain", chain_path, "chain_*.jsonl file")->required();
  verify->add_option("offchain", offchain_dir, "off-chain payload directory")
      ->required();

  CLI::App* report = app.add_subcommand("report", "Summarize run outputs");
  report->add_option("out_dir", out_dir, "Run directory (or directory of runs)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::optional<bool> gating_override;
  if (!gating.empty()) gating_override = gating == "on";

  if (app.got_subcommand(validate)) return cmd_validate(config_path);
  if (app.got_subcommand(run))
    return cmd_run(config_path, out_dir, seed_override, gating_override);
  if (app.got_subcommand(verify)) return cmd_verify(chain_path, offchain_dir);
  if (app.got_subcommand(report)) return cmd_report(out_dir);
  return kExitUsage;
}
