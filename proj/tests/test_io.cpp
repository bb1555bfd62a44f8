#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "srbfl/io.hpp"

using namespace srbfl;
namespace fs = std::filesystem;

namespace {

const fs::path kSampleConfig = fs::path(SRBFL_SOURCE_DIR) / "configs" / "sample.json";

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("srbfl_io_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out << content;
}

SimConfig tiny_config() {
  SimConfig cfg = load_config(kSampleConfig);
  cfg.device_count = 8;
  cfg.shard_count = 2;
  cfg.rounds = 3;
  cfg.tasks.resize(2);
  cfg.adversaries = AdversaryMix{};  // honest-only keeps every sub-chain busy
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("the shipped sample config is valid") {
  const SimConfig cfg = load_config(kSampleConfig);
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.device_count == 20);
  CHECK(cfg.shard_count == 4);
  CHECK(cfg.tasks.size() == 4);
}

TEST_CASE("config parsing names offending keys") {
  CHECK_THROWS_AS(parse_config_json("{"), ConfigError);

  try {
    parse_config_json(R"({"devices": 4, "shardz": 2})");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("shardz") != std::string::npos);
  }

  try {
    parse_config_json(R"({"train": {"step_size": "fast"}})");
    FAIL("type mismatch accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train.step_size") != std::string::npos);
  }
}

TEST_CASE("validate_config flags invariant violations by key") {
  SimConfig cfg = tiny_config();
  cfg.rounds = 0;
  cfg.adversaries.label_flip = 0.8;
  cfg.adversaries.free_rider = 0.4;
  const auto diags = validate_config(cfg);
  REQUIRE_FALSE(diags.empty());
  bool rounds = false, adversaries = false;
  for (const std::string& d : diags) {
    if (d.find("rounds") == 0) rounds = true;
    if (d.find("adversaries") == 0) adversaries = true;
  }
  CHECK(rounds);
  CHECK(adversaries);
}

TEST_CASE("resolved configs round-trip through JSON") {
  const SimConfig cfg = tiny_config();
  const SimConfig back = parse_config_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("chain exports round-trip and re-export identically") {
  const SimResult result = run_simulation(tiny_config());
  const std::string text = chain_jsonl(result.sub_chains[0]);
  const Chain parsed = parse_chain_jsonl(text);
  CHECK(parsed.head_digest() == result.sub_chains[0].head_digest());
  CHECK(chain_jsonl(parsed) == text);
  CHECK(verify_chain(parsed, result.store).ok);
}

TEST_CASE("an empty chain file parses to a valid empty chain") {
  const Chain c = parse_chain_jsonl("");
  CHECK(c.empty());
  CHECK(verify_chain(c, OffChainStore{}).ok);
}

TEST_CASE("a non-empty export without its head anchor is a parse error") {
  const SimResult result = run_simulation(tiny_config());
  std::string text = chain_jsonl(result.sub_chains[0]);
  text.erase(text.rfind("{\"head\""));
  CHECK_THROWS_AS(parse_chain_jsonl(text), ConfigError);
}

TEST_CASE("hex edits anywhere in an export break verification") {
  const SimConfig cfg = tiny_config();
  const SimResult result = run_simulation(cfg);
  const std::string text = chain_jsonl(result.sub_chains[1]);

  std::size_t checked = 0;
  for (std::size_t pos = 0; pos < text.size() && checked < 40; ++pos) {
    const char c = text[pos];
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) continue;
    // Only touch long hex runs (digests), not small numerals.
    std::size_t run = pos;
    while (run < text.size() && std::isxdigit(static_cast<unsigned char>(text[run])))
      ++run;
    if (run - pos < 64) {
      pos = run;
      continue;
    }
    std::string mutated = text;
    mutated[pos] = mutated[pos] == '0' ? '1' : '0';
    ++checked;
    pos = run;
    try {
      const Chain parsed = parse_chain_jsonl(mutated);
      CHECK_FALSE(verify_chain(parsed, result.store).ok);
    } catch (const ConfigError&) {
      // Also acceptable: the mutation destroyed the hex encoding itself.
    }
  }
  CHECK(checked >= 10);
}

TEST_CASE("run outputs contain exactly the contracted files") {
  const SimConfig cfg = tiny_config();
  const SimResult result = run_simulation(cfg);
  const fs::path dir = fresh_dir("outputs");
  const RunOutputs outputs = write_run_outputs(dir, cfg, result);

  std::size_t data_files = 0;
  bool manifest = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) continue;
    if (entry.path().filename() == "manifest.json")
      manifest = true;
    else
      ++data_files;
  }
  CHECK(manifest);
  CHECK(data_files == 2 + cfg.shard_count);

  // The exported chain verifies against the exported payload directory.
  const Chain sub = load_chain(outputs.sub_chains[0]);
  const OffChainStore store = load_offchain_dir(outputs.offchain_dir);
  CHECK(verify_chain(sub, store).ok);

  // The manifest itself is an acceptable config source.
  const SimConfig from_manifest = load_config(outputs.manifest);
  CHECK(config_to_json(from_manifest) == config_to_json(cfg));

  fs::remove_all(dir);
}

TEST_CASE("a failed run leaves nothing behind") {
  const SimConfig cfg = tiny_config();
  const SimResult result = run_simulation(cfg);
  const fs::path blocker = fresh_dir("blocked");
  spit(blocker, "a file where the output directory should go");

  CHECK_THROWS_AS(write_run_outputs(blocker / "run", cfg, result), Error);
  CHECK_FALSE(fs::exists(blocker / "run"));
  fs::remove_all(blocker);
}

TEST_CASE("reports cover each executed round and re-run byte-identically") {
  const SimConfig cfg = tiny_config();
  const SimResult result = run_simulation(cfg);
  const fs::path dir = fresh_dir("report");
  write_run_outputs(dir, cfg, result);

  const ReportFiles files = write_report(dir);
  CHECK(files.rounds == result.rounds_executed);
  const std::string first = slurp(files.report);
  CHECK(static_cast<std::size_t>(std::count(first.begin(), first.end(), '\n')) ==
        result.rounds_executed + 1);

  write_report(dir);
  CHECK(slurp(files.report) == first);
  fs::remove_all(dir);
}

TEST_CASE("gating comparisons expose one accuracy column per run") {
  SimConfig cfg = tiny_config();
  const fs::path dir = fresh_dir("compare");
  cfg.gating = false;
  write_run_outputs(dir / "gating_off", cfg, run_simulation(cfg));
  cfg.gating = true;
  write_run_outputs(dir / "gating_on", cfg, run_simulation(cfg));

  const ReportFiles files = write_report(dir);
  const std::string header = slurp(files.report).substr(0, slurp(files.report).find('\n'));
  CHECK(header.find("accuracy_t0:gating_off") != std::string::npos);
  CHECK(header.find("accuracy_t0:gating_on") != std::string::npos);
  CHECK(files.summary.find("gating=on") != std::string::npos);
  CHECK(files.summary.find("gating=off") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("report without inputs is an error") {
  const fs::path dir = fresh_dir("empty_report");
  fs::create_directories(dir);
  CHECK_THROWS_AS(write_report(dir), ConfigError);
  fs::remove_all(dir);
}

TEST_SUITE_END();
