#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "srbfl/errors.hpp"
#include "srbfl/sim.hpp"

namespace srbfl {

inline constexpr const char* kArtifactVersion = "0.1.0";

// --- config -----------------------------------------------------------

// Parses the documented JSON config tree. Unknown keys and type mismatches
// are ConfigError; value invariants are reported by validate_config.
SimConfig parse_config_json(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);

// Fully resolved config (all defaults materialized), canonical key order.
std::string config_to_json(const SimConfig& cfg);

// --- run outputs -------------------------------------------------------

struct RunOutputs {
  std::filesystem::path manifest;
  std::filesystem::path metrics;
  std::filesystem::path main_chain;
  std::vector<std::filesystem::path> sub_chains;
  std::filesystem::path offchain_dir;
};

// One row per device per round plus one summary row per task per round.
std::string metrics_csv(const std::vector<RoundMetrics>& rounds);

// JSON-lines export: one block per line, digests lowercase hex, and a
// trailing {"head": ...} anchor line.
std::string chain_jsonl(const Chain& chain);

// Rebuilds a chain from its export (tag inferred from the first block;
// an empty file is an empty main chain). Throws ConfigError on parse
// problems; integrity problems are left for verify_chain to report.
Chain parse_chain_jsonl(const std::string& text);
Chain load_chain(const std::filesystem::path& path);

ChainTag tag_from_string(const std::string& s);

std::string manifest_json(const SimConfig& cfg, const RunOutputs& outputs,
                          const SimResult& result);

// Writes metrics, chain exports, off-chain payloads and the manifest into
// out_dir. All content is rendered first and written through temp files, so
// a failed run leaves no partial outputs behind.
RunOutputs write_run_outputs(const std::filesystem::path& out_dir,
                             const SimConfig& cfg, const SimResult& result);

// Loads every <hex>.bin payload under dir into a store.
OffChainStore load_offchain_dir(const std::filesystem::path& dir);

// --- report ------------------------------------------------------------

struct ReportFiles {
  std::filesystem::path report;          // per-round tidy table
  std::filesystem::path credits;         // final credit table
  std::string summary;                   // human-readable digest
  std::size_t rounds = 0;
};

// Builds report.csv (one row per round; columns per run label) and
// report_credits.csv from one run directory or a directory of run
// directories. Deterministic and idempotent.
ReportFiles write_report(const std::filesystem::path& out_dir);

}  // namespace srbfl
