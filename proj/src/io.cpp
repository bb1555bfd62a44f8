#include "srbfl/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "srbfl/errors.hpp"

namespace srbfl {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Shortest round-trip decimal form; keeps exports byte-stable.
std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("file", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(where.empty() ? key : where + "." + key,
                        "unknown key '" + key + "' in " +
                            (where.empty() ? "config" : where));
  }
}

std::string key_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_num(const json& obj, const std::string& where, const char* key,
               double def) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_number())
    throw ConfigError(key_path(where, key), key_path(where, key) + " must be a number");
  return obj[key].get<double>();
}

std::uint64_t get_uint(const json& obj, const std::string& where, const char* key,
                       std::uint64_t def) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_number_unsigned())
    throw ConfigError(key_path(where, key),
                      key_path(where, key) + " must be a non-negative integer");
  return obj[key].get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool def) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_boolean())
    throw ConfigError(key_path(where, key), key_path(where, key) + " must be a boolean");
  return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& where, const char* key,
                    const std::string& def) {
  if (!obj.contains(key)) return def;
  if (!obj[key].is_string())
    throw ConfigError(key_path(where, key), key_path(where, key) + " must be a string");
  return obj[key].get<std::string>();
}

LossKind loss_from_string(const std::string& s, const std::string& where) {
  if (s == "logistic") return LossKind::LogisticBinary;
  if (s == "squared") return LossKind::SquaredError;
  throw ConfigError(where, where + " must be 'logistic' or 'squared'");
}

std::string loss_to_string(LossKind k) {
  return k == LossKind::LogisticBinary ? "logistic" : "squared";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "random") return Strategy::Random;
  if (s == "reputation") return Strategy::Reputation;
  if (s == "feature") return Strategy::Feature;
  throw ConfigError("strategy", "strategy must be 'random', 'reputation' or 'feature'");
}

std::string strategy_to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Reputation: return "reputation";
    case Strategy::Feature: return "feature";
  }
  return "random";
}

}  // namespace

SimConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("syntax", std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("syntax", "config root must be an object");

  // A run manifest embeds the resolved config; accept it directly.
  if (j.contains("config") && j["config"].is_object() && j.contains("artifact"))
    j = j["config"];

  check_keys(j, "", {"seed", "devices", "shards", "strategy", "rounds",
                     "reshard_each_round", "promote_each_round", "gating", "train",
                     "reputation", "consensus", "data", "adversaries", "tasks"});

  SimConfig cfg;
  cfg.seed = get_uint(j, "", "seed", 0);
  cfg.device_count = get_uint(j, "", "devices", 1);
  cfg.shard_count = get_uint(j, "", "shards", 1);
  cfg.strategy = strategy_from_string(get_str(j, "", "strategy", "random"));
  cfg.rounds = get_uint(j, "", "rounds", 1);
  cfg.reshard_each_round = get_bool(j, "", "reshard_each_round", false);
  cfg.promote_each_round = get_bool(j, "", "promote_each_round", false);
  cfg.gating = get_bool(j, "", "gating", false);

  if (j.contains("train")) {
    const json& t = j["train"];
    if (!t.is_object()) throw ConfigError("train", "train must be an object");
    check_keys(t, "train", {"step_size", "epochs", "loss"});
    cfg.train.step_size = get_num(t, "train", "step_size", cfg.train.step_size);
    cfg.train.epochs = get_uint(t, "train", "epochs", cfg.train.epochs);
    cfg.train.loss =
        loss_from_string(get_str(t, "train", "loss", "logistic"), "train.loss");
  }

  if (j.contains("reputation")) {
    const json& r = j["reputation"];
    if (!r.is_object()) throw ConfigError("reputation", "reputation must be an object");
    check_keys(r, "reputation",
               {"prior_weight", "base_rate", "pos_weight", "neg_weight",
                "severe_multiplier", "freshness_decay", "gate_threshold"});
    ReputationParams& p = cfg.reputation;
    p.prior_weight = get_num(r, "reputation", "prior_weight", p.prior_weight);
    p.base_rate = get_num(r, "reputation", "base_rate", p.base_rate);
    p.pos_weight = get_num(r, "reputation", "pos_weight", p.pos_weight);
    p.neg_weight = get_num(r, "reputation", "neg_weight", p.neg_weight);
    p.severe_multiplier =
        get_num(r, "reputation", "severe_multiplier", p.severe_multiplier);
    p.freshness_decay =
        get_num(r, "reputation", "freshness_decay", p.freshness_decay);
    p.gate_threshold = get_num(r, "reputation", "gate_threshold", p.gate_threshold);
  }

  if (j.contains("consensus")) {
    const json& c = j["consensus"];
    if (!c.is_object()) throw ConfigError("consensus", "consensus must be an object");
    check_keys(c, "consensus", {"tolerance"});
    cfg.tolerance = get_num(c, "consensus", "tolerance", cfg.tolerance);
  }

  if (j.contains("data")) {
    const json& d = j["data"];
    if (!d.is_object()) throw ConfigError("data", "data must be an object");
    check_keys(d, "data", {"dim", "train_samples", "holdout_samples",
                           "eval_samples", "separation", "tag"});
    cfg.data.dim = get_uint(d, "data", "dim", cfg.data.dim);
    cfg.data.train_samples =
        get_uint(d, "data", "train_samples", cfg.data.train_samples);
    cfg.data.holdout_samples =
        get_uint(d, "data", "holdout_samples", cfg.data.holdout_samples);
    cfg.data.eval_samples = get_uint(d, "data", "eval_samples", cfg.data.eval_samples);
    cfg.data.separation = get_num(d, "data", "separation", cfg.data.separation);
    cfg.data.tag = get_str(d, "data", "tag", cfg.data.tag);
  }

  if (j.contains("adversaries")) {
    const json& a = j["adversaries"];
    if (!a.is_object()) throw ConfigError("adversaries", "adversaries must be an object");
    check_keys(a, "adversaries",
               {"label_flip", "free_rider", "lazy", "flip_fraction",
                "participation_probability"});
    AdversaryMix& m = cfg.adversaries;
    m.label_flip = get_num(a, "adversaries", "label_flip", m.label_flip);
    m.free_rider = get_num(a, "adversaries", "free_rider", m.free_rider);
    m.lazy = get_num(a, "adversaries", "lazy", m.lazy);
    m.flip_fraction = get_num(a, "adversaries", "flip_fraction", m.flip_fraction);
    m.participation_probability = get_num(a, "adversaries",
                                          "participation_probability",
                                          m.participation_probability);
  }

  if (j.contains("tasks")) {
    if (!j["tasks"].is_array()) throw ConfigError("tasks", "tasks must be an array");
    std::size_t i = 0;
    for (const json& t : j["tasks"]) {
      const std::string where = "tasks[" + std::to_string(i) + "]";
      if (!t.is_object()) throw ConfigError(where, where + " must be an object");
      check_keys(t, where,
                 {"task_id", "publisher", "loss", "param_dim", "required_data_type",
                  "target_accuracy", "max_rounds", "reward_pool"});
      TaskContract c;
      c.task_id = static_cast<TaskId>(get_uint(t, where, "task_id", i));
      c.publisher = get_str(t, where, "publisher", "publisher-" + std::to_string(i));
      c.loss = loss_from_string(get_str(t, where, "loss", "logistic"), where + ".loss");
      c.param_dim = get_uint(t, where, "param_dim", 0);
      c.required_data_type = get_str(t, where, "required_data_type", cfg.data.tag);
      c.target_accuracy = get_num(t, where, "target_accuracy", 1.0);
      c.max_rounds = get_uint(t, where, "max_rounds", cfg.rounds);
      c.reward_pool = get_num(t, where, "reward_pool", 0.0);
      cfg.tasks.push_back(std::move(c));
      ++i;
    }
  }

  return cfg;
}

SimConfig load_config(const fs::path& path) {
  return parse_config_json(read_file(path));
}

std::string config_to_json(const SimConfig& cfg) {
  ojson j;
  j["seed"] = cfg.seed;
  j["devices"] = cfg.device_count;
  j["shards"] = cfg.shard_count;
  j["strategy"] = strategy_to_string(cfg.strategy);
  j["rounds"] = cfg.rounds;
  j["reshard_each_round"] = cfg.reshard_each_round;
  j["promote_each_round"] = cfg.promote_each_round;
  j["gating"] = cfg.gating;
  j["train"] = {{"step_size", cfg.train.step_size},
                {"epochs", cfg.train.epochs},
                {"loss", loss_to_string(cfg.train.loss)}};
  j["reputation"] = {{"prior_weight", cfg.reputation.prior_weight},
                     {"base_rate", cfg.reputation.base_rate},
                     {"pos_weight", cfg.reputation.pos_weight},
                     {"neg_weight", cfg.reputation.neg_weight},
                     {"severe_multiplier", cfg.reputation.severe_multiplier},
                     {"freshness_decay", cfg.reputation.freshness_decay},
                     {"gate_threshold", cfg.reputation.gate_threshold}};
  j["consensus"] = {{"tolerance", cfg.tolerance}};
  j["data"] = {{"dim", cfg.data.dim},
               {"train_samples", cfg.data.train_samples},
               {"holdout_samples", cfg.data.holdout_samples},
               {"eval_samples", cfg.data.eval_samples},
               {"separation", cfg.data.separation},
               {"tag", cfg.data.tag}};
  j["adversaries"] = {
      {"label_flip", cfg.adversaries.label_flip},
      {"free_rider", cfg.adversaries.free_rider},
      {"lazy", cfg.adversaries.lazy},
      {"flip_fraction", cfg.adversaries.flip_fraction},
      {"participation_probability", cfg.adversaries.participation_probability}};
  j["tasks"] = ojson::array();
  for (const TaskContract& t : cfg.tasks) {
    j["tasks"].push_back({{"task_id", t.task_id},
                          {"publisher", t.publisher},
                          {"loss", loss_to_string(t.loss)},
                          {"param_dim", t.param_dim},
                          {"required_data_type", t.required_data_type},
                          {"target_accuracy", t.target_accuracy},
                          {"max_rounds", t.max_rounds},
                          {"reward_pool", t.reward_pool}});
  }
  return j.dump(2);
}

std::string metrics_csv(const std::vector<RoundMetrics>& rounds) {
  std::string out =
      "record,round,device_id,task_id,shard_id,belief,disbelief,uncertainty,"
      "expected_reputation,eligible,committed,credits,global_accuracy\n";
  for (const RoundMetrics& rm : rounds) {
    for (const TaskRoundRow& t : rm.tasks) {
      out += "task," + std::to_string(t.round) + ",," + std::to_string(t.task) +
             "," + std::to_string(t.shard) + ",,,,,," + std::to_string(t.committed) +
             ",," + fmt_double(t.global_accuracy) + "\n";
    }
    for (const DeviceRoundRow& d : rm.devices) {
      out += "device," + std::to_string(d.round) + "," + std::to_string(d.device) +
             ",," + std::to_string(d.shard) + "," + fmt_double(d.opinion.belief) +
             "," + fmt_double(d.opinion.disbelief) + "," +
             fmt_double(d.opinion.uncertainty) + "," + fmt_double(d.expected) + "," +
             (d.eligible ? "1" : "0") + "," + std::to_string(d.committed) + "," +
             fmt_double(d.credits) + ","
             "\n";
    }
  }
  return out;
}

std::string chain_jsonl(const Chain& chain) {
  std::string out;
  for (const Block& b : chain.blocks()) {
    ojson j;
    j["height"] = b.header.height;
    j["prev_hash"] = to_hex(b.header.prev_hash);
    j["tx_root"] = to_hex(b.header.tx_root);
    j["chain"] = b.header.chain_tag.str();
    j["round"] = b.header.round;
    j["transactions"] = ojson::array();
    for (const UpdateTransaction& tx : b.transactions) {
      j["transactions"].push_back({{"shard_id", tx.shard_id},
                                   {"device_id", tx.device_id},
                                   {"round", tx.round},
                                   {"claimed_accuracy", tx.claimed_accuracy},
                                   {"sample_count", tx.sample_count},
                                   {"payload_digest", to_hex(tx.payload_digest)},
                                   {"submitted_at", tx.submitted_at}});
    }
    out += j.dump() + "\n";
  }
  if (!chain.empty()) {
    ojson head;
    head["head"] = to_hex(chain.head_digest());
    out += head.dump() + "\n";
  }
  return out;
}

ChainTag tag_from_string(const std::string& s) {
  if (s == "main") return ChainTag::main();
  if (s.rfind("sub:", 0) == 0) {
    std::uint32_t shard = 0;
    const char* begin = s.data() + 4;
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, shard);
    if (res.ec == std::errc{} && res.ptr == end) return ChainTag::sub(shard);
  }
  throw ConfigError("chain", "unrecognized chain tag '" + s + "'");
}

Chain parse_chain_jsonl(const std::string& text) {
  std::vector<Block> blocks;
  std::optional<Digest> head;
  std::optional<ChainTag> tag;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (head)
      throw ConfigError("chain", "content after the head line (line " +
                                     std::to_string(lineno) + ")");
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("chain", "line " + std::to_string(lineno) +
                                     " is not valid JSON: " + e.what());
    }
    if (!j.is_object())
      throw ConfigError("chain", "line " + std::to_string(lineno) +
                                     " must be a JSON object");
    if (j.contains("head")) {
      const auto d = digest_from_hex(j["head"].get<std::string>());
      if (!d)
        throw ConfigError("chain", "head digest on line " +
                                       std::to_string(lineno) + " is not 32-byte hex");
      head = *d;
      continue;
    }

    const std::string where = "chain line " + std::to_string(lineno);
    try {
      Block b;
      b.header.height = j.at("height").get<std::uint64_t>();
      const auto prev = digest_from_hex(j.at("prev_hash").get<std::string>());
      const auto root = digest_from_hex(j.at("tx_root").get<std::string>());
      if (!prev || !root)
        throw ConfigError("chain", where + ": digests must be 32-byte hex");
      b.header.prev_hash = *prev;
      b.header.tx_root = *root;
      b.header.chain_tag = tag_from_string(j.at("chain").get<std::string>());
      b.header.round = j.at("round").get<std::uint64_t>();
      for (const json& tj : j.at("transactions")) {
        UpdateTransaction tx;
        tx.shard_id = tj.at("shard_id").get<std::uint32_t>();
        tx.device_id = tj.at("device_id").get<std::uint32_t>();
        tx.round = tj.at("round").get<std::uint64_t>();
        tx.claimed_accuracy = tj.at("claimed_accuracy").get<double>();
        tx.sample_count = tj.at("sample_count").get<std::uint64_t>();
        const auto pd = digest_from_hex(tj.at("payload_digest").get<std::string>());
        if (!pd)
          throw ConfigError("chain", where + ": payload digest must be 32-byte hex");
        tx.payload_digest = *pd;
        tx.submitted_at = tj.at("submitted_at").get<std::uint64_t>();
        b.transactions.push_back(tx);
      }
      if (!tag) tag = b.header.chain_tag;
      blocks.push_back(std::move(b));
    } catch (const json::exception& e) {
      throw ConfigError("chain", where + ": " + e.what());
    }
  }

  if (blocks.empty()) return Chain(tag.value_or(ChainTag::main()));
  if (!head)
    throw ConfigError("chain", "missing trailing head line");
  return Chain::restore(*tag, std::move(blocks), *head);
}

Chain load_chain(const fs::path& path) { return parse_chain_jsonl(read_file(path)); }

std::string manifest_json(const SimConfig& cfg, const RunOutputs& outputs,
                          const SimResult& result) {
  ojson j;
  j["artifact"] = "srbfl";
  j["version"] = kArtifactVersion;
  j["seed"] = cfg.seed;
  j["rounds_executed"] = result.rounds_executed;
  j["main_chain_head"] = to_hex(result.main_chain.head_digest());
  j["outputs"] = {{"manifest", outputs.manifest.filename().string()},
                  {"metrics", outputs.metrics.filename().string()},
                  {"main_chain", outputs.main_chain.filename().string()},
                  {"offchain_dir", outputs.offchain_dir.filename().string()}};
  j["outputs"]["sub_chains"] = ojson::array();
  for (const fs::path& p : outputs.sub_chains)
    j["outputs"]["sub_chains"].push_back(p.filename().string());
  j["config"] = ojson::parse(config_to_json(cfg));
  return j.dump(2) + "\n";
}

namespace {

void write_file_atomic(const fs::path& path, const std::string& content,
                       std::vector<fs::path>& written) {
  const fs::path tmp = path.string() + ".tmp";
  std::error_code ec;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      fs::remove(tmp, ec);
      throw Error("cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot finalize " + path.string());
  }
  written.push_back(path);
}

}  // namespace

RunOutputs write_run_outputs(const fs::path& out_dir, const SimConfig& cfg,
                             const SimResult& result) {
  RunOutputs outputs;
  outputs.manifest = out_dir / "manifest.json";
  outputs.metrics = out_dir / "metrics.csv";
  outputs.main_chain = out_dir / "chain_main.jsonl";
  outputs.offchain_dir = out_dir / "offchain";
  for (std::size_t s = 0; s < result.sub_chains.size(); ++s)
    outputs.sub_chains.push_back(out_dir /
                                 ("chain_shard" + std::to_string(s) + ".jsonl"));

  // Render everything before touching the filesystem.
  const std::string metrics = metrics_csv(result.rounds);
  const std::string main_chain = chain_jsonl(result.main_chain);
  std::vector<std::string> subs;
  for (const Chain& c : result.sub_chains) subs.push_back(chain_jsonl(c));
  const std::string manifest = manifest_json(cfg, outputs, result);

  const bool out_dir_existed = fs::exists(out_dir);
  std::vector<fs::path> written;
  try {
    std::error_code ec;
    fs::create_directories(outputs.offchain_dir, ec);
    if (ec || !fs::is_directory(outputs.offchain_dir))
      throw Error("cannot create output directory " +
                  outputs.offchain_dir.string() +
                  (ec ? ": " + ec.message() : ""));

    write_file_atomic(outputs.metrics, metrics, written);
    write_file_atomic(outputs.main_chain, main_chain, written);
    for (std::size_t s = 0; s < subs.size(); ++s)
      write_file_atomic(outputs.sub_chains[s], subs[s], written);
    for (const auto& [digest, payload] : result.store.raw()) {
      std::string body(payload.begin(), payload.end());
      write_file_atomic(outputs.offchain_dir / (to_hex(digest) + ".bin"), body,
                        written);
    }
    // Manifest last: its presence marks a complete run.
    write_file_atomic(outputs.manifest, manifest, written);
  } catch (...) {
    std::error_code ec;
    for (const fs::path& p : written) fs::remove(p, ec);
    fs::remove(outputs.offchain_dir, ec);  // only removes an empty dir
    if (!out_dir_existed) fs::remove(out_dir, ec);
    throw;
  }
  return outputs;
}

OffChainStore load_offchain_dir(const fs::path& dir) {
  OffChainStore store;
  if (!fs::exists(dir)) return store;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".bin") continue;
    const auto digest = digest_from_hex(entry.path().stem().string());
    if (!digest) continue;
    const std::string body = read_file(entry.path());
    // Inserted verbatim: a tampered payload must load so verification can
    // flag it as corrupt rather than vanish.
    store.raw()[*digest] = Bytes(body.begin(), body.end());
  }
  return store;
}

namespace {

struct RunData {
  std::string label;
  bool gating = false;
  std::size_t rounds = 0;
  // task -> round -> (accuracy, committed)
  std::map<TaskId, std::map<Round, std::pair<double, std::uint32_t>>> tasks;
  // device -> round -> expected reputation
  std::map<DeviceId, std::map<Round, double>> reputation;
  std::map<DeviceId, double> final_credits;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

RunData load_run(const fs::path& dir, const std::string& label) {
  const std::string manifest_text = read_file(dir / "manifest.json");
  json manifest;
  try {
    manifest = json::parse(manifest_text);
  } catch (const json::exception& e) {
    throw ConfigError("manifest", dir.string() + "/manifest.json: " + e.what());
  }

  RunData run;
  run.label = label;
  if (manifest.contains("config") && manifest["config"].contains("gating"))
    run.gating = manifest["config"]["gating"].get<bool>();

  const std::string metrics = read_file(dir / "metrics.csv");
  std::istringstream in(metrics);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 13) throw ConfigError("metrics", "malformed metrics row");
    const Round round = std::stoull(f[1]);
    run.rounds = std::max(run.rounds, static_cast<std::size_t>(round) + 1);
    if (f[0] == "task") {
      const TaskId task = static_cast<TaskId>(std::stoul(f[3]));
      run.tasks[task][round] = {std::stod(f[12]),
                                static_cast<std::uint32_t>(std::stoul(f[10]))};
    } else if (f[0] == "device") {
      const DeviceId dev = static_cast<DeviceId>(std::stoul(f[2]));
      run.reputation[dev][round] = std::stod(f[8]);
      run.final_credits[dev] = std::stod(f[11]);
    }
  }
  return run;
}

}  // namespace

ReportFiles write_report(const fs::path& out_dir) {
  std::vector<RunData> runs;
  if (fs::exists(out_dir / "manifest.json")) {
    runs.push_back(load_run(out_dir, out_dir.filename().string()));
  } else if (fs::is_directory(out_dir)) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(out_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
        dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const fs::path& d : dirs) runs.push_back(load_run(d, d.filename().string()));
  }
  if (runs.empty())
    throw ConfigError("manifest", "no run outputs found under " + out_dir.string());

  const bool multi = runs.size() > 1;
  const auto col = [&](const std::string& name, const RunData& run) {
    return multi ? name + ":" + run.label : name;
  };

  std::size_t max_rounds = 0;
  for (const RunData& run : runs) max_rounds = std::max(max_rounds, run.rounds);

  std::string header = "round";
  for (const RunData& run : runs) {
    for (const auto& [task, series] : run.tasks) {
      header += "," + col("accuracy_t" + std::to_string(task), run);
      header += "," + col("committed_t" + std::to_string(task), run);
    }
    for (const auto& [dev, series] : run.reputation)
      header += "," + col("reputation_d" + std::to_string(dev), run);
  }

  std::string body;
  for (std::size_t r = 0; r < max_rounds; ++r) {
    body += std::to_string(r);
    for (const RunData& run : runs) {
      for (const auto& [task, series] : run.tasks) {
        const auto it = series.find(r);
        body += it == series.end() ? ","
                                   : "," + fmt_double(it->second.first);
        body += it == series.end() ? ","
                                   : "," + std::to_string(it->second.second);
      }
      for (const auto& [dev, series] : run.reputation) {
        const auto it = series.find(r);
        body += it == series.end() ? "," : "," + fmt_double(it->second);
      }
    }
    body += "\n";
  }

  std::string credits_csv = "device_id";
  for (const RunData& run : runs) credits_csv += "," + col("credits", run);
  credits_csv += "\n";
  std::set<DeviceId> all_devices;
  for (const RunData& run : runs)
    for (const auto& [dev, v] : run.final_credits) all_devices.insert(dev);
  for (DeviceId dev : all_devices) {
    credits_csv += std::to_string(dev);
    for (const RunData& run : runs) {
      const auto it = run.final_credits.find(dev);
      credits_csv += it == run.final_credits.end() ? ","
                                                   : "," + fmt_double(it->second);
    }
    credits_csv += "\n";
  }

  std::ostringstream summary;
  for (const RunData& run : runs) {
    summary << "run " << run.label << ": rounds=" << run.rounds
            << " gating=" << (run.gating ? "on" : "off");
    for (const auto& [task, series] : run.tasks) {
      if (series.empty()) continue;
      const auto& last = series.rbegin()->second;
      std::uint64_t committed = 0;
      for (const auto& [round, v] : series) committed += v.second;
      summary << " task" << task << "{final_accuracy=" << fmt_double(last.first)
              << ", committed=" << committed << "}";
    }
    summary << "\n";
  }

  ReportFiles files;
  files.report = out_dir / "report.csv";
  files.credits = out_dir / "report_credits.csv";
  files.summary = summary.str();
  files.rounds = max_rounds;

  std::vector<fs::path> written;
  write_file_atomic(files.report, header + "\n" + body, written);
  write_file_atomic(files.credits, credits_csv, written);
  return files;
}

}  // namespace srbfl
