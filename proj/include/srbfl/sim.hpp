#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srbfl/consensus.hpp"
#include "srbfl/contract.hpp"
#include "srbfl/fl.hpp"
#include "srbfl/ledger.hpp"
#include "srbfl/reputation.hpp"
#include "srbfl/sharding.hpp"

namespace srbfl {

enum class BehaviorKind : std::uint8_t { Honest, LabelFlip, FreeRider, Lazy };

struct Behavior {
  BehaviorKind kind = BehaviorKind::Honest;
  // flip_fraction for LabelFlip, participation_probability for Lazy.
  double param = 0.0;
};

struct DeviceProfile {
  DeviceId id = 0;
  Dataset train_data;
  Dataset holdout;  // disjoint split; what the device measures and validates on
  Behavior behavior;
};

// Population fractions per adversary behavior; the rest stay honest.
struct AdversaryMix {
  double label_flip = 0.0;
  double free_rider = 0.0;
  double lazy = 0.0;
  double flip_fraction = 1.0;
  double participation_probability = 0.5;

  double total() const { return label_flip + free_rider + lazy; }
};

struct DataConfig {
  std::size_t dim = 4;
  std::size_t train_samples = 100;
  std::size_t holdout_samples = 100;
  std::size_t eval_samples = 400;
  double separation = 1.0;
  std::string tag = "gauss2";
};

struct SimConfig {
  std::uint64_t seed = 0;
  std::size_t device_count = 1;
  std::size_t shard_count = 1;
  Strategy strategy = Strategy::Random;
  std::size_t rounds = 1;
  bool reshard_each_round = false;
  bool promote_each_round = false;
  bool gating = false;  // reputation participation gating
  TrainConfig train;
  ReputationParams reputation;
  double tolerance = 0.05;  // consensus accuracy tolerance
  DataConfig data;
  AdversaryMix adversaries;
  std::vector<TaskContract> tasks;
};

// Full invariant check; each diagnostic names the offending key.
std::vector<std::string> validate_config(const SimConfig& cfg);
void require_valid(const SimConfig& cfg);  // throws ConfigError on first issue

struct DeviceRoundRow {
  Round round = 0;
  DeviceId device = 0;
  ShardId shard = 0;
  Opinion opinion;
  double expected = 0.5;
  bool eligible = true;
  std::uint32_t committed = 0;  // committed txs by this device this round
  double credits = 0.0;
};

struct TaskRoundRow {
  Round round = 0;
  TaskId task = 0;
  ShardId shard = 0;
  std::uint32_t committed = 0;  // committed txs on this shard this round
  double global_accuracy = 0.0;
};

struct RoundMetrics {
  Round round = 0;
  std::vector<TaskRoundRow> tasks;
  std::vector<DeviceRoundRow> devices;
};

struct SimResult {
  std::vector<RoundMetrics> rounds;
  Chain main_chain{ChainTag::main()};
  std::vector<Chain> sub_chains;
  OffChainStore store;
  CreditLedger credits;
  std::map<DeviceId, Opinion> opinions;
  std::map<TaskId, ShardId> task_shards;
  std::map<TaskId, double> final_accuracy;
  std::size_t rounds_executed = 0;
};

// Seeded assignment of behaviors matching the requested fractions
// (largest-remainder rounding of counts).
std::vector<Behavior> inject_adversaries(std::size_t device_count,
                                         const AdversaryMix& mix, Rng rng);

// The synchronous round orchestrator. Step 1 (publish + shard assignment)
// runs in the constructor; run_round executes Steps 2-4 plus aggregation.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg);

  RoundMetrics run_round();

  // True once every task reached its target accuracy or round budget.
  bool all_tasks_done() const;

  void settle_all();

  SimResult take_result() &&;

  const std::vector<DeviceProfile>& devices() const { return devices_; }
  const ShardAssignment& assignment() const { return assignment_; }
  const std::map<TaskId, ShardId>& task_shards() const { return task_shards_; }
  const std::map<TaskId, ModelParams>& global_params() const { return global_params_; }
  const std::map<DeviceId, Opinion>& opinions() const { return opinions_; }
  const CreditLedger& credits() const { return credits_; }
  Round next_round() const { return next_round_; }

 private:
  struct TaskState {
    TaskContract contract;
    ShardId shard = 0;
    Dataset eval;
    double accuracy = 0.0;
    bool done = false;
    double pool_remaining = 0.0;
  };

  void assign_shards();
  bool is_eligible(DeviceId device) const;
  void refresh_opinions(Round now);

  SimConfig cfg_;
  Rng root_;
  std::vector<DeviceProfile> devices_;
  ShardAssignment assignment_;
  std::vector<TaskState> tasks_;
  std::map<TaskId, ShardId> task_shards_;
  std::map<TaskId, ModelParams> global_params_;
  std::map<DeviceId, std::vector<InteractionRecord>> records_;
  std::map<DeviceId, Opinion> opinions_;
  Chain main_chain_{ChainTag::main()};
  std::vector<Chain> sub_chains_;
  OffChainStore store_;
  CreditLedger credits_;
  double initial_pool_total_ = 0.0;
  Round next_round_ = 0;
  bool settled_ = false;
  std::vector<RoundMetrics> history_;
};

// Runs Step 1 through settlement: cfg.rounds rounds or until every task is
// done, then final promotion and reward settlement. Deterministic per seed.
SimResult run_simulation(const SimConfig& cfg);

}  // namespace srbfl
