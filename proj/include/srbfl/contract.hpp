#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "srbfl/fl.hpp"
#include "srbfl/ledger.hpp"
#include "srbfl/reputation.hpp"

namespace srbfl {

using TaskId = std::uint32_t;

// A published model task: requirements plus a funded reward pool.
struct TaskContract {
  TaskId task_id = 0;
  std::string publisher;
  LossKind loss = LossKind::LogisticBinary;
  std::size_t param_dim = 0;  // l = feature dim + 1
  std::string required_data_type;
  double target_accuracy = 1.0;
  std::uint64_t max_rounds = 1;
  double reward_pool = 0.0;
};

void check_task_contract(const TaskContract& contract);

// What publish_task needs to know about a shard: its id and the data-type
// tags of its members.
struct ShardDescriptor {
  ShardId shard_id = 0;
  std::vector<std::string> member_tags;
};

// Credit bookkeeping. Total credits are conserved: the sum of all balances
// plus remaining pools never changes across settlements.
struct CreditLedger {
  std::map<DeviceId, double> device_balances;
  std::map<std::string, double> publisher_balances;

  double device_balance(DeviceId id) const {
    const auto it = device_balances.find(id);
    return it == device_balances.end() ? 0.0 : it->second;
  }
  double total() const;
};

// Picks the shard with the highest fraction of members matching the task's
// required data type (ties: lowest shard_id).
ShardId publish_task(const TaskContract& contract,
                     std::span<const ShardDescriptor> shards);

// Splits the reward pool across devices with >= 1 committed transaction and
// an Eligible gate, proportionally to committed-count x expected reputation.
// Shares sum to the pool exactly (largest-remainder rounding at 1e-9).
// When nothing is distributable the pool returns to the publisher.
CreditLedger settle_rewards(const TaskContract& contract,
                            std::span<const UpdateTransaction> committed,
                            const std::map<DeviceId, Opinion>& reputations,
                            const CreditLedger& credits,
                            const ReputationParams& rep_params);

}  // namespace srbfl
