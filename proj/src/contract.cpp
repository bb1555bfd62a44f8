#include "srbfl/contract.hpp"

#include <algorithm>
#include <cmath>

#include "srbfl/errors.hpp"

namespace srbfl {

namespace {

// Settlement granularity: shares are dealt in units of 1e-9 credits.
constexpr double kUnit = 1e-9;

}  // namespace

void check_task_contract(const TaskContract& contract) {
  if (!(contract.target_accuracy >= 0.0 && contract.target_accuracy <= 1.0))
    throw ContractViolation("target_accuracy must lie in [0, 1]");
  if (contract.max_rounds < 1)
    throw ContractViolation("max_rounds must be >= 1");
  if (!(contract.reward_pool >= 0.0))
    throw ContractViolation("reward_pool must be >= 0");
  if (contract.param_dim < 1)
    throw ContractViolation("param_dim must be >= 1");
}

double CreditLedger::total() const {
  double sum = 0.0;
  for (const auto& [id, bal] : device_balances) sum += bal;
  for (const auto& [name, bal] : publisher_balances) sum += bal;
  return sum;
}

ShardId publish_task(const TaskContract& contract,
                     std::span<const ShardDescriptor> shards) {
  check_task_contract(contract);
  if (shards.empty())
    throw ContractViolation("publish_task requires at least one shard");

  bool found = false;
  ShardId best_id = 0;
  double best_fraction = -1.0;
  for (const ShardDescriptor& shard : shards) {
    if (shard.member_tags.empty()) continue;
    const auto matches = static_cast<double>(
        std::count(shard.member_tags.begin(), shard.member_tags.end(),
                   contract.required_data_type));
    if (matches == 0.0) continue;
    const double fraction = matches / static_cast<double>(shard.member_tags.size());
    if (!found || fraction > best_fraction ||
        (fraction == best_fraction && shard.shard_id < best_id)) {
      found = true;
      best_fraction = fraction;
      best_id = shard.shard_id;
    }
  }
  if (!found)
    throw NoEligibleShard("no shard has a device with data type '" +
                          contract.required_data_type + "'");
  return best_id;
}

CreditLedger settle_rewards(const TaskContract& contract,
                            std::span<const UpdateTransaction> committed,
                            const std::map<DeviceId, Opinion>& reputations,
                            const CreditLedger& credits,
                            const ReputationParams& rep_params) {
  check_task_contract(contract);
  CreditLedger out = credits;

  const auto pool_units = static_cast<std::int64_t>(
      std::llround(contract.reward_pool / kUnit));
  if (pool_units == 0) return out;

  // Committed-transaction counts per device, in device order.
  std::map<DeviceId, std::uint64_t> counts;
  for (const UpdateTransaction& tx : committed) ++counts[tx.device_id];

  struct Share {
    DeviceId device;
    double weight;
    std::int64_t units;
    double remainder;
  };
  std::vector<Share> shares;
  double total_weight = 0.0;
  for (const auto& [device, count] : counts) {
    const auto rep_it = reputations.find(device);
    const Opinion opinion =
        rep_it == reputations.end() ? Opinion::vacuous(rep_params.base_rate)
                                    : rep_it->second;
    if (gate(opinion, rep_params) == GateDecision::Excluded) continue;
    const double weight =
        static_cast<double>(count) * expected_reputation(opinion);
    if (weight <= 0.0) continue;
    shares.push_back(Share{device, weight, 0, 0.0});
    total_weight += weight;
  }

  if (shares.empty() || total_weight <= 0.0) {
    out.publisher_balances[contract.publisher] += contract.reward_pool;
    return out;
  }

  // Largest-remainder apportionment over 1e-9 units keeps the sum exact.
  std::int64_t dealt = 0;
  for (Share& s : shares) {
    const double exact =
        static_cast<double>(pool_units) * (s.weight / total_weight);
    s.units = static_cast<std::int64_t>(std::floor(exact));
    s.remainder = exact - static_cast<double>(s.units);
    dealt += s.units;
  }
  std::int64_t leftover = pool_units - dealt;
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (shares[a].remainder != shares[b].remainder)
      return shares[a].remainder > shares[b].remainder;
    return shares[a].device < shares[b].device;
  });
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % order.size()) {
    ++shares[order[i]].units;
    --leftover;
  }

  for (const Share& s : shares)
    out.device_balances[s.device] += static_cast<double>(s.units) * kUnit;
  return out;
}

}  // namespace srbfl
