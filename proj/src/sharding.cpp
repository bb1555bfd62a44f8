#include "srbfl/sharding.hpp"

#include <algorithm>
#include <set>

#include "srbfl/errors.hpp"

namespace srbfl {

std::size_t ShardAssignment::device_count() const {
  std::size_t n = 0;
  for (const auto& [id, members] : shards) n += members.size();
  return n;
}

void check_assignment(const ShardAssignment& assignment,
                      std::span<const DeviceId> devices) {
  std::set<DeviceId> seen;
  for (const auto& [shard, members] : assignment.shards) {
    if (members.empty())
      throw ContractViolation("shard " + std::to_string(shard) + " is empty");
    for (DeviceId d : members)
      if (!seen.insert(d).second)
        throw ContractViolation("device " + std::to_string(d) +
                                " assigned to more than one shard");
  }
  if (seen.size() != devices.size())
    throw ContractViolation("assignment does not cover the device set");
  for (DeviceId d : devices)
    if (seen.count(d) == 0)
      throw ContractViolation("device " + std::to_string(d) + " unassigned");
}

namespace {

void check_inputs(std::span<const DeviceId> devices, std::size_t shard_count) {
  if (shard_count < 1)
    throw ContractViolation("shard count must be >= 1");
  if (devices.size() < shard_count)
    throw ContractViolation("need at least one device per shard");
}

ShardAssignment deal_round_robin(std::span<const DeviceId> ordered,
                                 std::size_t shard_count) {
  ShardAssignment out;
  for (std::size_t i = 0; i < shard_count; ++i)
    out.shards[static_cast<ShardId>(i)] = {};
  for (std::size_t i = 0; i < ordered.size(); ++i)
    out.shards[static_cast<ShardId>(i % shard_count)].push_back(ordered[i]);
  return out;
}

}  // namespace

ShardAssignment assign_random(std::span<const DeviceId> devices,
                              std::size_t shard_count, Rng rng) {
  check_inputs(devices, shard_count);
  std::vector<DeviceId> order(devices.begin(), devices.end());
  rng.shuffle(order);
  return deal_round_robin(order, shard_count);
}

ShardAssignment assign_by_reputation(std::span<const DeviceId> devices,
                                     const std::map<DeviceId, Opinion>& opinions,
                                     std::size_t shard_count, Rng /*rng*/) {
  check_inputs(devices, shard_count);
  std::vector<DeviceId> order(devices.begin(), devices.end());
  std::stable_sort(order.begin(), order.end(), [&](DeviceId a, DeviceId b) {
    const auto rep = [&](DeviceId d) {
      const auto it = opinions.find(d);
      return it == opinions.end() ? 0.5 : expected_reputation(it->second);
    };
    const double ra = rep(a), rb = rep(b);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  return deal_round_robin(order, shard_count);
}

ShardAssignment assign_by_feature(std::span<const DeviceId> devices,
                                  const std::map<DeviceId, std::string>& tags,
                                  std::size_t shard_count, Rng rng) {
  check_inputs(devices, shard_count);

  std::map<std::string, std::vector<DeviceId>> groups;
  for (DeviceId d : devices) {
    const auto it = tags.find(d);
    groups[it == tags.end() ? std::string() : it->second].push_back(d);
  }

  // Largest group first (ties by tag) keeps big homogeneous blocks intact.
  std::vector<const std::vector<DeviceId>*> ordered_groups;
  {
    std::vector<std::pair<std::string, const std::vector<DeviceId>*>> v;
    for (auto& [tag, members] : groups) {
      rng.shuffle(members);
      v.emplace_back(tag, &members);
    }
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      if (a.second->size() != b.second->size())
        return a.second->size() > b.second->size();
      return a.first < b.first;
    });
    for (const auto& [tag, members] : v) ordered_groups.push_back(members);
  }

  // Balanced capacities: the first (n mod S) shards take one extra device.
  const std::size_t n = devices.size();
  std::vector<std::size_t> capacity(shard_count, n / shard_count);
  for (std::size_t i = 0; i < n % shard_count; ++i) ++capacity[i];

  ShardAssignment out;
  for (std::size_t i = 0; i < shard_count; ++i)
    out.shards[static_cast<ShardId>(i)] = {};

  std::size_t shard = 0;
  for (const auto* group : ordered_groups) {
    for (DeviceId d : *group) {
      while (out.shards[static_cast<ShardId>(shard)].size() >= capacity[shard])
        shard = (shard + 1) % shard_count;
      out.shards[static_cast<ShardId>(shard)].push_back(d);
    }
  }
  return out;
}

}  // namespace srbfl
