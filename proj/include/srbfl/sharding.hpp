#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "srbfl/reputation.hpp"
#include "srbfl/rng.hpp"

namespace srbfl {

// Exact partition of the device population: every device in exactly one
// shard, every shard non-empty.
struct ShardAssignment {
  std::map<ShardId, std::vector<DeviceId>> shards;

  std::size_t shard_count() const { return shards.size(); }
  std::size_t device_count() const;
};

void check_assignment(const ShardAssignment& assignment,
                      std::span<const DeviceId> devices);

enum class Strategy : std::uint8_t { Random, Reputation, Feature };

// Seeded uniform shuffle then round-robin split; shard sizes differ by <= 1.
ShardAssignment assign_random(std::span<const DeviceId> devices,
                              std::size_t shard_count, Rng rng);

// Devices sorted by expected reputation (desc, ties by id asc) and dealt
// round-robin, so every shard gets a reputation-balanced stripe.
ShardAssignment assign_by_reputation(std::span<const DeviceId> devices,
                                     const std::map<DeviceId, Opinion>& opinions,
                                     std::size_t shard_count, Rng rng);

// Devices grouped by data-type tag; groups packed largest-first into shards
// to maximize per-shard tag homogeneity, spillover continuing round-robin.
ShardAssignment assign_by_feature(std::span<const DeviceId> devices,
                                  const std::map<DeviceId, std::string>& tags,
                                  std::size_t shard_count, Rng rng);

}  // namespace srbfl
