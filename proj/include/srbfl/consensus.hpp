#pragma once

#include <cstdint>
#include <span>

#include "srbfl/fl.hpp"
#include "srbfl/ledger.hpp"

namespace srbfl {

struct Proposal {
  UpdateTransaction transaction;
  DeviceId proposer = 0;  // must equal transaction.device_id
};

void check_proposal(const Proposal& proposal);

enum class Verdict : std::uint8_t { Approve, Reject };

enum class VoteReason : std::uint8_t {
  AccuracyVerified,
  AccuracyInflated,
  PayloadMissing,
  Other,
};

struct Vote {
  DeviceId validator = 0;
  Digest proposal_digest{};
  Verdict verdict = Verdict::Reject;
  VoteReason reason = VoteReason::Other;
};

enum class TallyOutcome : std::uint8_t { Committed, Aborted };

// The validator re-measures the proposed parameters on its own holdout and
// approves iff the claim is within `tolerance` of what it measures and the
// payload resolves. Deterministic.
Vote validate_update(DeviceId validator, const Proposal& proposal,
                     const Dataset& validator_holdout, double tolerance,
                     const OffChainStore& store);

// Committed iff approvals >= ceil(2n/3), n = shard membership eligible to
// vote (not the number of votes received). Duplicate validators rejected.
TallyOutcome tally(std::span<const Vote> votes, std::size_t shard_size);

// ceil(2n/3) in integer arithmetic.
constexpr std::size_t quorum_threshold(std::size_t n) { return (2 * n + 2) / 3; }

}  // namespace srbfl
