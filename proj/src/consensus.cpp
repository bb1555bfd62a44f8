#include "srbfl/consensus.hpp"

#include <cmath>
#include <unordered_set>

#include "srbfl/errors.hpp"

namespace srbfl {

void check_proposal(const Proposal& proposal) {
  if (proposal.proposer != proposal.transaction.device_id)
    throw ContractViolation("proposer must be the transaction's device");
  check_transaction(proposal.transaction);
}

Vote validate_update(DeviceId validator, const Proposal& proposal,
                     const Dataset& validator_holdout, double tolerance,
                     const OffChainStore& store) {
  check_proposal(proposal);
  if (validator == proposal.proposer)
    throw ContractViolation("a device may not validate its own proposal");
  if (!(tolerance >= 0.0))
    throw ContractViolation("tolerance must be >= 0");

  Vote vote;
  vote.validator = validator;
  vote.proposal_digest = hash_transaction(proposal.transaction);

  if (store.state(proposal.transaction.payload_digest) !=
      OffChainStore::PayloadState::Ok) {
    vote.verdict = Verdict::Reject;
    vote.reason = VoteReason::PayloadMissing;
    return vote;
  }

  ModelParams params;
  try {
    params = deserialize_params(store.get(proposal.transaction.payload_digest));
  } catch (const Error&) {
    vote.verdict = Verdict::Reject;
    vote.reason = VoteReason::Other;
    return vote;
  }
  if (!all_finite(params) || params.dim() != validator_holdout.dim() + 1) {
    vote.verdict = Verdict::Reject;
    vote.reason = VoteReason::Other;
    return vote;
  }

  const double measured =
      evaluate_accuracy(params, validator_holdout, LossKind::LogisticBinary);
  if (std::abs(proposal.transaction.claimed_accuracy - measured) <= tolerance) {
    vote.verdict = Verdict::Approve;
    vote.reason = VoteReason::AccuracyVerified;
  } else {
    vote.verdict = Verdict::Reject;
    vote.reason = VoteReason::AccuracyInflated;
  }
  return vote;
}

TallyOutcome tally(std::span<const Vote> votes, std::size_t shard_size) {
  if (shard_size < 1)
    throw ContractViolation("shard size must be >= 1");
  std::unordered_set<DeviceId> seen;
  std::size_t approvals = 0;
  for (const Vote& v : votes) {
    if (!seen.insert(v.validator).second)
      throw ContractViolation("duplicate vote from validator " +
                              std::to_string(v.validator));
    if (v.verdict == Verdict::Approve) ++approvals;
  }
  return approvals >= quorum_threshold(shard_size) ? TallyOutcome::Committed
                                                   : TallyOutcome::Aborted;
}

}  // namespace srbfl
