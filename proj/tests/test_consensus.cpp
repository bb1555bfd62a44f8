#include "doctest.h"
#include "srbfl/consensus.hpp"
#include "srbfl/errors.hpp"
#include "srbfl/sha256.hpp"

using namespace srbfl;

namespace {

Vote make_vote(DeviceId validator, bool approve) {
  Vote v;
  v.validator = validator;
  v.verdict = approve ? Verdict::Approve : Verdict::Reject;
  v.reason = approve ? VoteReason::AccuracyVerified : VoteReason::AccuracyInflated;
  return v;
}

std::vector<Vote> votes_of(std::size_t approvals, std::size_t rejections) {
  std::vector<Vote> votes;
  DeviceId id = 0;
  for (std::size_t i = 0; i < approvals; ++i) votes.push_back(make_vote(id++, true));
  for (std::size_t i = 0; i < rejections; ++i) votes.push_back(make_vote(id++, false));
  return votes;
}

struct Fixture {
  OffChainStore store;
  Dataset holdout;
  Proposal proposal;

  Fixture() {
    holdout = make_two_gaussian(200, 3, 1.5, Rng::seeded(31).stream("holdout"));
    const ModelParams trained =
        local_train(ModelParams::zeros(4), holdout,
                    TrainConfig{0.4, 60, LossKind::LogisticBinary});
    proposal.proposer = 7;
    proposal.transaction.shard_id = 0;
    proposal.transaction.device_id = 7;
    proposal.transaction.round = 2;
    proposal.transaction.sample_count = 200;
    proposal.transaction.payload_digest = store.put(serialize_params(trained));
    proposal.transaction.claimed_accuracy =
        evaluate_accuracy(trained, holdout, LossKind::LogisticBinary);
  }
};

}  // namespace

TEST_SUITE_BEGIN("consensus");

TEST_CASE("validate_update approves an exact claim") {
  Fixture f;
  const Vote v = validate_update(3, f.proposal, f.holdout, 0.05, f.store);
  CHECK(v.verdict == Verdict::Approve);
  CHECK(v.reason == VoteReason::AccuracyVerified);
  CHECK(v.validator == 3);
  CHECK(v.proposal_digest == hash_transaction(f.proposal.transaction));
}

TEST_CASE("validate_update rejects an inflated claim") {
  Fixture f;
  f.proposal.transaction.claimed_accuracy = 0.99;
  // The zero model scores 0.5 on a balanced holdout.
  f.proposal.transaction.payload_digest =
      f.store.put(serialize_params(ModelParams::zeros(4)));
  const Vote v = validate_update(3, f.proposal, f.holdout, 0.1, f.store);
  CHECK(v.verdict == Verdict::Reject);
  CHECK(v.reason == VoteReason::AccuracyInflated);
}

TEST_CASE("validate_update rejects when the payload cannot be resolved") {
  Fixture f;
  f.proposal.transaction.payload_digest = sha256(std::string_view{"gone"});
  const Vote v = validate_update(3, f.proposal, f.holdout, 0.05, f.store);
  CHECK(v.verdict == Verdict::Reject);
  CHECK(v.reason == VoteReason::PayloadMissing);
}

TEST_CASE("validate_update refuses self-validation") {
  Fixture f;
  CHECK_THROWS_AS(validate_update(7, f.proposal, f.holdout, 0.05, f.store),
                  ContractViolation);
}

TEST_CASE("validate_update approval tracks a recomputation oracle") {
  Rng rng = Rng::seeded(32);
  Fixture f;
  for (int trial = 0; trial < 60; ++trial) {
    // Random claims around the truth; the oracle recomputes the accuracy.
    const double truth = evaluate_accuracy(
        deserialize_params(f.store.get(f.proposal.transaction.payload_digest)),
        f.holdout, LossKind::LogisticBinary);
    Proposal p = f.proposal;
    p.transaction.claimed_accuracy =
        std::min(1.0, std::max(0.0, truth + 0.3 * (rng.next_unit() - 0.5)));
    const double tolerance = 0.1 * rng.next_unit();
    const Vote v = validate_update(1, p, f.holdout, tolerance, f.store);
    const bool expect_approve =
        std::abs(p.transaction.claimed_accuracy - truth) <= tolerance;
    CHECK((v.verdict == Verdict::Approve) == expect_approve);
  }
}

TEST_CASE("tally applies the ceil(2n/3) quorum") {
  CHECK(quorum_threshold(4) == 3);
  CHECK(tally(votes_of(3, 1), 4) == TallyOutcome::Committed);
  CHECK(tally(votes_of(2, 2), 4) == TallyOutcome::Aborted);
  // Quorum counts over membership, not votes received.
  CHECK(tally(votes_of(2, 0), 4) == TallyOutcome::Aborted);
  CHECK(tally(votes_of(1, 0), 1) == TallyOutcome::Committed);
}

TEST_CASE("tally rejects duplicate validators and empty shards") {
  std::vector<Vote> votes{make_vote(1, true), make_vote(1, false)};
  CHECK_THROWS_AS(tally(votes, 4), ContractViolation);
  CHECK_THROWS_AS(tally(votes_of(1, 0), 0), ContractViolation);
}

TEST_CASE("tally matches the counting oracle for every vote multiset") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t approvals = 0; approvals <= n; ++approvals) {
      for (std::size_t rejections = 0; approvals + rejections <= n; ++rejections) {
        const std::size_t quorum = (2 * n + 2) / 3;
        const TallyOutcome expected = approvals >= quorum ? TallyOutcome::Committed
                                                          : TallyOutcome::Aborted;
        CHECK(tally(votes_of(approvals, rejections), n) == expected);
      }
    }
  }
}

TEST_CASE("an added approval never aborts a committed tally") {
  Rng rng = Rng::seeded(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 11;
    const std::size_t approvals = rng.next_u64() % n;
    const std::size_t rejections = rng.next_u64() % (n - approvals);
    if (approvals + rejections >= n) continue;
    const TallyOutcome before = tally(votes_of(approvals, rejections), n);
    auto votes = votes_of(approvals, rejections);
    votes.push_back(make_vote(static_cast<DeviceId>(approvals + rejections), true));
    const TallyOutcome after = tally(votes, n);
    if (before == TallyOutcome::Committed) CHECK(after == TallyOutcome::Committed);
  }
}

TEST_CASE("quorum tolerates fewer than ceil(n/3) byzantine validators") {
  for (std::size_t n = 1; n <= 30; ++n) {
    const std::size_t quorum = quorum_threshold(n);
    const std::size_t byz_limit = (n + 2) / 3;  // ceil(n/3)
    // Byzantine approvals alone can never commit.
    CHECK(byz_limit - 1 < quorum);
    // Honest unanimity commits whenever n >= 3 * byzantine.
    for (std::size_t byz = 0; 3 * byz <= n; ++byz)
      CHECK(n - byz >= quorum);
  }
}

TEST_SUITE_END();
