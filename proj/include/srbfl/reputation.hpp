#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "srbfl/ledger.hpp"

namespace srbfl {

enum class Outcome : std::uint8_t { Positive, Negative };
enum class Severity : std::uint8_t { Standard, Severe };

struct InteractionRecord {
  DeviceId ratee = 0;
  ShardId shard_id = 0;
  Round round = 0;
  Outcome outcome = Outcome::Positive;
  Severity severity = Severity::Standard;
};

// Subjective-logic triple with base rate; b + d + u = 1.
struct Opinion {
  double belief = 0.0;
  double disbelief = 0.0;
  double uncertainty = 1.0;
  double base_rate = 0.5;

  static Opinion vacuous(double base_rate = 0.5) {
    return Opinion{0.0, 0.0, 1.0, base_rate};
  }
};

void check_opinion(const Opinion& o);

// The multiweight knobs: outcome asymmetry, severity scaling and freshness
// decay compose multiplicatively on each interaction before the standard
// evidence-to-opinion mapping (prior weight W, base rate a).
struct ReputationParams {
  double prior_weight = 2.0;       // W
  double base_rate = 0.5;          // a
  double pos_weight = 1.0;         // lambda_pos
  double neg_weight = 2.0;         // lambda_neg
  double severe_multiplier = 2.0;  // extra factor on Severe negatives
  double freshness_decay = 0.9;    // gamma, per round of age
  double gate_threshold = 0.4;     // theta
};

void check_reputation_params(const ReputationParams& p);

struct Evidence {
  double positive = 0.0;  // r
  double negative = 0.0;  // s
};

// r = lambda_pos * sum_pos gamma^(now-round)
// s = lambda_neg * sum_neg gamma^(now-round) * (severe_multiplier if Severe)
Evidence weighted_evidence(std::span<const InteractionRecord> records, Round now,
                           const ReputationParams& p);

// b = r/(r+s+W), d = s/(r+s+W), u = W/(r+s+W).
Opinion opinion_from_evidence(double r, double s, const ReputationParams& p);

inline Opinion opinion_from_evidence(const Evidence& e, const ReputationParams& p) {
  return opinion_from_evidence(e.positive, e.negative, p);
}

// E = b + a*u.
double expected_reputation(const Opinion& o);

// Cumulative fusion of two independent opinions; equivalent to pooling
// their evidence. Undefined when both are dogmatic (u1 = u2 = 0).
Opinion fuse(const Opinion& o1, const Opinion& o2);

enum class GateDecision : std::uint8_t { Eligible, Excluded };

// Eligible iff expected_reputation(o) >= theta.
GateDecision gate(const Opinion& o, const ReputationParams& p);

}  // namespace srbfl
