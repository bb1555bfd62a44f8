#include "srbfl/reputation.hpp"

#include <cmath>

#include "srbfl/errors.hpp"

namespace srbfl {

void check_opinion(const Opinion& o) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(o.belief) || !in_unit(o.disbelief) || !in_unit(o.uncertainty) ||
      !in_unit(o.base_rate))
    throw ContractViolation("opinion components must lie in [0, 1]");
  if (std::abs(o.belief + o.disbelief + o.uncertainty - 1.0) > 1e-12)
    throw ContractViolation("opinion must satisfy b + d + u = 1");
}

void check_reputation_params(const ReputationParams& p) {
  if (!(p.prior_weight > 0.0))
    throw ContractViolation("prior_weight must be > 0");
  if (!(p.base_rate >= 0.0 && p.base_rate <= 1.0))
    throw ContractViolation("base_rate must lie in [0, 1]");
  if (!(p.pos_weight > 0.0) || !(p.neg_weight > 0.0))
    throw ContractViolation("outcome weights must be > 0");
  if (!(p.severe_multiplier >= 1.0))
    throw ContractViolation("severe_multiplier must be >= 1");
  if (!(p.freshness_decay > 0.0 && p.freshness_decay <= 1.0))
    throw ContractViolation("freshness_decay must lie in (0, 1]");
  if (!(p.gate_threshold >= 0.0 && p.gate_threshold <= 1.0))
    throw ContractViolation("gate_threshold must lie in [0, 1]");
}

Evidence weighted_evidence(std::span<const InteractionRecord> records, Round now,
                           const ReputationParams& p) {
  check_reputation_params(p);
  Evidence e;
  for (const InteractionRecord& rec : records) {
    if (rec.round > now)
      throw ContractViolation("interaction record from round " +
                              std::to_string(rec.round) +
                              " lies in the future of round " +
                              std::to_string(now));
    const double freshness =
        std::pow(p.freshness_decay, static_cast<double>(now - rec.round));
    if (rec.outcome == Outcome::Positive) {
      e.positive += p.pos_weight * freshness;
    } else {
      const double sev = rec.severity == Severity::Severe ? p.severe_multiplier : 1.0;
      e.negative += p.neg_weight * freshness * sev;
    }
  }
  return e;
}

Opinion opinion_from_evidence(double r, double s, const ReputationParams& p) {
  check_reputation_params(p);
  if (r < 0.0 || s < 0.0)
    throw ContractViolation("evidence counts must be non-negative");
  const double denom = r + s + p.prior_weight;
  Opinion o;
  o.belief = r / denom;
  o.disbelief = s / denom;
  o.uncertainty = p.prior_weight / denom;
  o.base_rate = p.base_rate;
  return o;
}

double expected_reputation(const Opinion& o) {
  check_opinion(o);
  return o.belief + o.base_rate * o.uncertainty;
}

Opinion fuse(const Opinion& o1, const Opinion& o2) {
  check_opinion(o1);
  check_opinion(o2);
  if (o1.base_rate != o2.base_rate)
    throw ContractViolation("fusion requires matching base rates");
  const double kappa =
      o1.uncertainty + o2.uncertainty - o1.uncertainty * o2.uncertainty;
  if (kappa == 0.0)
    throw UndefinedFusion("cumulative fusion of two dogmatic opinions");
  Opinion out;
  out.belief = (o1.belief * o2.uncertainty + o2.belief * o1.uncertainty) / kappa;
  out.disbelief =
      (o1.disbelief * o2.uncertainty + o2.disbelief * o1.uncertainty) / kappa;
  out.uncertainty = (o1.uncertainty * o2.uncertainty) / kappa;
  out.base_rate = o1.base_rate;
  return out;
}

GateDecision gate(const Opinion& o, const ReputationParams& p) {
  check_reputation_params(p);
  return expected_reputation(o) >= p.gate_threshold ? GateDecision::Eligible
                                                    : GateDecision::Excluded;
}

}  // namespace srbfl
