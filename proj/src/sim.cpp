#include "srbfl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "srbfl/errors.hpp"

namespace srbfl {

std::vector<std::string> validate_config(const SimConfig& cfg) {
  std::vector<std::string> diags;
  const auto bad = [&](const std::string& key, const std::string& why) {
    diags.push_back(key + ": " + why);
  };

  if (cfg.device_count < 1) bad("devices", "must be >= 1");
  if (cfg.shard_count < 1) bad("shards", "must be >= 1");
  if (cfg.shard_count > cfg.device_count)
    bad("shards", "must not exceed device count");
  if (cfg.rounds < 1) bad("rounds", "must be >= 1");

  if (!(cfg.train.step_size > 0.0)) bad("train.step_size", "must be > 0");
  if (cfg.train.epochs < 1) bad("train.epochs", "must be >= 1");

  const ReputationParams& r = cfg.reputation;
  if (!(r.prior_weight > 0.0)) bad("reputation.prior_weight", "must be > 0");
  if (!(r.base_rate >= 0.0 && r.base_rate <= 1.0))
    bad("reputation.base_rate", "must lie in [0, 1]");
  if (!(r.pos_weight > 0.0)) bad("reputation.pos_weight", "must be > 0");
  if (!(r.neg_weight > 0.0)) bad("reputation.neg_weight", "must be > 0");
  if (!(r.severe_multiplier >= 1.0))
    bad("reputation.severe_multiplier", "must be >= 1");
  if (!(r.freshness_decay > 0.0 && r.freshness_decay <= 1.0))
    bad("reputation.freshness_decay", "must lie in (0, 1]");
  if (!(r.gate_threshold >= 0.0 && r.gate_threshold <= 1.0))
    bad("reputation.gate_threshold", "must lie in [0, 1]");

  if (!(cfg.tolerance >= 0.0)) bad("consensus.tolerance", "must be >= 0");

  if (cfg.data.dim < 1) bad("data.dim", "must be >= 1");
  if (cfg.data.train_samples < 1) bad("data.train_samples", "must be >= 1");
  if (cfg.data.holdout_samples < 1) bad("data.holdout_samples", "must be >= 1");
  if (cfg.data.eval_samples < 1) bad("data.eval_samples", "must be >= 1");
  if (cfg.data.tag.empty()) bad("data.tag", "must be non-empty");

  const AdversaryMix& mix = cfg.adversaries;
  const auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!frac_ok(mix.label_flip)) bad("adversaries.label_flip", "must lie in [0, 1]");
  if (!frac_ok(mix.free_rider)) bad("adversaries.free_rider", "must lie in [0, 1]");
  if (!frac_ok(mix.lazy)) bad("adversaries.lazy", "must lie in [0, 1]");
  if (mix.total() > 1.0 + 1e-12)
    bad("adversaries", "behavior fractions must sum to <= 1");
  if (!(mix.flip_fraction > 0.0 && mix.flip_fraction <= 1.0))
    bad("adversaries.flip_fraction", "must lie in (0, 1]");
  if (!(mix.participation_probability >= 0.0 && mix.participation_probability < 1.0))
    bad("adversaries.participation_probability", "must lie in [0, 1)");

  if (cfg.tasks.empty()) bad("tasks", "at least one task is required");
  if (cfg.tasks.size() > cfg.shard_count)
    bad("tasks", "one sub-chain hosts one task; need tasks <= shards");
  std::vector<TaskId> ids;
  for (std::size_t i = 0; i < cfg.tasks.size(); ++i) {
    const TaskContract& t = cfg.tasks[i];
    const std::string key = "tasks[" + std::to_string(i) + "]";
    if (!(t.target_accuracy >= 0.0 && t.target_accuracy <= 1.0))
      bad(key + ".target_accuracy", "must lie in [0, 1]");
    if (t.max_rounds < 1) bad(key + ".max_rounds", "must be >= 1");
    if (!(t.reward_pool >= 0.0)) bad(key + ".reward_pool", "must be >= 0");
    if (t.loss != LossKind::LogisticBinary)
      bad(key + ".loss",
          "the update pipeline verifies claimed accuracy; tasks must be "
          "classification");
    if (t.param_dim != 0 && t.param_dim != cfg.data.dim + 1)
      bad(key + ".param_dim", "must equal data.dim + 1");
    if (t.required_data_type.empty())
      bad(key + ".required_data_type", "must be non-empty");
    else if (t.required_data_type != cfg.data.tag)
      bad(key + ".required_data_type", "no device produces data of this type");
    if (t.publisher.empty()) bad(key + ".publisher", "must be non-empty");
    ids.push_back(t.task_id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    bad("tasks", "task_id values must be unique");

  return diags;
}

void require_valid(const SimConfig& cfg) {
  const auto diags = validate_config(cfg);
  if (!diags.empty()) {
    const auto colon = diags.front().find(':');
    throw ConfigError(diags.front().substr(0, colon), diags.front());
  }
}

std::vector<Behavior> inject_adversaries(std::size_t device_count,
                                         const AdversaryMix& mix, Rng rng) {
  const auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!frac_ok(mix.label_flip) || !frac_ok(mix.free_rider) || !frac_ok(mix.lazy) ||
      mix.total() > 1.0 + 1e-12)
    throw ContractViolation("adversary fractions must be in [0,1] and sum to <= 1");

  // Largest-remainder rounding over the four behavior classes, honest last.
  const double fractions[4] = {mix.label_flip, mix.free_rider, mix.lazy,
                               std::max(0.0, 1.0 - mix.total())};
  std::size_t counts[4];
  double remainders[4];
  std::size_t assigned = 0;
  for (int c = 0; c < 4; ++c) {
    const double raw = fractions[c] * static_cast<double>(device_count);
    counts[c] = static_cast<std::size_t>(std::floor(raw));
    remainders[c] = raw - std::floor(raw);
    assigned += counts[c];
  }
  int order[4] = {0, 1, 2, 3};
  std::stable_sort(order, order + 4,
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  const std::size_t leftover = device_count - assigned;
  for (std::size_t i = 0; i < leftover; ++i) ++counts[order[i % 4]];

  std::vector<std::size_t> slots(device_count);
  for (std::size_t i = 0; i < device_count; ++i) slots[i] = i;
  rng.shuffle(slots);

  std::vector<Behavior> behaviors(device_count);
  std::size_t cursor = 0;
  const Behavior templates[4] = {
      {BehaviorKind::LabelFlip, mix.flip_fraction},
      {BehaviorKind::FreeRider, 0.0},
      {BehaviorKind::Lazy, mix.participation_probability},
      {BehaviorKind::Honest, 0.0},
  };
  for (int c = 0; c < 4; ++c)
    for (std::size_t k = 0; k < counts[c]; ++k)
      behaviors[slots[cursor++]] = templates[c];
  return behaviors;
}

Simulation::Simulation(SimConfig cfg)
    : cfg_(std::move(cfg)), root_(Rng::seeded(cfg_.seed)) {
  require_valid(cfg_);

  const auto behaviors =
      inject_adversaries(cfg_.device_count, cfg_.adversaries, root_.stream("adversaries"));

  devices_.reserve(cfg_.device_count);
  for (std::size_t i = 0; i < cfg_.device_count; ++i) {
    DeviceProfile dev;
    dev.id = static_cast<DeviceId>(i);
    dev.train_data = make_two_gaussian(cfg_.data.train_samples, cfg_.data.dim,
                                       cfg_.data.separation,
                                       root_.stream("data.train", i), cfg_.data.tag);
    dev.holdout = make_two_gaussian(cfg_.data.holdout_samples, cfg_.data.dim,
                                    cfg_.data.separation,
                                    root_.stream("data.holdout", i), cfg_.data.tag);
    dev.behavior = behaviors[i];
    if (dev.behavior.kind == BehaviorKind::LabelFlip) {
      // A poisoner's world is corrupted once, consistently: both what it
      // trains on and what it measures (and validates) against.
      dev.train_data = flip_labels(dev.train_data, dev.behavior.param,
                                   root_.stream("flip.train", i));
      dev.holdout = flip_labels(dev.holdout, dev.behavior.param,
                                root_.stream("flip.holdout", i));
    }
    devices_.push_back(std::move(dev));
  }

  assign_shards();
  for (std::size_t s = 0; s < cfg_.shard_count; ++s)
    sub_chains_.emplace_back(ChainTag::sub(static_cast<ShardId>(s)));

  // Step 1: publish each task to the best-matching shard without a task yet.
  std::set<ShardId> occupied;
  for (const TaskContract& contract : cfg_.tasks) {
    std::vector<ShardDescriptor> free_shards;
    for (const auto& [shard, members] : assignment_.shards) {
      if (occupied.count(shard)) continue;
      ShardDescriptor d;
      d.shard_id = shard;
      for (DeviceId dev : members)
        d.member_tags.push_back(devices_[dev].train_data.data_type_tag);
      free_shards.push_back(std::move(d));
    }
    TaskState state;
    state.contract = contract;
    if (state.contract.param_dim == 0) state.contract.param_dim = cfg_.data.dim + 1;
    state.shard = publish_task(state.contract, free_shards);
    occupied.insert(state.shard);
    state.eval = make_two_gaussian(cfg_.data.eval_samples, cfg_.data.dim,
                                   cfg_.data.separation,
                                   root_.stream("data.eval", contract.task_id),
                                   cfg_.data.tag);
    state.pool_remaining = contract.reward_pool;
    initial_pool_total_ += contract.reward_pool;
    global_params_[contract.task_id] = ModelParams::zeros(cfg_.data.dim + 1);
    state.accuracy = evaluate_accuracy(global_params_[contract.task_id], state.eval,
                                       LossKind::LogisticBinary);
    task_shards_[contract.task_id] = state.shard;
    tasks_.push_back(std::move(state));
  }

  for (const DeviceProfile& dev : devices_)
    opinions_[dev.id] = Opinion::vacuous(cfg_.reputation.base_rate);
}

void Simulation::assign_shards() {
  std::vector<DeviceId> ids(cfg_.device_count);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<DeviceId>(i);
  const Rng rng = root_.stream("assign", next_round_);
  switch (cfg_.strategy) {
    case Strategy::Random:
      assignment_ = assign_random(ids, cfg_.shard_count, rng);
      break;
    case Strategy::Reputation:
      assignment_ = assign_by_reputation(ids, opinions_, cfg_.shard_count, rng);
      break;
    case Strategy::Feature: {
      std::map<DeviceId, std::string> tags;
      for (const DeviceProfile& dev : devices_)
        tags[dev.id] = dev.train_data.data_type_tag;
      assignment_ = assign_by_feature(ids, tags, cfg_.shard_count, rng);
      break;
    }
  }
}

bool Simulation::is_eligible(DeviceId device) const {
  if (!cfg_.gating) return true;
  const auto it = opinions_.find(device);
  const Opinion o =
      it == opinions_.end() ? Opinion::vacuous(cfg_.reputation.base_rate) : it->second;
  return gate(o, cfg_.reputation) == GateDecision::Eligible;
}

void Simulation::refresh_opinions(Round now) {
  for (const DeviceProfile& dev : devices_) {
    const auto it = records_.find(dev.id);
    if (it == records_.end() || it->second.empty()) {
      opinions_[dev.id] = Opinion::vacuous(cfg_.reputation.base_rate);
      continue;
    }
    // Per-shard evidence first, then cumulative fusion across shards; with
    // fixed shards this reduces to the single-shard opinion.
    std::map<ShardId, std::vector<InteractionRecord>> by_shard;
    for (const InteractionRecord& rec : it->second)
      by_shard[rec.shard_id].push_back(rec);
    std::optional<Opinion> fused;
    for (const auto& [shard, recs] : by_shard) {
      const Evidence e = weighted_evidence(recs, now, cfg_.reputation);
      const Opinion o = opinion_from_evidence(e, cfg_.reputation);
      fused = fused ? fuse(*fused, o) : o;
    }
    opinions_[dev.id] = *fused;
  }
}

RoundMetrics Simulation::run_round() {
  const Round t = next_round_;
  if (cfg_.reshard_each_round && t > 0) assign_shards();

  std::map<DeviceId, std::uint32_t> committed_by_device;
  std::map<TaskId, std::uint32_t> committed_by_task;

  for (TaskState& task : tasks_) {
    committed_by_task[task.contract.task_id] = 0;
    if (task.done) continue;

    const auto& members = assignment_.shards.at(task.shard);
    std::vector<DeviceId> actors;
    for (DeviceId d : members)
      if (is_eligible(d)) actors.push_back(d);

    const TrainConfig train_cfg{cfg_.train.step_size, cfg_.train.epochs,
                                task.contract.loss};

    // Stage 1+2: local training and transaction submission.
    struct Pending {
      Proposal proposal;
      ModelParams params;
    };
    std::vector<Pending> pending;
    std::uint64_t seq = 0;
    for (DeviceId d : actors) {
      DeviceProfile& dev = devices_[d];

      if (dev.behavior.kind == BehaviorKind::Lazy) {
        const double draw = root_.stream("participate", t, d).next_unit();
        if (draw >= dev.behavior.param) {
          records_[d].push_back({d, task.shard, t, Outcome::Negative,
                                 Severity::Standard});
          continue;
        }
      }

      ModelParams trained;
      double claimed = 0.0;
      if (dev.behavior.kind == BehaviorKind::FreeRider) {
        Rng rng = root_.stream("freerider", t, d);
        trained = ModelParams::zeros(cfg_.data.dim + 1);
        for (double& w : trained.weights) w = rng.next_normal();
        claimed = task.contract.target_accuracy;
      } else {
        trained = local_train(global_params_.at(task.contract.task_id),
                              dev.train_data, train_cfg);
        claimed = evaluate_accuracy(trained, dev.holdout, task.contract.loss);
      }

      Pending p;
      p.params = trained;
      p.proposal.proposer = d;
      p.proposal.transaction = UpdateTransaction{
          task.shard,
          d,
          t,
          claimed,
          static_cast<std::uint64_t>(dev.train_data.size()),
          store_.put(serialize_params(trained)),
          seq++,
      };
      pending.push_back(std::move(p));
    }

    // Stage 3: shard peers validate, tally decides commitment.
    std::vector<UpdateTransaction> committed;
    std::vector<std::pair<ModelParams, std::size_t>> updates;
    for (const Pending& p : pending) {
      std::vector<Vote> votes;
      for (DeviceId v : actors) {
        if (v == p.proposal.proposer) continue;
        votes.push_back(validate_update(v, p.proposal, devices_[v].holdout,
                                        cfg_.tolerance, store_));
      }

      const bool is_committed =
          votes.empty() || tally(votes, actors.size() - 1) == TallyOutcome::Committed;

      // Stage 4 evidence: reward a commit; blame the proposer for an abort
      // only when a strict majority of the panel rejected it (a contested
      // abort cannot be attributed under Byzantine validators).
      if (is_committed) {
        records_[p.proposal.proposer].push_back(
            {p.proposal.proposer, task.shard, t, Outcome::Positive,
             Severity::Standard});
        committed.push_back(p.proposal.transaction);
        updates.emplace_back(p.params, p.proposal.transaction.sample_count);
        committed_by_device[p.proposal.proposer] += 1;
        committed_by_task[task.contract.task_id] += 1;
      } else {
        std::size_t rejects = 0, inflated = 0, missing = 0;
        for (const Vote& v : votes) {
          if (v.verdict != Verdict::Reject) continue;
          ++rejects;
          if (v.reason == VoteReason::AccuracyInflated) ++inflated;
          if (v.reason == VoteReason::PayloadMissing) ++missing;
        }
        if (2 * rejects > votes.size()) {
          const Severity severity = inflated >= missing && inflated >= rejects - inflated - missing
                                        ? Severity::Severe
                                        : Severity::Standard;
          records_[p.proposal.proposer].push_back(
              {p.proposal.proposer, task.shard, t, Outcome::Negative, severity});
        }
      }
    }

    if (!committed.empty()) {
      append_block(sub_chains_[task.shard], committed, t, store_);
      global_params_[task.contract.task_id] =
          aggregate(std::span<const std::pair<ModelParams, std::size_t>>(updates));
      if (cfg_.promote_each_round)
        promote_round(main_chain_, sub_chains_[task.shard], t, store_);
    }

    task.accuracy = evaluate_accuracy(global_params_.at(task.contract.task_id),
                                      task.eval, LossKind::LogisticBinary);
    if (task.accuracy >= task.contract.target_accuracy ||
        t + 1 >= task.contract.max_rounds)
      task.done = true;
  }

  // Barrier: opinions only move after every shard finished the round.
  refresh_opinions(t);

  const bool final_round = all_tasks_done() || t + 1 >= cfg_.rounds;
  if (final_round) settle_all();

  RoundMetrics metrics;
  metrics.round = t;
  for (const TaskState& task : tasks_)
    metrics.tasks.push_back({t, task.contract.task_id, task.shard,
                             committed_by_task.at(task.contract.task_id),
                             task.accuracy});
  std::map<DeviceId, ShardId> device_shard;
  for (const auto& [shard, devs] : assignment_.shards)
    for (DeviceId d : devs) device_shard[d] = shard;
  for (const DeviceProfile& dev : devices_) {
    const Opinion& o = opinions_.at(dev.id);
    DeviceRoundRow row;
    row.round = t;
    row.device = dev.id;
    row.shard = device_shard.at(dev.id);
    row.opinion = o;
    row.expected = expected_reputation(o);
    row.eligible = gate(o, cfg_.reputation) == GateDecision::Eligible;
    const auto it = committed_by_device.find(dev.id);
    row.committed = it == committed_by_device.end() ? 0 : it->second;
    row.credits = credits_.device_balance(dev.id);
    metrics.devices.push_back(row);
  }

  ++next_round_;
  history_.push_back(metrics);
  return metrics;
}

bool Simulation::all_tasks_done() const {
  return std::all_of(tasks_.begin(), tasks_.end(),
                     [](const TaskState& t) { return t.done; });
}

void Simulation::settle_all() {
  if (settled_) return;
  settled_ = true;
  const Round promote_at = next_round_;
  for (TaskState& task : tasks_) {
    const Chain& sub = sub_chains_[task.shard];
    if (!cfg_.promote_each_round && !sub.empty())
      promote_final(main_chain_, sub, promote_at, store_);

    std::vector<UpdateTransaction> committed;
    for (const Block& b : sub.blocks())
      committed.insert(committed.end(), b.transactions.begin(),
                       b.transactions.end());

    TaskContract settle_contract = task.contract;
    settle_contract.reward_pool = task.pool_remaining;
    credits_ = settle_rewards(settle_contract, committed, opinions_, credits_,
                              cfg_.reputation);
    task.pool_remaining = 0.0;
  }
}

SimResult Simulation::take_result() && {
  SimResult result;
  result.rounds = std::move(history_);
  result.main_chain = std::move(main_chain_);
  result.sub_chains = std::move(sub_chains_);
  result.store = std::move(store_);
  result.credits = std::move(credits_);
  result.opinions = std::move(opinions_);
  result.task_shards = task_shards_;
  for (const TaskState& task : tasks_)
    result.final_accuracy[task.contract.task_id] = task.accuracy;
  result.rounds_executed = next_round_;
  return result;
}

SimResult run_simulation(const SimConfig& cfg) {
  Simulation sim(cfg);
  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    sim.run_round();
    if (sim.all_tasks_done()) break;
  }
  return std::move(sim).take_result();
}

}  // namespace srbfl
