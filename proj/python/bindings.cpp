#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "srbfl/io.hpp"
#include "srbfl/sha256.hpp"

namespace py = pybind11;
using namespace srbfl;

namespace {

Dataset dataset_from(const std::vector<std::vector<double>>& features,
                     const std::vector<double>& labels, const std::string& tag) {
  Dataset d{features, labels, tag};
  check_dataset(d);
  return d;
}

LossKind loss_from(const std::string& s) {
  if (s == "logistic") return LossKind::LogisticBinary;
  if (s == "squared") return LossKind::SquaredError;
  throw ContractViolation("loss must be 'logistic' or 'squared'");
}

py::dict opinion_dict(const Opinion& o) {
  py::dict d;
  d["belief"] = o.belief;
  d["disbelief"] = o.disbelief;
  d["uncertainty"] = o.uncertainty;
  d["base_rate"] = o.base_rate;
  d["expected"] = expected_reputation(o);
  return d;
}

}  // namespace

PYBIND11_MODULE(_srbfl, m) {
  m.doc() = "Sharded blockchain federated-learning simulator (C++ core)";
  m.attr("__version__") = SRBFL_VERSION;

  py::register_exception<Error>(m, "SrbflError");

  // fl_core ---------------------------------------------------------------
  m.def(
      "local_loss",
      [](const std::vector<double>& weights,
         const std::vector<std::vector<double>>& features,
         const std::vector<double>& labels, const std::string& loss) {
        return local_loss(ModelParams{weights}, dataset_from(features, labels, ""),
                          loss_from(loss));
      },
      py::arg("weights"), py::arg("features"), py::arg("labels"),
      py::arg("loss") = "logistic",
      "Sum of per-sample losses of a linear/logistic model over a dataset");

  m.def(
      "global_loss",
      [](const std::vector<double>& weights,
         const std::vector<std::pair<std::vector<std::vector<double>>,
                                     std::vector<double>>>& datasets,
         const std::string& loss) {
        std::vector<Dataset> ds;
        for (const auto& [features, labels] : datasets)
          ds.push_back(dataset_from(features, labels, ""));
        return global_loss(ModelParams{weights}, ds, loss_from(loss));
      },
      py::arg("weights"), py::arg("datasets"), py::arg("loss") = "logistic",
      "Data-size-weighted global objective over device datasets");

  m.def(
      "local_gradient",
      [](const std::vector<double>& weights,
         const std::vector<std::vector<double>>& features,
         const std::vector<double>& labels, const std::string& loss) {
        return local_gradient(ModelParams{weights},
                              dataset_from(features, labels, ""), loss_from(loss));
      },
      py::arg("weights"), py::arg("features"), py::arg("labels"),
      py::arg("loss") = "logistic");

  m.def(
      "local_train",
      [](const std::vector<double>& start,
         const std::vector<std::vector<double>>& features,
         const std::vector<double>& labels, double step_size, std::size_t epochs,
         const std::string& loss) {
        return local_train(ModelParams{start}, dataset_from(features, labels, ""),
                           TrainConfig{step_size, epochs, loss_from(loss)})
            .weights;
      },
      py::arg("start"), py::arg("features"), py::arg("labels"),
      py::arg("step_size"), py::arg("epochs"), py::arg("loss") = "logistic",
      "Deterministic full-batch gradient descent");

  m.def(
      "aggregate",
      [](const std::vector<std::pair<std::vector<double>, std::size_t>>& updates) {
        std::vector<std::pair<ModelParams, std::size_t>> u;
        for (const auto& [w, n] : updates) u.emplace_back(ModelParams{w}, n);
        return aggregate(u).weights;
      },
      py::arg("updates"), "Sample-size-weighted average of (weights, count) pairs");

  m.def(
      "evaluate_accuracy",
      [](const std::vector<double>& weights,
         const std::vector<std::vector<double>>& features,
         const std::vector<double>& labels) {
        return evaluate_accuracy(ModelParams{weights},
                                 dataset_from(features, labels, ""),
                                 LossKind::LogisticBinary);
      },
      py::arg("weights"), py::arg("features"), py::arg("labels"));

  // reputation ------------------------------------------------------------
  m.def(
      "opinion_from_evidence",
      [](double positive, double negative, double prior_weight, double base_rate) {
        ReputationParams p;
        p.prior_weight = prior_weight;
        p.base_rate = base_rate;
        return opinion_dict(opinion_from_evidence(positive, negative, p));
      },
      py::arg("positive"), py::arg("negative"), py::arg("prior_weight") = 2.0,
      py::arg("base_rate") = 0.5);

  m.def(
      "fuse",
      [](double b1, double d1, double u1, double b2, double d2, double u2,
         double base_rate) {
        return opinion_dict(fuse(Opinion{b1, d1, u1, base_rate},
                                 Opinion{b2, d2, u2, base_rate}));
      },
      py::arg("b1"), py::arg("d1"), py::arg("u1"), py::arg("b2"), py::arg("d2"),
      py::arg("u2"), py::arg("base_rate") = 0.5,
      "Cumulative fusion of two opinions");

  m.def(
      "expected_reputation",
      [](double b, double d, double u, double base_rate) {
        return expected_reputation(Opinion{b, d, u, base_rate});
      },
      py::arg("b"), py::arg("d"), py::arg("u"), py::arg("base_rate") = 0.5);

  // consensus ---------------------------------------------------------------
  m.def("quorum_threshold",
        [](std::size_t n) { return quorum_threshold(n); },
        py::arg("shard_size"), "ceil(2n/3)");

  m.def(
      "tally",
      [](const std::vector<bool>& approvals, std::size_t shard_size) {
        std::vector<Vote> votes;
        DeviceId v = 0;
        for (bool approve : approvals) {
          Vote vote;
          vote.validator = v++;
          vote.verdict = approve ? Verdict::Approve : Verdict::Reject;
          vote.reason = approve ? VoteReason::AccuracyVerified
                                : VoteReason::AccuracyInflated;
          votes.push_back(vote);
        }
        return tally(votes, shard_size) == TallyOutcome::Committed;
      },
      py::arg("approvals"), py::arg("shard_size"),
      "True iff the approvals meet the ceil(2n/3) quorum");

  // ledger ------------------------------------------------------------------
  m.def(
      "sha256_hex",
      [](const py::bytes& data) {
        const std::string s = data;
        return to_hex(sha256(s));
      },
      py::arg("data"));

  m.def(
      "verify_chain",
      [](const std::filesystem::path& chain_path,
         const std::filesystem::path& offchain_dir) {
        const Chain chain = load_chain(chain_path);
        const OffChainStore store = load_offchain_dir(offchain_dir);
        const ChainVerification v = verify_chain(chain, store);
        py::dict out;
        out["ok"] = v.ok;
        out["block_height"] = v.block_height;
        out["reason"] = v.reason;
        return out;
      },
      py::arg("chain_path"), py::arg("offchain_dir"),
      "Verify a chain export against its off-chain payload directory");

  // sim ---------------------------------------------------------------------
  m.def(
      "validate_config",
      [](const std::string& config_json) {
        return validate_config(parse_config_json(config_json));
      },
      py::arg("config_json"), "Diagnostics for a config (empty when valid)");

  m.def(
      "run_simulation",
      [](const std::string& config_json, const std::optional<std::string>& out_dir) {
        SimConfig cfg = parse_config_json(config_json);
        require_valid(cfg);
        const SimResult result = run_simulation(cfg);
        if (out_dir) write_run_outputs(*out_dir, cfg, result);
        py::dict out;
        out["rounds_executed"] = result.rounds_executed;
        out["main_chain_head"] = to_hex(result.main_chain.head_digest());
        py::dict acc;
        for (const auto& [task, a] : result.final_accuracy)
          acc[py::int_(task)] = a;
        out["final_accuracy"] = acc;
        py::dict credits;
        for (const auto& [dev, bal] : result.credits.device_balances)
          credits[py::int_(dev)] = bal;
        out["credits"] = credits;
        py::dict reputation;
        for (const auto& [dev, o] : result.opinions)
          reputation[py::int_(dev)] = opinion_dict(o);
        out["reputation"] = reputation;
        return out;
      },
      py::arg("config_json"), py::arg("out_dir") = std::nullopt,
      "Run a simulation from a JSON config string; optionally export outputs");
}
