#include "srbfl/ledger.hpp"

#include <algorithm>

#include "srbfl/errors.hpp"
#include "srbfl/sha256.hpp"

namespace srbfl {

void check_transaction(const UpdateTransaction& tx) {
  if (!(tx.claimed_accuracy >= 0.0 && tx.claimed_accuracy <= 1.0))
    throw ContractViolation("claimed_accuracy must lie in [0, 1]");
  if (tx.sample_count < 1)
    throw ContractViolation("sample_count must be >= 1");
}

std::string ChainTag::str() const {
  return kind == Kind::Main ? "main" : "sub:" + std::to_string(shard);
}

Digest hash_transaction(const UpdateTransaction& tx) {
  ByteWriter w;
  w.u32(tx.shard_id);
  w.u32(tx.device_id);
  w.u64(tx.round);
  w.f64(tx.claimed_accuracy);
  w.u64(tx.sample_count);
  w.digest(tx.payload_digest);
  w.u64(tx.submitted_at);
  return sha256(w.bytes());
}

Digest compute_tx_root(std::span<const UpdateTransaction> txs) {
  ByteWriter w;
  for (const auto& tx : txs) w.digest(hash_transaction(tx));
  return sha256(w.bytes());
}

Digest hash_header(const BlockHeader& header) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(header.chain_tag.kind));
  w.u32(header.chain_tag.kind == ChainTag::Kind::Sub ? header.chain_tag.shard : 0);
  w.u64(header.height);
  w.u64(header.round);
  w.digest(header.prev_hash);
  w.digest(header.tx_root);
  return sha256(w.bytes());
}

Digest OffChainStore::put(Bytes payload) {
  if (payload.empty())
    throw ContractViolation("off-chain payload must be non-empty");
  const Digest d = sha256(payload);
  entries_.emplace(d, std::move(payload));
  return d;
}

OffChainStore::PayloadState OffChainStore::state(const Digest& d) const {
  const auto it = entries_.find(d);
  if (it == entries_.end()) return PayloadState::Missing;
  return sha256(it->second) == d ? PayloadState::Ok : PayloadState::Corrupt;
}

Bytes OffChainStore::get(const Digest& d) const {
  const auto it = entries_.find(d);
  if (it == entries_.end())
    throw DanglingPayload("payload digest " + to_hex(d) + " not in store");
  if (sha256(it->second) != d)
    throw IntegrityError("payload bytes for " + to_hex(d) +
                         " no longer match their digest");
  return it->second;
}

Chain Chain::restore(ChainTag tag, std::vector<Block> blocks, Digest head) {
  Chain chain(tag);
  chain.blocks_ = std::move(blocks);
  chain.head_digest_ = head;
  return chain;
}

Block append_block(Chain& chain, std::vector<UpdateTransaction> txs, Round round,
                   const OffChainStore& store) {
  for (const auto& tx : txs) {
    check_transaction(tx);
    if (store.state(tx.payload_digest) != OffChainStore::PayloadState::Ok)
      throw DanglingPayload("transaction from device " +
                            std::to_string(tx.device_id) +
                            " references unresolvable payload " +
                            to_hex(tx.payload_digest));
  }
  Block block;
  block.header.height = chain.blocks_.size();
  block.header.prev_hash =
      chain.blocks_.empty() ? kZeroDigest : hash_header(chain.blocks_.back().header);
  block.header.tx_root = compute_tx_root(txs);
  block.header.chain_tag = chain.tag_;
  block.header.round = round;
  block.transactions = std::move(txs);
  chain.blocks_.push_back(block);
  chain.head_digest_ = hash_header(block.header);
  return block;
}

ChainVerification verify_chain(const Chain& chain, const OffChainStore& store) {
  const auto fail = [](std::uint64_t height, std::string reason) {
    return ChainVerification{false, height, std::move(reason)};
  };

  if (chain.empty()) {
    if (chain.head_digest() != kZeroDigest)
      return fail(0, "empty chain must have a zero head digest");
    return {};
  }

  const auto& blocks = chain.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (b.header.height != i)
      return fail(i, "height " + std::to_string(b.header.height) +
                         " at position " + std::to_string(i));
    if (!(b.header.chain_tag == chain.tag()))
      return fail(i, "block tagged " + b.header.chain_tag.str() +
                         " on chain " + chain.tag().str());
    const Digest expected_prev =
        i == 0 ? kZeroDigest : hash_header(blocks[i - 1].header);
    if (b.header.prev_hash != expected_prev)
      return fail(i, i == 0 ? "genesis prev_hash is not zero"
                            : "prev_hash does not match previous header");
    if (compute_tx_root(b.transactions) != b.header.tx_root)
      return fail(i, "tx_root does not match transactions");
    for (const auto& tx : b.transactions) {
      if (!(tx.claimed_accuracy >= 0.0 && tx.claimed_accuracy <= 1.0) ||
          tx.sample_count < 1)
        return fail(i, "transaction metadata out of range");
      switch (store.state(tx.payload_digest)) {
        case OffChainStore::PayloadState::Ok:
          break;
        case OffChainStore::PayloadState::Missing:
          return fail(i, "payload " + to_hex(tx.payload_digest) + " missing");
        case OffChainStore::PayloadState::Corrupt:
          return fail(i, "payload " + to_hex(tx.payload_digest) + " corrupt");
      }
    }
  }
  if (hash_header(blocks.back().header) != chain.head_digest())
    return fail(blocks.size() - 1, "head digest does not match final header");
  return {};
}

namespace {

// Promotion order: accuracy desc, then device_id asc, then round asc.
bool promotes_over(const UpdateTransaction& a, const UpdateTransaction& b) {
  if (a.claimed_accuracy != b.claimed_accuracy)
    return a.claimed_accuracy > b.claimed_accuracy;
  if (a.device_id != b.device_id) return a.device_id < b.device_id;
  return a.round < b.round;
}

const UpdateTransaction* best_transaction(const Chain& sub,
                                          const Round* only_round) {
  const UpdateTransaction* best = nullptr;
  for (const Block& block : sub.blocks()) {
    for (const UpdateTransaction& tx : block.transactions) {
      if (only_round && tx.round != *only_round) continue;
      if (!best || promotes_over(tx, *best)) best = &tx;
    }
  }
  return best;
}

}  // namespace

UpdateTransaction promote_final(Chain& main, const Chain& sub, Round round,
                                const OffChainStore& store) {
  const UpdateTransaction* best = best_transaction(sub, nullptr);
  if (!best)
    throw NothingToPromote("sub-chain " + sub.tag().str() +
                           " has no committed transactions");
  append_block(main, {*best}, round, store);
  return *best;
}

bool promote_round(Chain& main, const Chain& sub, Round round,
                   const OffChainStore& store) {
  const UpdateTransaction* best = best_transaction(sub, &round);
  if (!best) return false;
  append_block(main, {*best}, round, store);
  return true;
}

}  // namespace srbfl
