#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "srbfl/bytes.hpp"

namespace srbfl {

using DeviceId = std::uint32_t;
using ShardId = std::uint32_t;
using Round = std::uint64_t;

// One device's model-update submission: on-chain metadata; the raw
// parameter bytes live in the off-chain store under payload_digest.
struct UpdateTransaction {
  ShardId shard_id = 0;
  DeviceId device_id = 0;
  Round round = 0;
  double claimed_accuracy = 0.0;  // in [0, 1]
  std::uint64_t sample_count = 1;
  Digest payload_digest{};
  std::uint64_t submitted_at = 0;  // round-scoped sequence number
};

void check_transaction(const UpdateTransaction& tx);

// Canonical digest of a transaction (layout in docs/FORMATS.md).
Digest hash_transaction(const UpdateTransaction& tx);

// Digest over the ordered transaction digests of a block.
Digest compute_tx_root(std::span<const UpdateTransaction> txs);

struct ChainTag {
  enum class Kind : std::uint8_t { Main = 0, Sub = 1 };
  Kind kind = Kind::Main;
  ShardId shard = 0;  // meaningful only for Sub

  static ChainTag main() { return ChainTag{Kind::Main, 0}; }
  static ChainTag sub(ShardId s) { return ChainTag{Kind::Sub, s}; }
  bool operator==(const ChainTag&) const = default;
  std::string str() const;
};

struct BlockHeader {
  std::uint64_t height = 0;
  Digest prev_hash{};  // all zeros for genesis
  Digest tx_root{};
  ChainTag chain_tag;
  Round round = 0;
};

Digest hash_header(const BlockHeader& header);

struct Block {
  BlockHeader header;
  std::vector<UpdateTransaction> transactions;
};

// Content-addressed payload store: digest = SHA-256(payload). Retrieval
// re-hashes so silent corruption surfaces as IntegrityError.
class OffChainStore {
 public:
  enum class PayloadState { Ok, Missing, Corrupt };

  // Stores payload under its SHA-256; idempotent. Empty payload rejected.
  Digest put(Bytes payload);

  bool contains(const Digest& d) const { return entries_.count(d) != 0; }
  PayloadState state(const Digest& d) const;

  // Integrity-checked copy; throws DanglingPayload / IntegrityError.
  Bytes get(const Digest& d) const;

  std::size_t size() const { return entries_.size(); }

  // Direct access for export and for tamper tests.
  std::unordered_map<Digest, Bytes, DigestHash>& raw() { return entries_; }
  const std::unordered_map<Digest, Bytes, DigestHash>& raw() const { return entries_; }

 private:
  std::unordered_map<Digest, Bytes, DigestHash> entries_;
};

struct ChainVerification {
  bool ok = true;
  std::uint64_t block_height = 0;  // first violating block when !ok
  std::string reason;

  explicit operator bool() const { return ok; }
};

// Append-only hash-linked block sequence. head_digest() anchors the final
// header so verify_chain catches mutations anywhere, including the tip.
class Chain {
 public:
  explicit Chain(ChainTag tag = ChainTag::main()) : tag_(tag) {}

  const ChainTag& tag() const { return tag_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }
  std::size_t height() const { return blocks_.size(); }
  const Digest& head_digest() const { return head_digest_; }

  // For rebuilding a chain from an export; takes the blocks as-is.
  static Chain restore(ChainTag tag, std::vector<Block> blocks, Digest head);

  // Tamper tests reach in through these.
  std::vector<Block>& mutable_blocks() { return blocks_; }
  Digest& mutable_head() { return head_digest_; }

 private:
  friend Block append_block(Chain& chain, std::vector<UpdateTransaction> txs,
                            Round round, const OffChainStore& store);

  ChainTag tag_;
  std::vector<Block> blocks_;
  Digest head_digest_ = kZeroDigest;
};

// Builds the next block (height/prev_hash/tx_root filled in), appends it and
// returns it. Every transaction's payload must resolve in `store`.
Block append_block(Chain& chain, std::vector<UpdateTransaction> txs, Round round,
                   const OffChainStore& store);

// True iff every linkage, height, tx_root, head-anchor and off-chain digest
// invariant holds; on failure reports the first violation.
ChainVerification verify_chain(const Chain& chain, const OffChainStore& store);

// Selects the committed transaction with the highest claimed accuracy
// (ties: lowest device_id, then earliest round), wraps it in a main-chain
// block at `round` and returns it.
UpdateTransaction promote_final(Chain& main, const Chain& sub, Round round,
                                const OffChainStore& store);

// Same selection rule restricted to transactions of one round; used by the
// per-round promotion config flag. Returns false if that round is empty.
bool promote_round(Chain& main, const Chain& sub, Round round,
                   const OffChainStore& store);

}  // namespace srbfl
