#pragma once

#include <algorithm>

#include "p2piot/tx.hpp"

namespace p2piot {

// Hash-chained block. block_hash covers height, prev_hash and the tx ids;
// the committer quorum is consensus metadata, not hashed content.
struct Block {
    uint64_t height = 0;
    Key32 prev_hash{};
    std::vector<Transaction> txs;
    Key32 block_hash{};
    std::vector<Key32> committer_quorum;  // sorted; empty in single-authority mode
};

inline Key32 compute_block_hash(uint64_t height, const Key32& prev_hash,
                                const std::vector<Transaction>& txs) {
    ByteWriter w;
    w.u64(height);
    w.fixed(prev_hash);
    for (const auto& tx : txs) w.fixed(tx.tx_id);
    return sha256(w.bytes());
}

inline Block make_genesis() {
    Block g;
    g.height = 0;
    g.prev_hash = kZeroKey;
    g.block_hash = compute_block_hash(0, kZeroKey, {});
    return g;
}

inline void encode_block(ByteWriter& w, const Block& b) {
    w.u64(b.height);
    w.fixed(b.prev_hash);
    w.u32(static_cast<uint32_t>(b.txs.size()));
    for (const auto& tx : b.txs) encode_transaction(w, tx);
    w.u32(static_cast<uint32_t>(b.committer_quorum.size()));
    for (const auto& k : b.committer_quorum) w.fixed(k);
    w.fixed(b.block_hash);
}

inline std::optional<Block> decode_block(ByteReader& r) {
    Block b;
    auto height = r.u64();
    auto prev = r.fixed<32>();
    auto n_tx = r.u32();
    if (!height || !prev || !n_tx || *n_tx > 100000) return std::nullopt;
    b.height = *height;
    b.prev_hash = *prev;
    b.txs.reserve(*n_tx);
    for (uint32_t i = 0; i < *n_tx; ++i) {
        auto tx = decode_transaction(r);
        if (!tx) return std::nullopt;
        b.txs.push_back(std::move(*tx));
    }
    auto n_q = r.u32();
    if (!n_q || *n_q > 100000) return std::nullopt;
    for (uint32_t i = 0; i < *n_q; ++i) {
        auto k = r.fixed<32>();
        if (!k) return std::nullopt;
        b.committer_quorum.push_back(*k);
    }
    auto hash = r.fixed<32>();
    if (!hash) return std::nullopt;
    b.block_hash = *hash;
    return b;
}

// Serialized bytes of a whole chain, used for byte-identity checks.
inline Bytes chain_bytes(const std::vector<Block>& chain) {
    ByteWriter w;
    for (const auto& b : chain) encode_block(w, b);
    return w.take();
}

}  // namespace p2piot
