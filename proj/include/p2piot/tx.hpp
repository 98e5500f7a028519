#pragma once

#include "p2piot/codec.hpp"
#include "p2piot/crypto.hpp"

// Signed, typed ledger entries. The signature and the tx id both cover the
// canonical encoding of (channel, sender key, payload, nonce, timestamp);
// the display name is excluded so relabeling a peer cannot change history.

namespace p2piot {

enum class Channel : uint8_t {
    Payment = 1,
    Identity = 2,
    Rating = 3,
    Records = 4,
    AppSpecific = 5,
};

inline const char* channel_name(Channel c) {
    switch (c) {
        case Channel::Payment: return "payment";
        case Channel::Identity: return "identity";
        case Channel::Rating: return "rating";
        case Channel::Records: return "records";
        case Channel::AppSpecific: return "app";
    }
    return "?";
}

struct Transaction {
    Channel channel = Channel::Payment;
    PeerId sender;
    Bytes payload;
    uint64_t nonce = 0;
    uint64_t timestamp = 0;  // simulated clock, milliseconds
    Sig64 signature{};
    Key32 tx_id{};
};

inline Bytes tx_signing_bytes(const Transaction& tx) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(tx.channel));
    w.fixed(tx.sender.key);
    w.var(tx.payload);
    w.u64(tx.nonce);
    w.u64(tx.timestamp);
    return w.take();
}

inline Key32 compute_tx_id(const Transaction& tx) { return sha256(tx_signing_bytes(tx)); }

enum class TxError { KeyMismatch };

inline Expected<Transaction, TxError> sign_transaction(Transaction unsigned_tx, const Keypair& key) {
    if (key.public_key != unsigned_tx.sender.key) return TxError::KeyMismatch;
    Bytes msg = tx_signing_bytes(unsigned_tx);
    unsigned_tx.signature = sign_detached(msg, key);
    unsigned_tx.tx_id = sha256(msg);
    return unsigned_tx;
}

// True iff the signature verifies against the sender key and the tx id
// recomputes from the content. False for anything malformed.
inline bool verify_transaction(const Transaction& tx) {
    Bytes msg = tx_signing_bytes(tx);
    if (sha256(msg) != tx.tx_id) return false;
    return verify_detached(msg, tx.signature, tx.sender.key);
}

// Full wire/disk encoding: signing fields followed by signature and id.
inline void encode_transaction(ByteWriter& w, const Transaction& tx) {
    w.u8(static_cast<uint8_t>(tx.channel));
    w.fixed(tx.sender.key);
    w.var(tx.payload);
    w.u64(tx.nonce);
    w.u64(tx.timestamp);
    w.fixed(tx.signature);
    w.fixed(tx.tx_id);
}

inline Bytes encode_transaction(const Transaction& tx) {
    ByteWriter w;
    encode_transaction(w, tx);
    return w.take();
}

inline std::optional<Transaction> decode_transaction(ByteReader& r) {
    auto channel = r.u8();
    auto sender = r.fixed<32>();
    auto payload = r.var();
    auto nonce = r.u64();
    auto ts = r.u64();
    auto sig = r.fixed<64>();
    auto id = r.fixed<32>();
    if (!channel || !sender || !payload || !nonce || !ts || !sig || !id) return std::nullopt;
    if (*channel < 1 || *channel > 5) return std::nullopt;
    Transaction tx;
    tx.channel = static_cast<Channel>(*channel);
    tx.sender = PeerId{*sender, {}};
    tx.payload = std::move(*payload);
    tx.nonce = *nonce;
    tx.timestamp = *ts;
    tx.signature = *sig;
    tx.tx_id = *id;
    return tx;
}

}  // namespace p2piot
