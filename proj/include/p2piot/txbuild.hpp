#pragma once

#include "p2piot/payload.hpp"

// Builders for every transaction-producing operation. A TxAuthor owns a
// keypair plus the per-sender nonce counter and stamps the simulated
// clock; gateways use delegate() to wrap intents from devices that
// cannot sign.

namespace p2piot {

class TxAuthor {
public:
    TxAuthor() = default;
    TxAuthor(Keypair kp, std::string name = {}) : kp_(kp), name_(std::move(name)) {}

    const Keypair& keypair() const { return kp_; }
    const Key32& key() const { return kp_.public_key; }
    PeerId peer_id() const { return kp_.id(name_); }
    uint64_t next_nonce() const { return next_nonce_; }

    void set_clock(uint64_t now_ms) { now_ms_ = now_ms; }
    uint64_t clock() const { return now_ms_; }

    Transaction build(Channel channel, Bytes payload) {
        Transaction tx;
        tx.channel = channel;
        tx.sender = peer_id();
        tx.payload = std::move(payload);
        tx.nonce = next_nonce_++;
        tx.timestamp = now_ms_;
        auto signed_tx = sign_transaction(std::move(tx), kp_);
        // sender always matches our own key here
        return signed_tx.value();
    }

    Transaction mint(const Key32& to, uint64_t amount) {
        return build(Channel::Payment, encode_payload(MintPay{to, amount}));
    }

    Transaction transfer(const Key32& to, uint64_t amount, Bytes memo = {}) {
        if (memo.size() > TransferPay::kMaxMemo)
            throw std::invalid_argument("memo exceeds 64 bytes");
        return build(Channel::Payment, encode_payload(TransferPay{to, amount, std::move(memo)}));
    }

    Transaction register_identity(Role role, Bytes metadata = {}) {
        if (metadata.size() > RegisterIdent::kMaxMetadata)
            throw std::invalid_argument("metadata exceeds 256 bytes");
        return build(Channel::Identity, encode_payload(RegisterIdent{role, std::move(metadata)}));
    }

    Transaction submit_rating(const Key32& subject, uint8_t score, const Key32& tx_ref) {
        return build(Channel::Rating, encode_payload(RatePeer{subject, score, tx_ref}));
    }

    Transaction record_event(RecordKind kind, const Key32& party_a, const Key32& party_b,
                             Bytes reference) {
        return build(Channel::Records,
                     encode_payload(RecordPay{kind, party_a, party_b, std::move(reference)}));
    }

    Transaction open_escrow(const Key32& escrow_id, const Key32& seller, const Key32& buyer,
                            uint64_t price, uint64_t deposit, uint64_t deadline) {
        return build(Channel::AppSpecific,
                     encode_payload(EscrowOpenPay{escrow_id, seller, buyer, price, deposit,
                                                  deadline}));
    }

    Transaction escrow_act(EscrowAction action, const Key32& escrow_id) {
        return build(Channel::AppSpecific, encode_payload(EscrowActPay{action, escrow_id}));
    }

    Transaction fund_escrow(const Key32& id) { return escrow_act(EscrowAction::Fund, id); }
    Transaction confirm_delivery(const Key32& id) {
        return escrow_act(EscrowAction::ConfirmDelivery, id);
    }
    Transaction settle_escrow(const Key32& id) { return escrow_act(EscrowAction::Settle, id); }
    Transaction dispute_escrow(const Key32& id) { return escrow_act(EscrowAction::Dispute, id); }
    Transaction expire_escrow(const Key32& id) { return escrow_act(EscrowAction::Expire, id); }

    Transaction post_product(const MarketPostPay& listing) {
        return build(Channel::AppSpecific, encode_payload(listing));
    }

    Transaction retire_product(const Key32& product_id) {
        return build(Channel::AppSpecific, encode_payload(MarketRetirePay{product_id}));
    }

    // Gateway delegation: wraps a constrained device's intent. The gateway
    // signs and pays the fee; replay attributes the effects to the origin.
    Transaction delegate(Channel channel, const Key32& origin, Bytes inner_payload) {
        return build(channel, encode_payload(DelegatedPay{origin, std::move(inner_payload)}));
    }

private:
    Keypair kp_;
    std::string name_;
    uint64_t next_nonce_ = 1;
    uint64_t now_ms_ = 0;
};

}  // namespace p2piot
