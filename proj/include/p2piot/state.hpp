#pragma once

#include <map>

#include "p2piot/escrow.hpp"
#include "p2piot/ledger.hpp"

// Deterministic platform services derived by replaying the committed
// chain: wallets, identity registry, reputation, audit records, escrows
// and marketplace listings. Commit proves authenticity; replay judges
// feasibility. Transactions that are invalid at application time are
// skipped with a logged rejection and never abort the replay.

namespace p2piot {

struct IdentityRecord {
    Key32 peer{};
    Role role = Role::Device;
    Bytes metadata;
    uint64_t registered_at = 0;

    friend bool operator==(const IdentityRecord&, const IdentityRecord&) = default;
};

struct Rating {
    Key32 rater{};
    uint8_t score = 0;
    Key32 tx_ref{};

    friend bool operator==(const Rating&, const Rating&) = default;
};

struct ReputationRecord {
    Key32 subject{};
    std::vector<Rating> ratings;
    bool banned = false;  // monotone: once true, never false

    friend bool operator==(const ReputationRecord&, const ReputationRecord&) = default;
};

struct RecordEntry {
    RecordKind kind = RecordKind::Order;
    Key32 party_a{};
    Key32 party_b{};
    Bytes reference;
    Key32 tx_id{};  // anchoring transaction
    uint64_t height = 0;

    bool involves(const Key32& k) const { return party_a == k || party_b == k; }

    friend bool operator==(const RecordEntry&, const RecordEntry&) = default;
};

struct DataProduct {
    Key32 product_id{};
    Key32 seller{};
    std::string topic;
    Bytes description;
    uint64_t price_per_record = 0;
    Delivery delivery = Delivery::SdppStream;
    Bytes endpoint;
    bool active = true;

    friend bool operator==(const DataProduct&, const DataProduct&) = default;
};

struct Rejection {
    uint64_t height = 0;
    Key32 tx_id{};
    std::string reason;

    friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct ReplayConfig {
    Key32 authority{};
    uint64_t fee = 0;
    std::string currency_label = "TOK";
    // Ban rule: mean score < ban_mean_x100/100 with at least ban_min_count
    // accepted ratings. Integer arithmetic; defaults mean < 2.00, count >= 5.
    uint64_t ban_mean_x100 = 200;
    uint64_t ban_min_count = 5;

    static ReplayConfig from_ledger(const LedgerConfig& cfg) {
        ReplayConfig rc;
        rc.authority = cfg.authority;
        rc.fee = cfg.fee;
        rc.currency_label = cfg.currency_label;
        return rc;
    }
};

struct RepSummary {
    uint32_t count = 0;
    uint64_t sum = 0;
    bool banned = false;

    bool rated() const { return count > 0; }  // false means "Unrated"
    double mean() const { return count == 0 ? 0.0 : static_cast<double>(sum) / count; }
};

class ServiceState {
public:
    std::map<Key32, uint64_t> wallets;
    uint64_t fee_sink = 0;
    uint64_t burned = 0;
    uint64_t minted = 0;
    std::map<Key32, IdentityRecord> identities;
    std::map<Key32, ReputationRecord> reputations;
    std::vector<RecordEntry> records;  // commit order
    std::map<Key32, EscrowContract> escrows;
    std::map<Key32, DataProduct> products;
    std::vector<Rejection> rejections;
    uint64_t height = 0;  // replayed through this height

    friend bool operator==(const ServiceState& a, const ServiceState& b) {
        return a.wallets == b.wallets && a.fee_sink == b.fee_sink && a.burned == b.burned &&
               a.minted == b.minted && a.identities == b.identities &&
               a.reputations == b.reputations && a.records == b.records &&
               a.escrows == b.escrows && a.products == b.products &&
               a.rejections == b.rejections && a.height == b.height;
    }

    uint64_t balance(const Key32& peer) const {
        auto it = wallets.find(peer);
        return it == wallets.end() ? 0 : it->second;
    }

    bool banned(const Key32& peer) const {
        auto it = reputations.find(peer);
        return it != reputations.end() && it->second.banned;
    }

    uint64_t escrow_held_total() const {
        uint64_t total = 0;
        for (const auto& [id, c] : escrows) total += c.held;
        return total;
    }

    // Sum of balances + fee sink + escrow-held + burned = minted, exactly.
    bool conservation_holds() const {
        uint64_t sum = fee_sink + burned + escrow_held_total();
        for (const auto& [k, v] : wallets) sum += v;
        return sum == minted;
    }

    void apply_block(const Block& b, const ReplayConfig& cfg) {
        height = b.height;
        for (const auto& tx : b.txs) apply_tx(tx, cfg);
    }

private:
    void reject(const Transaction& tx, std::string reason) {
        rejections.push_back({height, tx.tx_id, std::move(reason)});
    }

    // Zero-amount moves leave the wallet map untouched so untouched peers
    // never acquire phantom entries.
    void credit(const Key32& peer, uint64_t amount) {
        if (amount) wallets[peer] += amount;
    }

    void debit(const Key32& peer, uint64_t amount) {
        if (amount) wallets[peer] -= amount;
    }

    void emit_record(RecordKind kind, const Key32& a, const Key32& b, Bytes reference,
                     const Key32& tx_id) {
        records.push_back({kind, a, b, std::move(reference), tx_id, height});
        anchor_index_[tx_id].push_back(records.size() - 1);
    }

    void maybe_ban(ReputationRecord& rep, const ReplayConfig& cfg) {
        if (rep.banned) return;
        uint64_t sum = 0;
        for (const auto& r : rep.ratings) sum += r.score;
        if (rep.ratings.size() >= cfg.ban_min_count &&
            sum * 100 < cfg.ban_mean_x100 * rep.ratings.size())
            rep.banned = true;
    }

    void apply_tx(const Transaction& tx, const ReplayConfig& cfg) {
        auto decoded = decode_payload(tx.channel, tx.payload);
        if (!decoded) return reject(tx, "malformed payload");

        Key32 signer = tx.sender.key;
        Key32 actor = signer;
        const Payload* effective = &*decoded;
        std::optional<Payload> inner_store;
        if (auto* del = std::get_if<DelegatedPay>(&*decoded)) {
            actor = del->origin;
            inner_store = decode_payload(tx.channel, del->inner, false);
            if (!inner_store) return reject(tx, "malformed delegated payload");
            effective = &*inner_store;
        }

        // Banned peers lose write access to payment and app channels; the
        // audit channels stay open so history survives a ban.
        if (tx.channel == Channel::Payment || tx.channel == Channel::AppSpecific) {
            if (banned(signer)) return reject(tx, "sender banned");
            if (actor != signer && banned(actor)) return reject(tx, "origin banned");
        }

        uint64_t fee = std::holds_alternative<MintPay>(*effective) ? 0 : cfg.fee;
        // The signer pays the platform fee; operation debits hit the actor.
        auto fee_affordable = [&](uint64_t actor_debit) {
            if (signer == actor) return balance(actor) >= actor_debit + fee;
            return balance(actor) >= actor_debit && balance(signer) >= fee;
        };
        auto charge = [&](uint64_t actor_debit) {
            debit(actor, actor_debit);
            debit(signer, fee);
            fee_sink += fee;
        };

        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, MintPay>) {
                    if (actor != cfg.authority) return reject(tx, "mint by non-authority");
                    credit(p.to, p.amount);
                    minted += p.amount;
                } else if constexpr (std::is_same_v<T, TransferPay>) {
                    if (!fee_affordable(p.amount)) return reject(tx, "insufficient funds");
                    charge(p.amount);
                    credit(p.to, p.amount);
                } else if constexpr (std::is_same_v<T, RegisterIdent>) {
                    if (identities.count(actor)) return reject(tx, "already registered");
                    if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                    charge(0);
                    identities[actor] = {actor, p.role, p.metadata, height};
                } else if constexpr (std::is_same_v<T, RatePeer>) {
                    apply_rating(tx, p, actor, cfg, fee_affordable, charge);
                } else if constexpr (std::is_same_v<T, RecordPay>) {
                    if (actor != p.party_a && actor != p.party_b)
                        return reject(tx, "reporter not a party");
                    if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                    charge(0);
                    emit_record(p.kind, p.party_a, p.party_b, p.reference, tx.tx_id);
                } else if constexpr (std::is_same_v<T, EscrowOpenPay>) {
                    apply_escrow_open(tx, p, actor, fee_affordable, charge);
                } else if constexpr (std::is_same_v<T, EscrowActPay>) {
                    apply_escrow_act(tx, p, actor, fee_affordable, charge);
                } else if constexpr (std::is_same_v<T, MarketPostPay>) {
                    if (!identities.count(actor)) return reject(tx, "seller not registered");
                    if (products.count(p.product_id)) return reject(tx, "duplicate product id");
                    if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                    charge(0);
                    products[p.product_id] = {p.product_id, actor,  p.topic, p.description,
                                              p.price_per_record, p.delivery, p.endpoint, true};
                } else if constexpr (std::is_same_v<T, MarketRetirePay>) {
                    auto it = products.find(p.product_id);
                    if (it == products.end()) return reject(tx, "unknown product");
                    if (it->second.seller != actor) return reject(tx, "not the listing seller");
                    if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                    charge(0);
                    it->second.active = false;
                } else if constexpr (std::is_same_v<T, DelegatedPay>) {
                    // unreachable: effective payload was unwrapped above
                    reject(tx, "nested delegation");
                }
            },
            *effective);
    }

    template <typename Afford, typename Charge>
    void apply_rating(const Transaction& tx, const RatePeer& p, const Key32& actor,
                      const ReplayConfig& cfg, Afford&& fee_affordable, Charge&& charge) {
        if (p.score < 1 || p.score > 5) return reject(tx, "score out of range");
        if (actor == p.subject) return reject(tx, "self-rating");
        if (!identities.count(actor)) return reject(tx, "rater not registered");
        if (!identities.count(p.subject)) return reject(tx, "subject not registered");
        // The anchor must be a committed transaction that produced a record
        // entry naming both rater and subject.
        auto anchor = anchor_index_.find(p.tx_ref);
        bool anchored = false;
        if (anchor != anchor_index_.end()) {
            for (size_t idx : anchor->second) {
                const RecordEntry& e = records[idx];
                if (e.involves(actor) && e.involves(p.subject)) {
                    anchored = true;
                    break;
                }
            }
        }
        if (!anchored) return reject(tx, "rating anchor not found");
        if (auto it = reputations.find(p.subject); it != reputations.end())
            for (const auto& r : it->second.ratings)
                if (r.rater == actor && r.tx_ref == p.tx_ref)
                    return reject(tx, "duplicate rating for anchor");
        if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
        charge(0);
        auto& rep = reputations[p.subject];
        rep.subject = p.subject;
        rep.ratings.push_back({actor, p.score, p.tx_ref});
        maybe_ban(rep, cfg);
    }

    template <typename Afford, typename Charge>
    void apply_escrow_open(const Transaction& tx, const EscrowOpenPay& p, const Key32& actor,
                           Afford&& fee_affordable, Charge&& charge) {
        if (escrows.count(p.escrow_id)) return reject(tx, "duplicate escrow id");
        if (p.seller == p.buyer) return reject(tx, "seller and buyer identical");
        if (actor != p.seller && actor != p.buyer) return reject(tx, "opener not a party");
        if (p.deposit < p.price) return reject(tx, "deposit below price");
        if (p.deadline <= height) return reject(tx, "deadline not in the future");
        if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
        charge(0);
        EscrowContract c;
        c.escrow_id = p.escrow_id;
        c.seller = p.seller;
        c.buyer = p.buyer;
        c.price = p.price;
        c.deposit = p.deposit;
        c.deadline = p.deadline;
        escrows[p.escrow_id] = c;
        emit_record(RecordKind::Order, p.seller, p.buyer,
                    Bytes(p.escrow_id.begin(), p.escrow_id.end()), tx.tx_id);
    }

    template <typename Afford, typename Charge>
    void apply_escrow_act(const Transaction& tx, const EscrowActPay& p, const Key32& actor,
                          Afford&& fee_affordable, Charge&& charge) {
        auto it = escrows.find(p.escrow_id);
        if (it == escrows.end()) return reject(tx, "unknown escrow");
        EscrowContract& c = it->second;
        Bytes ref(c.escrow_id.begin(), c.escrow_id.end());

        switch (p.action) {
            case EscrowAction::Fund: {
                if (c.state != EscrowState::Created) return reject(tx, "escrow not fundable");
                uint64_t leg;
                bool as_buyer;
                if (actor == c.buyer && !c.buyer_funded) {
                    leg = c.buyer_leg();
                    as_buyer = true;
                } else if (actor == c.seller && !c.seller_funded) {
                    leg = c.seller_leg();
                    as_buyer = false;
                } else {
                    return reject(tx, "not a fundable party");
                }
                if (!fee_affordable(leg)) return reject(tx, "insufficient funds");
                charge(leg);
                c.held += leg;
                (as_buyer ? c.buyer_funded : c.seller_funded) = true;
                if (c.fully_funded()) c.state = EscrowState::Funded;
                return;
            }
            case EscrowAction::ConfirmDelivery: {
                if (c.state != EscrowState::Funded) return reject(tx, "escrow not funded");
                if (actor != c.buyer) return reject(tx, "only the buyer confirms");
                if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                charge(0);
                c.state = EscrowState::Delivered;
                emit_record(RecordKind::DeliveryReceipt, c.seller, c.buyer, ref, tx.tx_id);
                return;
            }
            case EscrowAction::Settle: {
                if (c.state != EscrowState::Delivered) return reject(tx, "escrow not delivered");
                if (actor != c.seller && actor != c.buyer) return reject(tx, "not a party");
                if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                charge(0);
                credit(c.seller, c.price + c.deposit);
                credit(c.buyer, c.deposit);
                c.held = 0;
                c.state = EscrowState::Settled;
                emit_record(RecordKind::PaymentReceipt, c.seller, c.buyer, ref, tx.tx_id);
                return;
            }
            case EscrowAction::Dispute: {
                if (c.state != EscrowState::Delivered) return reject(tx, "escrow not delivered");
                if (actor != c.seller && actor != c.buyer) return reject(tx, "not a party");
                if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                charge(0);
                burned += c.held;  // price and both deposits leave circulation
                c.held = 0;
                c.state = EscrowState::Burned;
                emit_record(RecordKind::Dispute, c.seller, c.buyer, ref, tx.tx_id);
                return;
            }
            case EscrowAction::Expire: {
                if (c.state != EscrowState::Created && c.state != EscrowState::Funded)
                    return reject(tx, "escrow not expirable");
                if (height <= c.deadline) return reject(tx, "deadline not reached");
                if (!fee_affordable(0)) return reject(tx, "insufficient funds for fee");
                charge(0);
                if (c.buyer_funded) credit(c.buyer, c.buyer_leg());
                if (c.seller_funded) credit(c.seller, c.seller_leg());
                c.held = 0;
                c.state = EscrowState::Expired;
                return;
            }
        }
        reject(tx, "unknown escrow action");
    }

    std::map<Key32, std::vector<size_t>> anchor_index_;  // tx_id -> record indices
};

enum class ReplayError { InvalidChain };

// Pure function of the chain: equal chains give equal states.
inline Expected<ServiceState, ReplayError> replay(const std::vector<Block>& chain,
                                                  const ReplayConfig& cfg) {
    if (!validate_chain(chain)) return ReplayError::InvalidChain;
    ServiceState state;
    for (const auto& b : chain) state.apply_block(b, cfg);
    return state;
}

inline uint64_t balance_of(const ServiceState& state, const Key32& peer) {
    return state.balance(peer);
}

inline std::optional<IdentityRecord> resolve_identity(const ServiceState& state,
                                                      const Key32& peer) {
    auto it = state.identities.find(peer);
    if (it == state.identities.end()) return std::nullopt;
    return it->second;
}

inline RepSummary reputation_of(const ServiceState& state, const Key32& peer) {
    RepSummary s;
    auto it = state.reputations.find(peer);
    if (it == state.reputations.end()) return s;
    s.count = static_cast<uint32_t>(it->second.ratings.size());
    for (const auto& r : it->second.ratings) s.sum += r.score;
    s.banned = it->second.banned;
    return s;
}

// All entries with the given reference, in commit order.
inline std::vector<RecordEntry> audit_trail(const ServiceState& state, const Bytes& reference) {
    std::vector<RecordEntry> out;
    for (const auto& e : state.records)
        if (e.reference == reference) out.push_back(e);
    return out;
}

}  // namespace p2piot
