#pragma once

#include "p2piot/tx.hpp"

// Channel-specific payload grammar. Every payload starts with a kind byte;
// kind 0x00 on any channel is the gateway-delegation wrapper carrying the
// origin device id plus the inner payload it could not sign itself.

namespace p2piot {

enum class Role : uint8_t {
    Device = 1,
    Gateway = 2,
    EdgeProvider = 3,
    CloudProvider = 4,
    Buyer = 5,
    Seller = 6,
};

inline const char* role_name(Role r) {
    switch (r) {
        case Role::Device: return "device";
        case Role::Gateway: return "gateway";
        case Role::EdgeProvider: return "edge";
        case Role::CloudProvider: return "cloud";
        case Role::Buyer: return "buyer";
        case Role::Seller: return "seller";
    }
    return "?";
}

inline std::optional<Role> role_from_name(const std::string& s) {
    if (s == "device") return Role::Device;
    if (s == "gateway") return Role::Gateway;
    if (s == "edge") return Role::EdgeProvider;
    if (s == "cloud") return Role::CloudProvider;
    if (s == "buyer") return Role::Buyer;
    if (s == "seller") return Role::Seller;
    return std::nullopt;
}

enum class RecordKind : uint8_t {
    Order = 1,
    Invoice = 2,
    PaymentReceipt = 3,
    DeliveryReceipt = 4,
    Dispute = 5,
};

inline const char* record_kind_name(RecordKind k) {
    switch (k) {
        case RecordKind::Order: return "order";
        case RecordKind::Invoice: return "invoice";
        case RecordKind::PaymentReceipt: return "payment-receipt";
        case RecordKind::DeliveryReceipt: return "delivery-receipt";
        case RecordKind::Dispute: return "dispute";
    }
    return "?";
}

enum class EscrowAction : uint8_t {
    Fund = 1,
    ConfirmDelivery = 2,
    Settle = 3,
    Dispute = 4,
    Expire = 5,
};

enum class Delivery : uint8_t {
    SdppStream = 1,
    EscrowedBatch = 2,
};

// ---- payload structs, one per operation ----

struct MintPay {
    Key32 to{};
    uint64_t amount = 0;
};

struct TransferPay {
    Key32 to{};
    uint64_t amount = 0;
    Bytes memo;  // <= 64 bytes

    static constexpr size_t kMaxMemo = 64;
};

struct RegisterIdent {
    Role role = Role::Device;
    Bytes metadata;  // <= 256 bytes

    static constexpr size_t kMaxMetadata = 256;
};

struct RatePeer {
    Key32 subject{};
    uint8_t score = 0;  // 1..5
    Key32 tx_ref{};     // committed record entry the rating hangs off
};

struct RecordPay {
    RecordKind kind = RecordKind::Order;
    Key32 party_a{};
    Key32 party_b{};
    Bytes reference;  // opaque: SDPP session id, escrow id, ...
};

struct EscrowOpenPay {
    Key32 escrow_id{};
    Key32 seller{};
    Key32 buyer{};
    uint64_t price = 0;
    uint64_t deposit = 0;   // per side, must be >= price
    uint64_t deadline = 0;  // ledger height
};

struct EscrowActPay {
    EscrowAction action = EscrowAction::Fund;
    Key32 escrow_id{};
};

struct MarketPostPay {
    Key32 product_id{};
    std::string topic;
    Bytes description;  // <= 256 bytes
    uint64_t price_per_record = 0;
    Delivery delivery = Delivery::SdppStream;
    Bytes endpoint;  // opaque connection descriptor

    static constexpr size_t kMaxDescription = 256;
};

struct MarketRetirePay {
    Key32 product_id{};
};

struct DelegatedPay {
    Key32 origin{};  // the constrained device the effects belong to
    Bytes inner;     // inner payload for the same channel
};

using Payload = std::variant<MintPay, TransferPay, RegisterIdent, RatePeer, RecordPay,
                             EscrowOpenPay, EscrowActPay, MarketPostPay, MarketRetirePay,
                             DelegatedPay>;

// Kind bytes. Payment: 1=mint 2=transfer. Identity: 1=register.
// Rating: 1=rate. Records: 1=record. AppSpecific: 1=escrow-open,
// 2..6=escrow actions, 0x10=market-post, 0x11=market-retire. 0=delegated.
namespace kind {
inline constexpr uint8_t Delegated = 0x00;
inline constexpr uint8_t Mint = 0x01;
inline constexpr uint8_t Transfer = 0x02;
inline constexpr uint8_t Register = 0x01;
inline constexpr uint8_t Rate = 0x01;
inline constexpr uint8_t Record = 0x01;
inline constexpr uint8_t EscrowOpen = 0x01;
inline constexpr uint8_t EscrowActBase = 0x01;  // action byte added on top
inline constexpr uint8_t MarketPost = 0x10;
inline constexpr uint8_t MarketRetire = 0x11;
}  // namespace kind

inline Bytes encode_payload(const MintPay& p) {
    ByteWriter w;
    w.u8(kind::Mint);
    w.fixed(p.to);
    w.u64(p.amount);
    return w.take();
}

inline Bytes encode_payload(const TransferPay& p) {
    ByteWriter w;
    w.u8(kind::Transfer);
    w.fixed(p.to);
    w.u64(p.amount);
    w.var(p.memo);
    return w.take();
}

inline Bytes encode_payload(const RegisterIdent& p) {
    ByteWriter w;
    w.u8(kind::Register);
    w.u8(static_cast<uint8_t>(p.role));
    w.var(p.metadata);
    return w.take();
}

inline Bytes encode_payload(const RatePeer& p) {
    ByteWriter w;
    w.u8(kind::Rate);
    w.fixed(p.subject);
    w.u8(p.score);
    w.fixed(p.tx_ref);
    return w.take();
}

inline Bytes encode_payload(const RecordPay& p) {
    ByteWriter w;
    w.u8(kind::Record);
    w.u8(static_cast<uint8_t>(p.kind));
    w.fixed(p.party_a);
    w.fixed(p.party_b);
    w.var(p.reference);
    return w.take();
}

inline Bytes encode_payload(const EscrowOpenPay& p) {
    ByteWriter w;
    w.u8(kind::EscrowOpen);
    w.fixed(p.escrow_id);
    w.fixed(p.seller);
    w.fixed(p.buyer);
    w.u64(p.price);
    w.u64(p.deposit);
    w.u64(p.deadline);
    return w.take();
}

inline Bytes encode_payload(const EscrowActPay& p) {
    ByteWriter w;
    w.u8(kind::EscrowActBase + static_cast<uint8_t>(p.action));
    w.fixed(p.escrow_id);
    return w.take();
}

inline Bytes encode_payload(const MarketPostPay& p) {
    ByteWriter w;
    w.u8(kind::MarketPost);
    w.fixed(p.product_id);
    w.str(p.topic);
    w.var(p.description);
    w.u64(p.price_per_record);
    w.u8(static_cast<uint8_t>(p.delivery));
    w.var(p.endpoint);
    return w.take();
}

inline Bytes encode_payload(const MarketRetirePay& p) {
    ByteWriter w;
    w.u8(kind::MarketRetire);
    w.fixed(p.product_id);
    return w.take();
}

inline Bytes encode_payload(const DelegatedPay& p) {
    ByteWriter w;
    w.u8(kind::Delegated);
    w.fixed(p.origin);
    w.var(p.inner);
    return w.take();
}

// Decode a channel's payload. allow_delegated is cleared when decoding the
// inner payload of a wrapper so delegation cannot nest.
inline std::optional<Payload> decode_payload(Channel channel, std::span<const uint8_t> bytes,
                                             bool allow_delegated = true) {
    ByteReader r(bytes);
    auto k = r.u8();
    if (!k) return std::nullopt;

    auto finish = [&r](Payload p) -> std::optional<Payload> {
        if (!r.done()) return std::nullopt;  // trailing bytes are malformed
        return p;
    };

    if (*k == kind::Delegated) {
        if (!allow_delegated) return std::nullopt;
        auto origin = r.fixed<32>();
        auto inner = r.var();
        if (!origin || !inner) return std::nullopt;
        // Inner payload must itself decode for this channel.
        if (!decode_payload(channel, *inner, false)) return std::nullopt;
        return finish(DelegatedPay{*origin, std::move(*inner)});
    }

    switch (channel) {
        case Channel::Payment: {
            if (*k == kind::Mint) {
                auto to = r.fixed<32>();
                auto amount = r.u64();
                if (!to || !amount) return std::nullopt;
                return finish(MintPay{*to, *amount});
            }
            if (*k == kind::Transfer) {
                auto to = r.fixed<32>();
                auto amount = r.u64();
                auto memo = r.var(TransferPay::kMaxMemo);
                if (!to || !amount || !memo) return std::nullopt;
                return finish(TransferPay{*to, *amount, std::move(*memo)});
            }
            return std::nullopt;
        }
        case Channel::Identity: {
            if (*k != kind::Register) return std::nullopt;
            auto role = r.u8();
            auto meta = r.var(RegisterIdent::kMaxMetadata);
            if (!role || !meta || *role < 1 || *role > 6) return std::nullopt;
            return finish(RegisterIdent{static_cast<Role>(*role), std::move(*meta)});
        }
        case Channel::Rating: {
            if (*k != kind::Rate) return std::nullopt;
            auto subject = r.fixed<32>();
            auto score = r.u8();
            auto ref = r.fixed<32>();
            if (!subject || !score || !ref) return std::nullopt;
            return finish(RatePeer{*subject, *score, *ref});
        }
        case Channel::Records: {
            if (*k != kind::Record) return std::nullopt;
            auto kind_b = r.u8();
            auto a = r.fixed<32>();
            auto b = r.fixed<32>();
            auto ref = r.var();
            if (!kind_b || !a || !b || !ref || *kind_b < 1 || *kind_b > 5) return std::nullopt;
            return finish(RecordPay{static_cast<RecordKind>(*kind_b), *a, *b, std::move(*ref)});
        }
        case Channel::AppSpecific: {
            if (*k == kind::EscrowOpen) {
                auto id = r.fixed<32>();
                auto seller = r.fixed<32>();
                auto buyer = r.fixed<32>();
                auto price = r.u64();
                auto deposit = r.u64();
                auto deadline = r.u64();
                if (!id || !seller || !buyer || !price || !deposit || !deadline)
                    return std::nullopt;
                return finish(EscrowOpenPay{*id, *seller, *buyer, *price, *deposit, *deadline});
            }
            if (*k >= kind::EscrowActBase + 1 && *k <= kind::EscrowActBase + 5) {
                auto id = r.fixed<32>();
                if (!id) return std::nullopt;
                return finish(EscrowActPay{static_cast<EscrowAction>(*k - kind::EscrowActBase), *id});
            }
            if (*k == kind::MarketPost) {
                auto id = r.fixed<32>();
                auto topic = r.str();
                auto desc = r.var(MarketPostPay::kMaxDescription);
                auto price = r.u64();
                auto delivery = r.u8();
                auto endpoint = r.var();
                if (!id || !topic || !desc || !price || !delivery || !endpoint) return std::nullopt;
                if (*delivery < 1 || *delivery > 2) return std::nullopt;
                return finish(MarketPostPay{*id, std::move(*topic), std::move(*desc), *price,
                                            static_cast<Delivery>(*delivery), std::move(*endpoint)});
            }
            if (*k == kind::MarketRetire) {
                auto id = r.fixed<32>();
                if (!id) return std::nullopt;
                return finish(MarketRetirePay{*id});
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

// Peers referenced by a payload besides the signer; used by read_query's
// counterparty filter. Extracted from payload bytes alone.
inline std::vector<Key32> payload_counterparties(Channel channel, std::span<const uint8_t> bytes) {
    auto decoded = decode_payload(channel, bytes);
    if (!decoded) return {};
    std::vector<Key32> out;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MintPay> || std::is_same_v<T, TransferPay>) {
                out.push_back(p.to);
            } else if constexpr (std::is_same_v<T, RatePeer>) {
                out.push_back(p.subject);
            } else if constexpr (std::is_same_v<T, RecordPay>) {
                out.push_back(p.party_a);
                out.push_back(p.party_b);
            } else if constexpr (std::is_same_v<T, EscrowOpenPay>) {
                out.push_back(p.seller);
                out.push_back(p.buyer);
            } else if constexpr (std::is_same_v<T, DelegatedPay>) {
                out.push_back(p.origin);
                auto inner = payload_counterparties(channel, p.inner);
                out.insert(out.end(), inner.begin(), inner.end());
            }
        },
        *decoded);
    return out;
}

}  // namespace p2piot
