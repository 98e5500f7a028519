#pragma once

#include "p2piot/payload.hpp"

// Dual-deposit escrow: buyer locks price + deposit, seller locks deposit,
// settlement returns deposits and pays the seller; a dispute after
// delivery burns everything held. With deposit >= price neither side
// profits from walking away mid-trade.

namespace p2piot {

enum class EscrowState : uint8_t {
    Created = 1,
    Funded = 2,
    Delivered = 3,
    Settled = 4,
    Burned = 5,
    Expired = 6,
};

inline const char* escrow_state_name(EscrowState s) {
    switch (s) {
        case EscrowState::Created: return "created";
        case EscrowState::Funded: return "funded";
        case EscrowState::Delivered: return "delivered";
        case EscrowState::Settled: return "settled";
        case EscrowState::Burned: return "burned";
        case EscrowState::Expired: return "expired";
    }
    return "?";
}

struct EscrowContract {
    Key32 escrow_id{};
    Key32 seller{};
    Key32 buyer{};
    uint64_t price = 0;
    uint64_t deposit = 0;   // per side; deposit >= price enforced at open
    uint64_t deadline = 0;  // ledger height
    EscrowState state = EscrowState::Created;
    bool seller_funded = false;
    bool buyer_funded = false;
    uint64_t held = 0;  // funds locked in the contract, counted for conservation

    uint64_t buyer_leg() const { return price + deposit; }
    uint64_t seller_leg() const { return deposit; }
    bool fully_funded() const { return seller_funded && buyer_funded; }
    bool terminal() const {
        return state == EscrowState::Settled || state == EscrowState::Burned ||
               state == EscrowState::Expired;
    }
};

// Legal transitions: Created->Funded->Delivered->Settled,
// Created/Funded->Expired, Delivered->Burned.
inline bool escrow_transition_legal(EscrowState from, EscrowState to) {
    switch (from) {
        case EscrowState::Created:
            return to == EscrowState::Funded || to == EscrowState::Expired;
        case EscrowState::Funded:
            return to == EscrowState::Delivered || to == EscrowState::Expired;
        case EscrowState::Delivered:
            return to == EscrowState::Settled || to == EscrowState::Burned;
        default:
            return false;
    }
}

}  // namespace p2piot
