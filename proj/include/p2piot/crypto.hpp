#pragma once

#include <sodium.h>

#include <compare>
#include <mutex>
#include <span>

#include "p2piot/common.hpp"

// Ed25519 signatures and SHA-256 hashing (libsodium). Key pairs are
// derived deterministically from a 32-byte seed so simulation runs are
// reproducible.

namespace p2piot {

inline void crypto_init() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

inline Key32 sha256(std::span<const uint8_t> data) {
    crypto_init();
    Key32 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

inline Key32 sha256(const Bytes& data) {
    return sha256(std::span<const uint8_t>(data.data(), data.size()));
}

inline Key32 sha256(const std::string& s) {
    return sha256(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

// Identity of a peer. Equality and ordering are byte equality of the
// public key; the display name is a label only.
struct PeerId {
    Key32 key{};
    std::string display_name;

    static constexpr size_t kMaxNameBytes = 64;

    static PeerId make(const Key32& key, std::string name = {}) {
        if (name.size() > kMaxNameBytes)
            throw std::invalid_argument("display_name exceeds 64 bytes");
        return PeerId{key, std::move(name)};
    }

    friend bool operator==(const PeerId& a, const PeerId& b) { return a.key == b.key; }
    friend std::strong_ordering operator<=>(const PeerId& a, const PeerId& b) {
        return a.key <=> b.key;
    }
};

struct Keypair {
    Key32 public_key{};
    std::array<uint8_t, 64> secret_key{};

    PeerId id(std::string name = {}) const { return PeerId::make(public_key, std::move(name)); }
};

enum class CryptoError { InvalidSeed };

// Deterministic: equal seeds yield equal key pairs.
inline Keypair keypair_from_seed(const Key32& seed) {
    crypto_init();
    Keypair kp;
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
    return kp;
}

inline Expected<Keypair, CryptoError> keypair_from_seed(std::span<const uint8_t> seed) {
    if (seed.size() != 32) return CryptoError::InvalidSeed;
    Key32 s;
    std::copy(seed.begin(), seed.end(), s.begin());
    return keypair_from_seed(s);
}

inline Keypair random_keypair() {
    crypto_init();
    Key32 seed;
    randombytes_buf(seed.data(), seed.size());
    return keypair_from_seed(seed);
}

inline Sig64 sign_detached(std::span<const uint8_t> msg, const Keypair& kp) {
    crypto_init();
    Sig64 sig;
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), kp.secret_key.data());
    return sig;
}

inline bool verify_detached(std::span<const uint8_t> msg, const Sig64& sig, const Key32& pubkey) {
    crypto_init();
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pubkey.data()) == 0;
}

// Named derivation for scenario-seeded keys and ids: sha256(tag ‖ seed ‖ name).
inline Key32 derive_key32(const std::string& tag, uint64_t seed, const std::string& name = {}) {
    Bytes buf;
    buf.insert(buf.end(), tag.begin(), tag.end());
    for (int shift = 56; shift >= 0; shift -= 8)
        buf.push_back(static_cast<uint8_t>(seed >> shift));
    buf.insert(buf.end(), name.begin(), name.end());
    return sha256(buf);
}

}  // namespace p2piot
