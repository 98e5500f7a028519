#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace p2piot {

using Bytes = std::vector<uint8_t>;
using Key32 = std::array<uint8_t, 32>;  // hashes, public keys, 32-byte ids
using Sig64 = std::array<uint8_t, 64>;

inline constexpr Key32 kZeroKey{};

// Minimal expected-or-error carrier; domain code pairs it with a small
// error struct (code enum + message).
template <typename T, typename E>
class Expected {
public:
    Expected(T value) : v_(std::move(value)) {}
    Expected(E error) : v_(std::move(error)) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(v_); }
    T& value() & { return std::get<T>(v_); }
    T&& value() && { return std::get<T>(std::move(v_)); }
    const E& error() const { return std::get<E>(v_); }

private:
    std::variant<T, E> v_;
};

inline std::string to_hex(const uint8_t* data, size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0x0f]);
    }
    return out;
}

inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

template <size_t N>
std::string to_hex(const std::array<uint8_t, N>& a) {
    return to_hex(a.data(), N);
}

// Short id prefix for human-readable reports.
inline std::string hex8(const Key32& k) { return to_hex(k.data(), 4); }

inline std::optional<Bytes> from_hex(const std::string& s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2) {
        int hi = nibble(s[i]), lo = nibble(s[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

inline std::optional<Key32> key_from_hex(const std::string& s) {
    auto b = from_hex(s);
    if (!b || b->size() != 32) return std::nullopt;
    Key32 k;
    std::copy(b->begin(), b->end(), k.begin());
    return k;
}

}  // namespace p2piot
