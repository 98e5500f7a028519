#pragma once

#include <cstring>
#include <span>

#include "p2piot/common.hpp"

// Canonical byte encoding used for everything that is hashed, signed or
// written to disk: fixed-width big-endian integers, length-prefixed byte
// strings (u32 length), fields in declaration order.

namespace p2piot {

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }

    void u32(uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<uint8_t>(v >> shift));
    }

    void u64(uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            buf_.push_back(static_cast<uint8_t>(v >> shift));
    }

    void raw(std::span<const uint8_t> bytes) {
        buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    }

    template <size_t N>
    void fixed(const std::array<uint8_t, N>& a) {
        buf_.insert(buf_.end(), a.begin(), a.end());
    }

    // Length-prefixed byte string.
    void var(std::span<const uint8_t> bytes) {
        u32(static_cast<uint32_t>(bytes.size()));
        raw(bytes);
    }

    void str(const std::string& s) {
        var({reinterpret_cast<const uint8_t*>(s.data()), s.size()});
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

// Reads return nullopt on underflow; callers map that to their own error
// (truncated frame vs malformed payload).
class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    size_t remaining() const { return data_.size() - pos_; }
    size_t position() const { return pos_; }
    bool done() const { return pos_ == data_.size(); }

    std::optional<uint8_t> u8() {
        if (remaining() < 1) return std::nullopt;
        return data_[pos_++];
    }

    std::optional<uint32_t> u32() {
        if (remaining() < 4) return std::nullopt;
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
        return v;
    }

    std::optional<uint64_t> u64() {
        if (remaining() < 8) return std::nullopt;
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
        return v;
    }

    template <size_t N>
    std::optional<std::array<uint8_t, N>> fixed() {
        if (remaining() < N) return std::nullopt;
        std::array<uint8_t, N> a;
        std::memcpy(a.data(), data_.data() + pos_, N);
        pos_ += N;
        return a;
    }

    std::optional<Bytes> var(size_t max_len = 1u << 20) {
        auto len = u32();
        if (!len || *len > max_len || remaining() < *len) return std::nullopt;
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + *len);
        pos_ += *len;
        return out;
    }

    std::optional<std::string> str(size_t max_len = 1u << 20) {
        auto b = var(max_len);
        if (!b) return std::nullopt;
        return std::string(b->begin(), b->end());
    }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace p2piot
