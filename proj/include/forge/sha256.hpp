#pragma once

#include "forge/common.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

namespace forge::crypto {

using Bytes = std::vector<std::uint8_t>;

inline std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len) {
    std::array<std::uint8_t, 32> out{};
    unsigned int out_len = 0;
    EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr);
    return out;
}

/// Domain-separated hash: H(tag || parts...), truncated to out_bytes.
class Hasher {
public:
    explicit Hasher(std::string_view tag) {
        buf_.insert(buf_.end(), tag.begin(), tag.end());
        buf_.push_back(0x1f); // tag terminator
    }
    Hasher& add(const Bytes& b) {
        buf_.insert(buf_.end(), b.begin(), b.end());
        return *this;
    }
    Hasher& add(const std::uint8_t* p, std::size_t n) {
        buf_.insert(buf_.end(), p, p + n);
        return *this;
    }
    Hasher& add_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        return *this;
    }
    Bytes finish(std::size_t out_bytes) const {
        require(out_bytes <= 32, "sha256 output is at most 32 bytes");
        const auto full = sha256(buf_.data(), buf_.size());
        return Bytes(full.begin(), full.begin() + out_bytes);
    }

private:
    Bytes buf_;
};

// Bit order convention for bit/byte conversions: bit i lives at
// byte[i/8] >> (i%8).
inline int get_bit(const Bytes& bytes, std::size_t i) {
    return (bytes[i / 8] >> (i % 8)) & 1;
}

inline void set_bit(Bytes& bytes, std::size_t i, int v) {
    if (v) {
        bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    } else {
        bytes[i / 8] &= static_cast<std::uint8_t>(~(1u << (i % 8)));
    }
}

} // namespace forge::crypto
