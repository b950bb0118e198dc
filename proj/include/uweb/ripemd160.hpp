// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <array>
#include <cstdint>
#include <cstring>

#include "bytes.hpp"

namespace uweb {

// RIPEMD-160 (Dobbertin, Bosselaers, Preneel).
class ripemd160 {
public:
    ripemd160() { reset(); }

    void reset() {
        state_ = {0x67452301u, 0xefcdab89u, 0x98badcfeu, 0x10325476u, 0xc3d2e1f0u};
        buffered_ = 0;
        total_ = 0;
    }

    ripemd160& write(byte_span data) {
        total_ += data.size();
        std::size_t off = 0;
        if (buffered_ > 0) {
            std::size_t take = std::min<std::size_t>(64 - buffered_, data.size());
            std::memcpy(buf_.data() + buffered_, data.data(), take);
            buffered_ += take;
            off = take;
            if (buffered_ == 64) {
                compress(buf_.data());
                buffered_ = 0;
            }
        }
        while (data.size() - off >= 64) {
            compress(data.data() + off);
            off += 64;
        }
        if (off < data.size()) {
            std::memcpy(buf_.data(), data.data() + off, data.size() - off);
            buffered_ = data.size() - off;
        }
        return *this;
    }

    std::array<std::uint8_t, 20> finalize() {
        std::uint64_t bit_len = total_ * 8;
        std::uint8_t pad = 0x80;
        write(byte_span(&pad, 1));
        static constexpr std::uint8_t zero[64] = {};
        while (buffered_ != 56) write(byte_span(zero, buffered_ < 56 ? 56 - buffered_ : 64 - buffered_ + 56));
        std::uint8_t len[8];
        for (int i = 0; i < 8; ++i) len[i] = static_cast<std::uint8_t>(bit_len >> (8 * i));
        write(byte_span(len, 8));
        std::array<std::uint8_t, 20> out{};
        for (int i = 0; i < 5; ++i) {
            out[i * 4 + 0] = static_cast<std::uint8_t>(state_[i]);
            out[i * 4 + 1] = static_cast<std::uint8_t>(state_[i] >> 8);
            out[i * 4 + 2] = static_cast<std::uint8_t>(state_[i] >> 16);
            out[i * 4 + 3] = static_cast<std::uint8_t>(state_[i] >> 24);
        }
        return out;
    }

private:
    static std::uint32_t rol(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

    static std::uint32_t f(int j, std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        if (j < 16) return x ^ y ^ z;
        if (j < 32) return (x & y) | (~x & z);
        if (j < 48) return (x | ~y) ^ z;
        if (j < 64) return (x & z) | (y & ~z);
        return x ^ (y | ~z);
    }

    void compress(const std::uint8_t* block) {
        static constexpr std::uint8_t r1[80] = {
            0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15,
            7, 4, 13, 1, 10, 6, 15, 3, 12, 0, 9, 5, 2, 14, 11, 8,
            3, 10, 14, 4, 9, 15, 8, 1, 2, 7, 0, 6, 13, 11, 5, 12,
            1, 9, 11, 10, 0, 8, 12, 4, 13, 3, 7, 15, 14, 5, 6, 2,
            4, 0, 5, 9, 7, 12, 2, 10, 14, 1, 3, 8, 11, 6, 15, 13};
        static constexpr std::uint8_t r2[80] = {
            5, 14, 7, 0, 9, 2, 11, 4, 13, 6, 15, 8, 1, 10, 3, 12,
            6, 11, 3, 7, 0, 13, 5, 10, 14, 15, 8, 12, 4, 9, 1, 2,
            15, 5, 1, 3, 7, 14, 6, 9, 11, 8, 12, 2, 10, 0, 4, 13,
            8, 6, 4, 1, 3, 11, 15, 0, 5, 12, 2, 13, 9, 7, 10, 14,
            12, 15, 10, 4, 1, 5, 8, 7, 6, 2, 13, 14, 0, 3, 9, 11};
        static constexpr std::uint8_t s1[80] = {
            11, 14, 15, 12, 5, 8, 7, 9, 11, 13, 14, 15, 6, 7, 9, 8,
            7, 6, 8, 13, 11, 9, 7, 15, 7, 12, 15, 9, 11, 7, 13, 12,
            11, 13, 6, 7, 14, 9, 13, 15, 14, 8, 13, 6, 5, 12, 7, 5,
            11, 12, 14, 15, 14, 15, 9, 8, 9, 14, 5, 6, 8, 6, 5, 12,
            9, 15, 5, 11, 6, 8, 13, 12, 5, 12, 13, 14, 11, 8, 5, 6};
        static constexpr std::uint8_t s2[80] = {
            8, 9, 9, 11, 13, 15, 15, 5, 7, 7, 8, 11, 14, 14, 12, 6,
            9, 13, 15, 7, 12, 8, 9, 11, 7, 7, 12, 7, 6, 15, 13, 11,
            9, 7, 15, 11, 8, 6, 6, 14, 12, 13, 5, 14, 13, 13, 7, 5,
            15, 5, 8, 11, 14, 14, 6, 14, 6, 9, 12, 9, 12, 5, 15, 8,
            8, 5, 12, 9, 12, 5, 14, 6, 8, 13, 6, 5, 15, 13, 11, 11};
        static constexpr std::uint32_t k1[5] = {0x00000000u, 0x5a827999u, 0x6ed9eba1u,
                                                0x8f1bbcdcu, 0xa953fd4eu};
        static constexpr std::uint32_t k2[5] = {0x50a28be6u, 0x5c4dd124u, 0x6d703ef3u,
                                                0x7a6d76e9u, 0x00000000u};

        std::uint32_t x[16];
        for (int i = 0; i < 16; ++i) {
            x[i] = static_cast<std::uint32_t>(block[i * 4]) |
                   (static_cast<std::uint32_t>(block[i * 4 + 1]) << 8) |
                   (static_cast<std::uint32_t>(block[i * 4 + 2]) << 16) |
                   (static_cast<std::uint32_t>(block[i * 4 + 3]) << 24);
        }

        std::uint32_t a1 = state_[0], b1 = state_[1], c1 = state_[2], d1 = state_[3], e1 = state_[4];
        std::uint32_t a2 = a1, b2 = b1, c2 = c1, d2 = d1, e2 = e1;
        for (int j = 0; j < 80; ++j) {
            std::uint32_t t = rol(a1 + f(j, b1, c1, d1) + x[r1[j]] + k1[j / 16], s1[j]) + e1;
            a1 = e1; e1 = d1; d1 = rol(c1, 10); c1 = b1; b1 = t;
            t = rol(a2 + f(79 - j, b2, c2, d2) + x[r2[j]] + k2[j / 16], s2[j]) + e2;
            a2 = e2; e2 = d2; d2 = rol(c2, 10); c2 = b2; b2 = t;
        }
        std::uint32_t t = state_[1] + c1 + d2;
        state_[1] = state_[2] + d1 + e2;
        state_[2] = state_[3] + e1 + a2;
        state_[3] = state_[4] + a1 + b2;
        state_[4] = state_[0] + b1 + c2;
        state_[0] = t;
    }

    std::array<std::uint32_t, 5> state_{};
    std::array<std::uint8_t, 64> buf_{};
    std::size_t buffered_ = 0;
    std::uint64_t total_ = 0;
};

inline std::array<std::uint8_t, 20> ripemd160_digest(byte_span data) {
    return ripemd160().write(data).finalize();
}

} // namespace uweb
