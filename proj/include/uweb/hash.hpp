// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstring>

#include "bytes.hpp"
#include "ripemd160.hpp"
#include "sha256.hpp"

namespace uweb {

using digest256 = std::array<std::uint8_t, 32>;
using digest160 = std::array<std::uint8_t, 20>;

inline digest256 double_sha256(byte_span data) {
    auto first = sha256_digest(data);
    return sha256_digest(byte_span(first.data(), first.size()));
}

// RIPEMD160(SHA256(data)) — the script-level hash lock primitive.
inline digest160 hash160(byte_span data) {
    auto first = sha256_digest(data);
    return ripemd160_digest(byte_span(first.data(), first.size()));
}

inline bytes to_vec(const digest256& d) { return bytes(d.begin(), d.end()); }
inline bytes to_vec(const digest160& d) { return bytes(d.begin(), d.end()); }

// Transaction ids are kept in internal (hash) byte order; the customary
// display form reverses the bytes.
struct txid_t {
    digest256 raw{};

    auto operator<=>(const txid_t&) const = default;

    std::string display() const {
        digest256 rev = raw;
        std::reverse(rev.begin(), rev.end());
        return hex_encode(byte_span(rev.data(), rev.size()));
    }

    static txid_t from_display(std::string_view hex) {
        auto b = hex_decode(hex);
        if (!b || b->size() != 32) throw parse_error("bad txid hex");
        txid_t id;
        std::copy(b->rbegin(), b->rend(), id.raw.begin());
        return id;
    }
};

struct txid_hasher {
    std::size_t operator()(const txid_t& id) const {
        std::size_t v;
        std::memcpy(&v, id.raw.data(), sizeof(v));
        return v;
    }
};

} // namespace uweb
