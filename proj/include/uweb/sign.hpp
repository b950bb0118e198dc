// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <stdexcept>

#include "hash.hpp"

namespace uweb::fs {

// Detached-signature abstraction for directory entries. Entries carry a
// one-byte scheme id followed by the scheme's signature bytes, and the
// publisher certificate carries the matching verification key. Scheme 0x01
// is a deterministic keyed-hash double: it gives the repository end-to-end
// signature plumbing and tamper evidence without a real PKI.

constexpr std::uint8_t demo_scheme_id = 0x01;
constexpr std::size_t signature_size = 33; // scheme id + 32-byte tag
constexpr std::size_t min_certificate_size = 65;

struct identity {
    bytes secret;      // signing key (demo scheme: the shared key)
    bytes certificate; // scheme id, verification key, padding, self-tag
};

inline digest256 keyed_tag(byte_span key, byte_span msg) {
    bytes inner;
    append(inner, key);
    append(inner, msg);
    auto h1 = sha256_digest(inner);
    bytes outer;
    append(outer, key);
    outer.insert(outer.end(), h1.begin(), h1.end());
    return sha256_digest(outer);
}

// Certificate layout: scheme_id(1) | key(32) | padding | tag(32), where the
// tag authenticates everything before it under the embedded key.
inline identity make_demo_identity(byte_span seed_material, std::size_t cert_size = 1024) {
    if (cert_size < min_certificate_size)
        throw std::invalid_argument("certificate size below minimum");
    identity id;
    bytes key_seed;
    append(key_seed, to_bytes("uweb-demo-key"));
    append(key_seed, seed_material);
    auto key = sha256_digest(key_seed);
    id.secret.assign(key.begin(), key.end());

    bytes cert;
    cert.push_back(demo_scheme_id);
    append(cert, id.secret);
    std::size_t pad = cert_size - min_certificate_size;
    for (std::size_t i = 0; i < pad; ++i) {
        bytes pseed;
        append(pseed, to_bytes("uweb-cert-pad"));
        append(pseed, seed_material);
        byte_writer w;
        w.u64le(i / 32);
        append(pseed, w.data());
        cert.push_back(sha256_digest(pseed)[i % 32]);
    }
    auto tag = keyed_tag(id.secret, cert);
    cert.insert(cert.end(), tag.begin(), tag.end());
    id.certificate = std::move(cert);
    return id;
}

inline bytes sign_detached(byte_span secret, byte_span msg) {
    bytes sig;
    sig.push_back(demo_scheme_id);
    auto tag = keyed_tag(secret, msg);
    sig.insert(sig.end(), tag.begin(), tag.end());
    return sig;
}

inline bool certificate_consistent(byte_span cert) {
    if (cert.size() < min_certificate_size || cert[0] != demo_scheme_id) return false;
    byte_span key = cert.subspan(1, 32);
    byte_span body = cert.first(cert.size() - 32);
    auto want = keyed_tag(key, body);
    return std::equal(want.begin(), want.end(), cert.end() - 32);
}

inline bool verify_detached(byte_span cert, byte_span msg, byte_span sig) {
    if (sig.size() != signature_size || sig[0] != demo_scheme_id) return false;
    if (cert.size() < min_certificate_size || cert[0] != demo_scheme_id) return false;
    byte_span key = cert.subspan(1, 32);
    auto want = keyed_tag(key, msg);
    return std::equal(want.begin(), want.end(), sig.begin() + 1);
}

} // namespace uweb::fs
