// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hash.hpp"
#include "sign.hpp"
#include "standardness.hpp"

namespace uweb::fs {

// Directory entries live in OP_RETURN outputs. A logical entry starts with a
// head payload:
//     tag | directive | CompactSize(record length) | record prefix
// and, when the record exceeds the head's capacity, continues in chained
// transactions whose OP_RETURN payloads carry the remaining raw bytes. Each
// transaction of the chain reserves output 1 as the spendable continuation
// point; the entry after the last continuation spends that same output, so a
// live directory always keeps exactly one un-spent chaining output.

enum class directive : std::uint8_t {
    cert = 0x00,
    file = 0x01,
    update = 0x02,
    remove = 0x03,
    mkdir = 0x04,
};

inline const char* to_string(directive d) {
    switch (d) {
        case directive::cert: return "cert";
        case directive::file: return "file";
        case directive::update: return "update";
        case directive::remove: return "remove";
        case directive::mkdir: return "mkdir";
    }
    return "unknown";
}

// Root-directory announcements use the 8-byte tag 0x44495220494E4954
// ("DIR INIT"); directory and operation entries use 4-byte tags.
inline const bytes& tag_init() {
    static const bytes t = {'D', 'I', 'R', ' ', 'I', 'N', 'I', 'T'};
    return t;
}

inline const bytes& tag_dir() {
    static const bytes t = {'D', 'I', 'R', 'E'};
    return t;
}

inline const bytes& tag_op() {
    static const bytes t = {'D', 'I', 'R', 'O'};
    return t;
}

inline std::size_t head_capacity(const bytes& tag, std::uint64_t record_len) {
    return policy::max_op_return_data - tag.size() - 1 - varint_size(record_len);
}

// Number of chained transactions a record of this length occupies.
inline std::size_t entry_tx_count(const bytes& tag, std::uint64_t record_len) {
    std::size_t head = head_capacity(tag, record_len);
    if (record_len <= head) return 1;
    std::uint64_t rest = record_len - head;
    return 1 + static_cast<std::size_t>((rest + policy::max_op_return_data - 1) /
                                        policy::max_op_return_data);
}

// Splits a record into the head payload plus raw continuation payloads.
inline std::vector<bytes> split_entry_payloads(const bytes& tag, directive d, byte_span record) {
    std::vector<bytes> out;
    byte_writer head;
    head.raw(tag);
    head.u8(static_cast<std::uint8_t>(d));
    head.varint(record.size());
    std::size_t take = std::min(record.size(), head_capacity(tag, record.size()));
    head.raw(record.first(take));
    out.push_back(head.data());
    std::size_t off = take;
    while (off < record.size()) {
        std::size_t n = std::min(record.size() - off, policy::max_op_return_data);
        out.emplace_back(record.begin() + off, record.begin() + off + n);
        off += n;
    }
    return out;
}

struct entry_head {
    bytes tag;
    directive d = directive::cert;
    std::uint64_t record_len = 0;
    bytes slice; // record prefix carried by the head payload
};

inline std::optional<entry_head> parse_entry_head(byte_span payload) {
    for (const bytes* tag : {&tag_init(), &tag_dir(), &tag_op()}) {
        if (payload.size() < tag->size() + 2) continue;
        if (!std::equal(tag->begin(), tag->end(), payload.begin())) continue;
        byte_reader r(payload.subspan(tag->size()));
        try {
            entry_head head;
            head.tag = *tag;
            std::uint8_t d = r.u8();
            if (d > static_cast<std::uint8_t>(directive::mkdir)) return std::nullopt;
            head.d = static_cast<directive>(d);
            head.record_len = r.varint();
            bytes rest = r.raw(r.remaining());
            std::size_t take = std::min<std::size_t>(rest.size(), head.record_len);
            head.slice.assign(rest.begin(), rest.begin() + take);
            return head;
        } catch (const parse_error&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

// ---- directive records ------------------------------------------------------

// FILE / UPDATE record:
//   target txid (32) | content sha256 (32) | compressed-digest prefix (16) |
//   CompactSize(name length) | name | signature (33)
struct file_record {
    txid_t target;
    digest256 content_sha256{};
    std::array<std::uint8_t, 16> compressed_digest{};
    std::string name;
    bytes signature;
};

inline bytes encode_file_record_unsigned(const file_record& f) {
    byte_writer w;
    w.raw(byte_span(f.target.raw.data(), f.target.raw.size()));
    w.raw(byte_span(f.content_sha256.data(), f.content_sha256.size()));
    w.raw(byte_span(f.compressed_digest.data(), f.compressed_digest.size()));
    w.varint(f.name.size());
    w.raw(to_bytes(f.name));
    return w.data();
}

inline std::optional<file_record> parse_file_record(byte_span record) {
    try {
        byte_reader r(record);
        file_record f;
        auto t = r.raw(32);
        std::copy(t.begin(), t.end(), f.target.raw.begin());
        auto h = r.raw(32);
        std::copy(h.begin(), h.end(), f.content_sha256.begin());
        auto c = r.raw(16);
        std::copy(c.begin(), c.end(), f.compressed_digest.begin());
        auto name = r.raw(r.varint());
        f.name.assign(name.begin(), name.end());
        f.signature = r.raw(signature_size);
        if (!r.empty()) return std::nullopt;
        return f;
    } catch (const parse_error&) {
        return std::nullopt;
    }
}

// MKDIR / REMOVE record: CompactSize(name length) | name | signature (33)
struct name_record {
    std::string name;
    bytes signature;
};

inline bytes encode_name_record_unsigned(const std::string& name) {
    byte_writer w;
    w.varint(name.size());
    w.raw(to_bytes(name));
    return w.data();
}

inline std::optional<name_record> parse_name_record(byte_span record) {
    try {
        byte_reader r(record);
        name_record n;
        auto name = r.raw(r.varint());
        n.name.assign(name.begin(), name.end());
        n.signature = r.raw(signature_size);
        if (!r.empty()) return std::nullopt;
        return n;
    } catch (const parse_error&) {
        return std::nullopt;
    }
}

// Message bound by an entry signature: the chain position (the outpoint the
// entry's head spends) plus the entry's semantic content.
inline bytes entry_signing_message(const outpoint& prev_tip, const bytes& tag, directive d,
                                   byte_span record_unsigned) {
    byte_writer w;
    w.raw(byte_span(prev_tip.txid.raw.data(), prev_tip.txid.raw.size()));
    w.u32le(prev_tip.index);
    w.raw(tag);
    w.u8(static_cast<std::uint8_t>(d));
    w.raw(record_unsigned);
    return w.data();
}

} // namespace uweb::fs
