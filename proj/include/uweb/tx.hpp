// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cstdint>
#include <vector>

#include "bytes.hpp"
#include "hash.hpp"
#include "script.hpp"

namespace uweb {

// Base currency unit (1e-8 of a coin).
using amount = std::int64_t;

constexpr amount COIN = 100'000'000;
constexpr amount MILLI_COIN = 100'000;

struct outpoint {
    txid_t txid;
    std::uint32_t index = 0;

    auto operator<=>(const outpoint&) const = default;
};

struct outpoint_hasher {
    std::size_t operator()(const outpoint& o) const {
        return txid_hasher{}(o.txid) ^ (static_cast<std::size_t>(o.index) * 0x9e3779b97f4a7c15ull);
    }
};

struct tx_input {
    outpoint prevout;
    script script_sig;
    std::uint32_t sequence = 0xffffffff;

    auto operator<=>(const tx_input&) const = default;

    std::size_t serialized_size() const {
        std::size_t s = script_sig.serialized_size();
        return 32 + 4 + varint_size(s) + s + 4;
    }
};

struct tx_output {
    amount value = 0;
    script script_pubkey;

    auto operator<=>(const tx_output&) const = default;

    std::size_t serialized_size() const {
        std::size_t s = script_pubkey.serialized_size();
        return 8 + varint_size(s) + s;
    }
};

// Pre-segwit wire transaction.
struct transaction {
    std::int32_t version = 1;
    std::vector<tx_input> inputs;
    std::vector<tx_output> outputs;
    std::uint32_t locktime = 0;

    auto operator<=>(const transaction&) const = default;

    bytes serialize() const {
        bytes out;
        out.reserve(serialized_size());
        byte_writer w(out);
        w.i32le(version);
        w.varint(inputs.size());
        for (const auto& in : inputs) {
            w.raw(byte_span(in.prevout.txid.raw.data(), 32));
            w.u32le(in.prevout.index);
            bytes ss = in.script_sig.serialize();
            w.varint(ss.size());
            w.raw(ss);
            w.u32le(in.sequence);
        }
        w.varint(outputs.size());
        for (const auto& o : outputs) {
            w.i64le(o.value);
            bytes pk = o.script_pubkey.serialize();
            w.varint(pk.size());
            w.raw(pk);
        }
        w.u32le(locktime);
        return out;
    }

    std::size_t serialized_size() const {
        std::size_t n = 4 + varint_size(inputs.size()) + varint_size(outputs.size()) + 4;
        for (const auto& in : inputs) n += in.serialized_size();
        for (const auto& o : outputs) n += o.serialized_size();
        return n;
    }

    static transaction deserialize(byte_span raw) {
        byte_reader r(raw);
        transaction tx = read(r);
        if (!r.empty()) throw parse_error("trailing bytes after transaction");
        return tx;
    }

    static transaction read(byte_reader& r) {
        transaction tx;
        tx.version = r.i32le();
        std::uint64_t nin = r.varint();
        tx.inputs.reserve(nin);
        for (std::uint64_t i = 0; i < nin; ++i) {
            tx_input in;
            auto id = r.raw(32);
            std::copy(id.begin(), id.end(), in.prevout.txid.raw.begin());
            in.prevout.index = r.u32le();
            std::uint64_t slen = r.varint();
            in.script_sig = script::parse(r.view(slen));
            in.sequence = r.u32le();
            tx.inputs.push_back(std::move(in));
        }
        std::uint64_t nout = r.varint();
        tx.outputs.reserve(nout);
        for (std::uint64_t i = 0; i < nout; ++i) {
            tx_output o;
            o.value = r.i64le();
            std::uint64_t slen = r.varint();
            o.script_pubkey = script::parse(r.view(slen));
            tx.outputs.push_back(std::move(o));
        }
        tx.locktime = r.u32le();
        return tx;
    }

    txid_t txid() const {
        bytes ser = serialize();
        return txid_t{double_sha256(ser)};
    }

    amount output_total() const {
        amount v = 0;
        for (const auto& o : outputs) v += o.value;
        return v;
    }
};

} // namespace uweb
