// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bytes.hpp"
#include "hash.hpp"

namespace uweb {

// Opcode subset sufficient for the constructs in this toolkit. Unknown
// opcodes still round-trip through parse/serialize as opaque single bytes;
// they are only rejected if a script containing them is executed.
enum opcode : std::uint8_t {
    OP_0 = 0x00,
    OP_PUSHDATA1 = 0x4c,
    OP_PUSHDATA2 = 0x4d,
    OP_PUSHDATA4 = 0x4e,
    OP_1 = 0x51,
    OP_RETURN = 0x6a,
    OP_DROP = 0x75,
    OP_DUP = 0x76,
    OP_EQUAL = 0x87,
    OP_EQUALVERIFY = 0x88,
    OP_HASH160 = 0xa9,
    OP_CHECKSIG = 0xac,
    OP_CHECKSIGVERIFY = 0xad,
    OP_CHECKMULTISIG = 0xae,
    OP_CHECKMULTISIGVERIFY = 0xaf,
};

// One script element. For data pushes `code` records the exact encoding
// used on the wire (direct length byte, OP_PUSHDATA1/2/4 or OP_0) so that
// serialization is byte-identical to what was parsed or built.
struct script_op {
    std::uint8_t code = 0;
    bytes data;

    bool is_push() const { return code <= OP_PUSHDATA4; }

    auto operator<=>(const script_op&) const = default;

    static script_op push_direct(byte_span d) {
        if (d.empty()) return {OP_0, {}};
        if (d.size() > 75) throw parse_error("direct push limited to 75 bytes");
        return {static_cast<std::uint8_t>(d.size()), bytes(d.begin(), d.end())};
    }

    static script_op push_data1(byte_span d) {
        if (d.size() > 0xff) throw parse_error("pushdata1 limited to 255 bytes");
        return {OP_PUSHDATA1, bytes(d.begin(), d.end())};
    }

    static script_op push_data2(byte_span d) {
        if (d.size() > 0xffff) throw parse_error("pushdata2 limited to 65535 bytes");
        return {OP_PUSHDATA2, bytes(d.begin(), d.end())};
    }

    static script_op op(std::uint8_t code) { return {code, {}}; }
};

struct script {
    std::vector<script_op> ops;

    auto operator<=>(const script&) const = default;

    bool empty() const { return ops.empty(); }

    script& add(script_op op) {
        ops.push_back(std::move(op));
        return *this;
    }

    bytes serialize() const {
        bytes out;
        byte_writer w(out);
        for (const auto& op : ops) {
            w.u8(op.code);
            if (!op.is_push()) continue;
            switch (op.code) {
                case OP_PUSHDATA1:
                    w.u8(static_cast<std::uint8_t>(op.data.size()));
                    break;
                case OP_PUSHDATA2:
                    w.u16le(static_cast<std::uint16_t>(op.data.size()));
                    break;
                case OP_PUSHDATA4:
                    w.u32le(static_cast<std::uint32_t>(op.data.size()));
                    break;
                default:
                    break; // OP_0 and direct pushes carry the length in the opcode
            }
            w.raw(op.data);
        }
        return out;
    }

    std::size_t serialized_size() const {
        std::size_t n = 0;
        for (const auto& op : ops) {
            n += 1;
            if (!op.is_push()) continue;
            if (op.code == OP_PUSHDATA1) n += 1;
            else if (op.code == OP_PUSHDATA2) n += 2;
            else if (op.code == OP_PUSHDATA4) n += 4;
            n += op.data.size();
        }
        return n;
    }

    static script parse(byte_span raw) {
        script s;
        byte_reader r(raw);
        while (!r.empty()) {
            std::uint8_t code = r.u8();
            script_op op{code, {}};
            if (code >= 1 && code <= 75) {
                op.data = r.raw(code);
            } else if (code == OP_PUSHDATA1) {
                op.data = r.raw(r.u8());
            } else if (code == OP_PUSHDATA2) {
                op.data = r.raw(r.u16le());
            } else if (code == OP_PUSHDATA4) {
                op.data = r.raw(r.u32le());
            }
            s.ops.push_back(std::move(op));
        }
        return s;
    }

    bool is_push_only() const {
        for (const auto& op : ops)
            if (!op.is_push()) return false;
        return true;
    }

    bool contains(std::uint8_t code) const {
        for (const auto& op : ops)
            if (op.code == code) return true;
        return false;
    }

    // ---- canonical output script patterns -----------------------------

    static script p2sh(const digest160& redeem_hash) {
        script s;
        s.add(script_op::op(OP_HASH160));
        s.add(script_op::push_direct(byte_span(redeem_hash.data(), redeem_hash.size())));
        s.add(script_op::op(OP_EQUAL));
        return s;
    }

    static script op_return(byte_span payload) {
        script s;
        s.add(script_op::op(OP_RETURN));
        if (!payload.empty())
            s.add(payload.size() <= 75 ? script_op::push_direct(payload)
                                       : script_op::push_data1(payload));
        return s;
    }

    static script p2pkh(const digest160& key_hash) {
        script s;
        s.add(script_op::op(OP_DUP));
        s.add(script_op::op(OP_HASH160));
        s.add(script_op::push_direct(byte_span(key_hash.data(), key_hash.size())));
        s.add(script_op::op(OP_EQUALVERIFY));
        s.add(script_op::op(OP_CHECKSIG));
        return s;
    }

    std::optional<digest160> p2sh_hash() const {
        if (ops.size() != 3 || ops[0].code != OP_HASH160 || ops[1].code != 0x14 ||
            ops[2].code != OP_EQUAL)
            return std::nullopt;
        digest160 h;
        std::copy(ops[1].data.begin(), ops[1].data.end(), h.begin());
        return h;
    }

    bool is_op_return() const { return !ops.empty() && ops[0].code == OP_RETURN; }

    // Data carried after OP_RETURN (concatenation of the trailing pushes).
    bytes op_return_payload() const {
        bytes out;
        if (!is_op_return()) return out;
        for (std::size_t i = 1; i < ops.size(); ++i) {
            if (!ops[i].is_push()) return {};
            append(out, ops[i].data);
        }
        return out;
    }

    // Bare multisig: a non-P2SH output whose final operator is a
    // CHECKMULTISIG variant.
    bool is_bare_multisig() const {
        return !ops.empty() && (ops.back().code == OP_CHECKMULTISIG ||
                                ops.back().code == OP_CHECKMULTISIGVERIFY);
    }
};

// ---- execution ---------------------------------------------------------

struct exec_result {
    bool ok = false;
    std::string reason;
    std::vector<bytes> stack;
};

inline bool cast_to_bool(const bytes& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0) {
            if (i == v.size() - 1 && v[i] == 0x80) return false; // negative zero
            return true;
        }
    }
    return false;
}

// Evaluates the stack-machine subset used by the data constructs: pushes,
// OP_DROP, OP_HASH160, OP_EQUAL(VERIFY). Signature operators are not
// executable here (nothing in this toolkit needs them to run); hitting one
// fails the evaluation.
inline exec_result execute_script(const script& s, std::vector<bytes> stack = {}) {
    exec_result res;
    res.stack = std::move(stack);
    for (const auto& op : s.ops) {
        if (op.is_push()) {
            if (op.data.size() > 520) {
                res.reason = "push exceeds 520 bytes";
                return res;
            }
            res.stack.push_back(op.data);
            continue;
        }
        switch (op.code) {
            case OP_DROP:
                if (res.stack.empty()) { res.reason = "stack underflow"; return res; }
                res.stack.pop_back();
                break;
            case OP_HASH160: {
                if (res.stack.empty()) { res.reason = "stack underflow"; return res; }
                auto h = hash160(res.stack.back());
                res.stack.back() = to_vec(h);
                break;
            }
            case OP_EQUAL:
            case OP_EQUALVERIFY: {
                if (res.stack.size() < 2) { res.reason = "stack underflow"; return res; }
                bool eq = res.stack[res.stack.size() - 1] == res.stack[res.stack.size() - 2];
                res.stack.pop_back();
                res.stack.pop_back();
                if (op.code == OP_EQUAL) {
                    res.stack.push_back(eq ? bytes{0x01} : bytes{});
                } else if (!eq) {
                    res.reason = "equalverify failed";
                    return res;
                }
                break;
            }
            case OP_RETURN:
                res.reason = "op_return in executed script";
                return res;
            default:
                res.reason = "unsupported opcode 0x" + hex_encode(byte_span(&op.code, 1));
                return res;
        }
    }
    res.ok = true;
    return res;
}

} // namespace uweb
