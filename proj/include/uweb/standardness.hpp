// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tx.hpp"

namespace uweb {

// Relay policy limits enforced by this toolkit.
namespace policy {
constexpr std::size_t max_tx_size = 100'000;
constexpr std::size_t max_block_size = 1'000'000;
constexpr std::size_t max_input_script_size = 1'650;
constexpr std::size_t max_push_size = 520;
constexpr std::size_t max_op_return_data = 80;
constexpr std::size_t max_outputs = 2'937;
constexpr amount min_fee_rate = 1; // base units per byte
constexpr amount dust_threshold = 546;
constexpr std::size_t max_ancestor_count = 25;
constexpr std::size_t max_ancestor_size = 101'000;
} // namespace policy

// Stable rule identifiers, also used by the mempool admission path and the
// mutation corpus in the test suite.
namespace rule {
inline constexpr const char* no_inputs = "no-inputs";
inline constexpr const char* no_outputs = "no-outputs";
inline constexpr const char* size = "size";
inline constexpr const char* input_script_size = "input-script-size";
inline constexpr const char* push_size = "push-size";
inline constexpr const char* op_ret_count = "op-ret-count";
inline constexpr const char* bare_multisig = "bare-multisig";
inline constexpr const char* op_ret_size = "op-ret-size";
inline constexpr const char* op_ret_value = "op-ret-value";
inline constexpr const char* output_count = "output-count";
inline constexpr const char* dust = "dust";
inline constexpr const char* overspend = "overspend";
inline constexpr const char* min_fee = "min-fee";
// admission-only rules
inline constexpr const char* duplicate = "duplicate";
inline constexpr const char* missing_input = "missing-input";
inline constexpr const char* double_spend = "double-spend";
inline constexpr const char* chain_count = "chain-count";
inline constexpr const char* chain_size = "chain-size";
} // namespace rule

// Resolves funded input values; absent values leave the fee rules
// unevaluated.
struct chain_context {
    std::function<std::optional<amount>(const outpoint&)> input_value;

    static chain_context none() { return chain_context{}; }
};

struct standardness_report {
    bool passed = false;
    std::vector<std::string> violations;
    std::vector<std::string> unevaluated;
    std::size_t tx_size = 0;
    std::optional<amount> fee;

    bool has(const std::string& id) const {
        for (const auto& v : violations)
            if (v == id) return true;
        return false;
    }
};

inline standardness_report check_standard(const transaction& tx,
                                          const chain_context& ctx = chain_context::none()) {
    standardness_report rep;
    rep.tx_size = tx.serialized_size();

    if (tx.inputs.empty()) rep.violations.push_back(rule::no_inputs);
    if (tx.outputs.empty()) rep.violations.push_back(rule::no_outputs);

    if (rep.tx_size > policy::max_tx_size) rep.violations.push_back(rule::size);

    bool oversized_script = false;
    bool oversized_push = false;
    for (const auto& in : tx.inputs) {
        if (in.script_sig.serialized_size() > policy::max_input_script_size) oversized_script = true;
        for (const auto& op : in.script_sig.ops)
            if (op.is_push() && op.data.size() > policy::max_push_size) oversized_push = true;
    }
    for (const auto& out : tx.outputs)
        for (const auto& op : out.script_pubkey.ops)
            if (op.is_push() && op.data.size() > policy::max_push_size) oversized_push = true;
    if (oversized_script) rep.violations.push_back(rule::input_script_size);
    if (oversized_push) rep.violations.push_back(rule::push_size);

    std::size_t op_ret_count = 0;
    bool bare_multisig = false;
    bool op_ret_oversize = false;
    bool op_ret_valued = false;
    bool dusty = false;
    for (const auto& out : tx.outputs) {
        if (out.script_pubkey.is_op_return()) {
            ++op_ret_count;
            if (out.script_pubkey.op_return_payload().size() > policy::max_op_return_data)
                op_ret_oversize = true;
            if (out.value != 0) op_ret_valued = true;
            continue; // dust rule waived for OP_RETURN
        }
        if (out.script_pubkey.is_bare_multisig()) bare_multisig = true;
        if (out.value < policy::dust_threshold) dusty = true;
    }
    if (op_ret_count > 1) rep.violations.push_back(rule::op_ret_count);
    if (bare_multisig) rep.violations.push_back(rule::bare_multisig);
    if (op_ret_oversize) rep.violations.push_back(rule::op_ret_size);
    if (op_ret_valued) rep.violations.push_back(rule::op_ret_value);
    if (tx.outputs.size() > policy::max_outputs) rep.violations.push_back(rule::output_count);
    if (dusty) rep.violations.push_back(rule::dust);

    // Fee rules need every input's value.
    std::optional<amount> input_total = 0;
    if (!ctx.input_value) {
        input_total.reset();
    } else {
        for (const auto& in : tx.inputs) {
            auto v = ctx.input_value(in.prevout);
            if (!v) {
                input_total.reset();
                break;
            }
            *input_total += *v;
        }
    }
    if (!input_total || tx.inputs.empty()) {
        rep.unevaluated.push_back(rule::overspend);
        rep.unevaluated.push_back(rule::min_fee);
    } else {
        amount fee = *input_total - tx.output_total();
        rep.fee = fee;
        if (fee < 0) {
            rep.violations.push_back(rule::overspend);
        } else if (fee < static_cast<amount>(rep.tx_size) * policy::min_fee_rate) {
            rep.violations.push_back(rule::min_fee);
        }
    }

    rep.passed = rep.violations.empty();
    return rep;
}

} // namespace uweb
