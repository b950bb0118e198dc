// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <uweb/hash.hpp>
#include <uweb/standardness.hpp>

using namespace uweb;

namespace {

// A minimal standard transaction: one input, one comfortable P2SH output.
transaction base_tx() {
    transaction tx;
    tx_input in;
    in.prevout = {txid_t{sha256_digest(to_bytes("funding"))}, 0};
    in.script_sig.add(script_op::push_direct(bytes{0x01}));
    tx.inputs.push_back(in);
    tx.outputs.push_back({10'000, script::p2sh(hash160(to_bytes("dest")))});
    return tx;
}

chain_context rich_context(amount per_input) {
    chain_context ctx;
    ctx.input_value = [per_input](const outpoint&) -> std::optional<amount> {
        return per_input;
    };
    return ctx;
}

} // namespace

TEST_CASE("base transaction is standard") {
    auto rep = check_standard(base_tx(), rich_context(100'000));
    CHECK(rep.passed);
    CHECK(rep.violations.empty());
    CHECK(rep.fee.has_value());
}

TEST_CASE("rule: no-inputs / no-outputs") {
    transaction tx = base_tx();
    tx.inputs.clear();
    CHECK(check_standard(tx).has(rule::no_inputs));

    tx = base_tx();
    tx.outputs.clear();
    CHECK(check_standard(tx).has(rule::no_outputs));
}

TEST_CASE("rule: size") {
    transaction tx = base_tx();
    // enough 520-byte pushes to exceed 100,000 bytes
    for (int i = 0; i < 200; ++i)
        tx.inputs[0].script_sig.add(script_op::push_data2(bytes(520, 0x00)));
    auto rep = check_standard(tx, rich_context(1'000'000));
    CHECK(rep.tx_size > policy::max_tx_size);
    CHECK(rep.has(rule::size));
}

TEST_CASE("rule: input-script-size boundary") {
    transaction tx = base_tx();
    tx.inputs[0].script_sig = script{};
    // three pushdata2 pushes of 520 bytes: 3*523 = 1569; add padding pushes to
    // land exactly on the limit, then one byte over.
    tx.inputs[0].script_sig.add(script_op::push_data2(bytes(520, 0x00)));
    tx.inputs[0].script_sig.add(script_op::push_data2(bytes(520, 0x00)));
    tx.inputs[0].script_sig.add(script_op::push_data2(bytes(520, 0x00)));
    tx.inputs[0].script_sig.add(script_op::push_data1(bytes(79, 0x00)));
    REQUIRE(tx.inputs[0].script_sig.serialized_size() == 1'650);
    CHECK_FALSE(check_standard(tx, rich_context(1'000'000)).has(rule::input_script_size));

    tx.inputs[0].script_sig.ops.back() = script_op::push_data1(bytes(80, 0x00));
    REQUIRE(tx.inputs[0].script_sig.serialized_size() == 1'651);
    CHECK(check_standard(tx, rich_context(1'000'000)).has(rule::input_script_size));
}

TEST_CASE("rule: push-size boundary") {
    transaction tx = base_tx();
    tx.inputs[0].script_sig = script{};
    tx.inputs[0].script_sig.add(script_op::push_data2(bytes(520, 0x00)));
    CHECK_FALSE(check_standard(tx, rich_context(1'000'000)).has(rule::push_size));

    tx.inputs[0].script_sig = script{};
    tx.inputs[0].script_sig.add(script_op::push_data2(bytes(521, 0x00)));
    CHECK(check_standard(tx, rich_context(1'000'000)).has(rule::push_size));
}

TEST_CASE("rule: op-ret-count") {
    transaction tx = base_tx();
    tx.outputs.push_back({0, script::op_return(to_bytes("a"))});
    CHECK_FALSE(check_standard(tx, rich_context(100'000)).has(rule::op_ret_count));
    tx.outputs.push_back({0, script::op_return(to_bytes("b"))});
    CHECK(check_standard(tx, rich_context(100'000)).has(rule::op_ret_count));
}

TEST_CASE("rule: op-ret-size") {
    transaction tx = base_tx();
    tx.outputs.push_back({0, script::op_return(bytes(80, 0x00))});
    CHECK_FALSE(check_standard(tx, rich_context(100'000)).has(rule::op_ret_size));
    tx.outputs.back().script_pubkey = script::op_return(bytes(81, 0x00));
    CHECK(check_standard(tx, rich_context(100'000)).has(rule::op_ret_size));
}

TEST_CASE("rule: op-ret-value") {
    transaction tx = base_tx();
    tx.outputs.push_back({1, script::op_return(to_bytes("a"))});
    CHECK(check_standard(tx, rich_context(100'000)).has(rule::op_ret_value));
}

TEST_CASE("rule: bare-multisig") {
    transaction tx = base_tx();
    script ms;
    ms.add(script_op::op(OP_1));
    ms.add(script_op::push_direct(bytes(33, 0x02)));
    ms.add(script_op::op(OP_1));
    ms.add(script_op::op(OP_CHECKMULTISIG));
    tx.outputs.push_back({10'000, ms});
    CHECK(check_standard(tx, rich_context(100'000)).has(rule::bare_multisig));
}

TEST_CASE("rule: output-count boundary") {
    transaction tx = base_tx();
    tx.outputs.assign(policy::max_outputs,
                      {policy::dust_threshold, script::p2sh(digest160{})});
    CHECK_FALSE(check_standard(tx, rich_context(10'000'000)).has(rule::output_count));
    tx.outputs.push_back({policy::dust_threshold, script::p2sh(digest160{})});
    CHECK(check_standard(tx, rich_context(10'000'000)).has(rule::output_count));
}

TEST_CASE("rule: dust boundary") {
    transaction tx = base_tx();
    tx.outputs[0].value = policy::dust_threshold;
    CHECK_FALSE(check_standard(tx, rich_context(100'000)).has(rule::dust));
    tx.outputs[0].value = policy::dust_threshold - 1;
    CHECK(check_standard(tx, rich_context(100'000)).has(rule::dust));
    // zero-value OP_RETURN outputs are exempt
    transaction tx2 = base_tx();
    tx2.outputs.push_back({0, script::op_return(to_bytes("x"))});
    CHECK_FALSE(check_standard(tx2, rich_context(100'000)).has(rule::dust));
}

TEST_CASE("rule: overspend") {
    transaction tx = base_tx();
    tx.outputs[0].value = 200'000;
    auto rep = check_standard(tx, rich_context(100'000));
    CHECK(rep.has(rule::overspend));
    CHECK_FALSE(rep.has(rule::min_fee));
}

TEST_CASE("rule: min-fee boundary") {
    transaction tx = base_tx();
    std::size_t sz = tx.serialized_size();
    amount in_val = static_cast<amount>(tx.outputs[0].value + sz);
    // fee exactly size * rate passes
    CHECK(check_standard(tx, rich_context(in_val)).passed);
    // one base unit short fails
    CHECK(check_standard(tx, rich_context(in_val - 1)).has(rule::min_fee));
}

TEST_CASE("fee rules unevaluated without context") {
    transaction tx = base_tx();
    auto rep = check_standard(tx);
    CHECK(rep.passed);
    REQUIRE(rep.unevaluated.size() == 2);
    CHECK_FALSE(rep.fee.has_value());

    // a context that cannot resolve the input behaves the same
    chain_context ctx;
    ctx.input_value = [](const outpoint&) -> std::optional<amount> { return std::nullopt; };
    auto rep2 = check_standard(tx, ctx);
    CHECK(rep2.passed);
    CHECK(rep2.unevaluated.size() == 2);
}

TEST_CASE("violations accumulate") {
    transaction tx;
    tx.outputs.push_back({0, script::op_return(bytes(81, 0x00))});
    tx.outputs.push_back({0, script::op_return(bytes(81, 0x00))});
    auto rep = check_standard(tx);
    CHECK(rep.has(rule::no_inputs));
    CHECK(rep.has(rule::op_ret_count));
    CHECK(rep.has(rule::op_ret_size));
    CHECK_FALSE(rep.passed);
}
