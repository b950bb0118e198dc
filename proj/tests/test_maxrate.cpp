// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <uweb/manifest.hpp>
#include <uweb/maxrate.hpp>
#include <uweb/standardness.hpp>
#include <uweb/workload.hpp>

using namespace uweb;
using namespace uweb::maxrate;

namespace {

bytes pattern_payload(std::size_t n, std::uint8_t salt = 0) {
    bytes data(n);
    for (std::size_t i = 0; i < n; ++i)
        data[i] = static_cast<std::uint8_t>((i * 31 + 7 + salt) & 0xff);
    return data;
}

source_utxo rich_source(amount value) {
    return {{sim::synth_txid("source", 1, 2), 0}, value};
}

digest160 wallet_addr() { return hash160(to_bytes("wallet")); }

// Standardness context resolving inputs from a set of parent transactions.
chain_context parents_context(const std::vector<const transaction*>& parents) {
    std::vector<transaction> held;
    held.reserve(parents.size());
    for (const auto* p : parents) held.push_back(*p);
    chain_context ctx;
    ctx.input_value = [held](const outpoint& op) -> std::optional<amount> {
        for (const auto& p : held)
            if (p.txid() == op.txid && op.index < p.outputs.size())
                return p.outputs[op.index].value;
        // opaque external funding: assume exactly covering value is unknowable,
        // so return nothing and leave fee rules unevaluated for those inputs
        return std::nullopt;
    };
    return ctx;
}

} // namespace

// ---- size arithmetic oracles ------------------------------------------------

TEST_CASE("per-chunk script and input sizes") {
    // q = 1,568 payload bytes: three 520-byte parts + 8-byte tail in the redeem
    CHECK(input_script_size_for_payload(1'568) == 1'650);
    CHECK(input_size_for_payload(1'568) == 1'693);
    // one-byte chunk: parts a=1, b=0, c=0, tail empty
    CHECK(input_script_size_for_payload(1) == 83);
    CHECK(input_size_for_payload(1) == 36 + 4 + 1 + 83);
}

TEST_CASE("full spending transaction size") {
    std::vector<std::size_t> chunks(59, 1'568);
    CHECK(spending_tx_size(chunks) == 99'931);
}

TEST_CASE("funding fan-out sizes") {
    CHECK(fan_out_tx_size(2'937) == 94'144);
    CHECK(fan_out_tx_size(1) == 157 + 1 + 32);
    // 2,936 data outputs + 1 change = the largest standard fan-out
    CHECK(2'936 * 1'568 == 4'603'648);
}

TEST_CASE("chunking splits parts correctly") {
    bytes payload = pattern_payload(1'568 + 700);
    auto chunks = chunk_payload(payload);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].part_a.size() == 520);
    CHECK(chunks[0].part_b.size() == 520);
    CHECK(chunks[0].part_c.size() == 520);
    CHECK(chunks[0].tail.size() == 8);
    CHECK(chunks[1].part_a.size() == 520);
    CHECK(chunks[1].part_b.size() == 180);
    CHECK(chunks[1].part_c.empty());
    CHECK(chunks[1].tail.empty());

    bytes glued;
    for (const auto& c : chunks) {
        append(glued, c.part_a);
        append(glued, c.part_b);
        append(glued, c.part_c);
        append(glued, c.tail);
    }
    CHECK(glued == payload);
}

TEST_CASE("data script spends verify and tampering fails") {
    bytes payload = pattern_payload(1'568);
    auto chunks = chunk_payload(payload);
    auto ds = build_data_script(chunks[0]);

    script funding = script::p2sh(hash160(ds.redeem));
    CHECK(verify_spend(funding, ds.script_sig));

    // flip one payload byte inside part b
    auto tampered = ds.script_sig;
    tampered.ops[1].data[100] ^= 0x01;
    CHECK_FALSE(verify_spend(funding, tampered));

    // swap parts a and b (same bytes, wrong order)
    auto swapped = ds.script_sig;
    std::swap(swapped.ops[0].data, swapped.ops[1].data);
    CHECK_FALSE(verify_spend(funding, swapped));

    // tamper with the redeem script byte (breaks the P2SH hash)
    auto redeemed = ds.script_sig;
    redeemed.ops[3].data.back() ^= 0x01;
    CHECK_FALSE(verify_spend(funding, redeemed));

    // extraction returns the chunk payload
    auto got = extract_chunk_payload(ds.script_sig);
    REQUIRE(got.has_value());
    CHECK(*got == payload);
}

// ---- planning -----------------------------------------------------------------

TEST_CASE("single-epoch-capacity plan shape") {
    auto plan = plan_construct(4'603'648);
    CHECK(plan.chunk_count == 2'936);
    CHECK(plan.funding_tx_count() == 1);
    CHECK(plan.funding_data_outputs[0] == 2'936);
    CHECK(plan.funding_tx_sizes[0] == 94'144);
    CHECK(plan.spending_tx_count() == 50);
    CHECK(plan.preparing_tree_depth == 0);
    CHECK(plan.epochs == 2);
    // 49 full spendings and one 45-input remainder
    for (std::size_t i = 0; i < 49; ++i) CHECK(plan.spending_txs[i].size == 99'931);
    CHECK(plan.spending_txs[49].input_count == 45);
}

TEST_CASE("plan for the 380,005-byte bundle") {
    auto plan = plan_construct(380'005);
    CHECK(plan.chunk_count == 243);
    CHECK(plan.funding_tx_count() == 1);
    CHECK(plan.spending_tx_count() == 5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(plan.spending_txs[i].size == 99'931);
    CHECK(plan.spending_txs[4].size == 10'876);
    CHECK(plan.epochs == 2);
}

TEST_CASE("plan rejects empty payloads") {
    CHECK_THROWS_AS(plan_construct(0), std::invalid_argument);
}

TEST_CASE("cost arithmetic for the article bundle") {
    auto plan = plan_construct(370'700);
    CHECK(plan.total_size == 408'319);
    cost_model m;
    amount cost = estimate_cost(370'700, m);
    CHECK(cost == 408'319);
    double mltc = static_cast<double>(cost) / MILLI_COIN * 1'000.0; // 1 unit/byte chain
    (void)mltc;
}

TEST_CASE("multi-funding plans cover big payloads") {
    auto plan = plan_construct(10'000'000);
    CHECK(plan.chunk_count == 6'378);
    CHECK(plan.funding_tx_count() == 3);
    CHECK(plan.funding_data_outputs[0] == 2'936);
    CHECK(plan.funding_data_outputs[2] == 6'378 - 2 * 2'936);
    CHECK(plan.preparing_tree_depth >= 1);
    CHECK(plan.epochs >= 3);
}

// ---- estimators ----------------------------------------------------------------

TEST_CASE("throughput estimate near the reference point") {
    cost_model m;
    double r = estimate_throughput(46'000'000, m);
    CHECK(r > 152'000.0);
    CHECK(r < 156'000.0);
}

TEST_CASE("goodput formula near capacity") {
    cost_model m;
    double g = estimate_goodput(45'000'000, m);
    CHECK(g > 0.90);
    CHECK(g < 0.92);
}

// ---- building -------------------------------------------------------------------

TEST_CASE("built construct round-trips the payload byte-for-byte") {
    for (std::size_t n : {std::size_t{1}, std::size_t{519}, std::size_t{520},
                          std::size_t{1'568}, std::size_t{1'569}, std::size_t{40'000}}) {
        bytes payload = pattern_payload(n, static_cast<std::uint8_t>(n));
        auto built = build_construct(payload, rich_source(100 * COIN), wallet_addr());
        CHECK(reassemble_payload(built.spending_txs) == payload);
        CHECK(built.plan.payload_size == n);
    }
}

TEST_CASE("built sizes match the plan exactly") {
    bytes payload = pattern_payload(380'005);
    auto built = build_construct(payload, rich_source(100 * COIN), wallet_addr());

    REQUIRE(built.funding_txs.size() == built.plan.funding_tx_count());
    for (std::size_t i = 0; i < built.funding_txs.size(); ++i)
        CHECK(built.funding_txs[i].serialized_size() == built.plan.funding_tx_sizes[i]);

    REQUIRE(built.spending_txs.size() == built.plan.spending_tx_count());
    for (std::size_t i = 0; i < built.spending_txs.size(); ++i)
        CHECK(built.spending_txs[i].serialized_size() == built.plan.spending_txs[i].size);

    CHECK(built.total_size() == built.plan.total_size);
    CHECK(reassemble_payload(built.spending_txs) == payload);
}

TEST_CASE("every built transaction passes relay policy") {
    bytes payload = pattern_payload(200'000);
    auto built = build_construct(payload, rich_source(100 * COIN), wallet_addr());

    std::vector<const transaction*> parents;
    for (const auto& level : built.preparing_levels)
        for (const auto& tx : level) parents.push_back(&tx);
    for (const auto& tx : built.funding_txs) parents.push_back(&tx);
    auto ctx = parents_context(parents);

    std::size_t checked = 0;
    for (const auto& level : built.preparing_levels)
        for (const auto& tx : level) {
            auto rep = check_standard(tx, ctx);
            INFO("preparing " << tx.txid().display() << ": "
                              << (rep.violations.empty() ? "" : rep.violations[0]));
            CHECK(rep.violations.empty());
            ++checked;
        }
    for (const auto& tx : built.funding_txs) {
        auto rep = check_standard(tx, ctx);
        INFO("funding " << tx.txid().display() << ": "
                        << (rep.violations.empty() ? "" : rep.violations[0]));
        CHECK(rep.violations.empty());
        ++checked;
    }
    for (const auto& tx : built.spending_txs) {
        auto rep = check_standard(tx, ctx);
        INFO("spending " << tx.txid().display() << ": "
                         << (rep.violations.empty() ? "" : rep.violations[0]));
        CHECK(rep.passed);
        REQUIRE(rep.fee.has_value());
        // exact minimum fee: the partial spending is not overpaid
        CHECK(*rep.fee == static_cast<amount>(rep.tx_size));
        ++checked;
    }
    CHECK(checked >= 4);
}

TEST_CASE("insufficient funding is reported with the shortfall") {
    bytes payload = pattern_payload(10'000);
    try {
        build_construct(payload, rich_source(1'000), wallet_addr());
        FAIL("expected insufficient_funds");
    } catch (const insufficient_funds& e) {
        CHECK(e.shortfall > 0);
    }
}

TEST_CASE("every funding data output is spent by exactly one spending input") {
    bytes payload = pattern_payload(5'000);
    auto built = build_construct(payload, rich_source(10 * COIN), wallet_addr());
    REQUIRE(built.funding_txs.size() == 1);
    txid_t fid = built.funding_txs[0].txid();
    std::size_t data_outputs = built.funding_txs[0].outputs.size() - 1;

    std::vector<int> seen(data_outputs, 0);
    for (const auto& sp : built.spending_txs)
        for (const auto& in : sp.inputs) {
            REQUIRE(in.prevout.txid == fid);
            REQUIRE(in.prevout.index < data_outputs);
            ++seen[in.prevout.index];
        }
    for (int c : seen) CHECK(c == 1);
}

TEST_CASE("spend records index the spending transactions") {
    bytes payload = pattern_payload(200'000);
    auto built = build_construct(payload, rich_source(100 * COIN), wallet_addr());
    auto digest = sha256_digest(payload);
    for (std::size_t i = 0; i < built.spending_txs.size(); ++i) {
        const auto& tx = built.spending_txs[i];
        REQUIRE(tx.outputs.size() == 1);
        REQUIRE(tx.outputs[0].script_pubkey.is_op_return());
        bytes rec = tx.outputs[0].script_pubkey.op_return_payload();
        CHECK(rec == spend_record(static_cast<std::uint16_t>(i), digest));
        CHECK(rec.size() == 23);
    }
}

// ---- manifest interchange --------------------------------------------------------

TEST_CASE("manifest round trip") {
    bytes payload = pattern_payload(20'000);
    auto built = build_construct(payload, rich_source(10 * COIN), wallet_addr());
    auto m = make_manifest(built);

    CHECK(m.payload_size == payload.size());
    CHECK(m.entries.size() ==
          built.funding_txs.size() + built.spending_txs.size());

    auto j = manifest_to_json(m);
    auto back = manifest_from_json(j);
    REQUIRE(back.entries.size() == m.entries.size());
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(back.entries[i].txid == m.entries[i].txid);
        CHECK(back.entries[i].role == m.entries[i].role);
        CHECK(back.entries[i].tx == m.entries[i].tx);
    }

    // tampering with tx bytes must be caught by the txid cross-check
    auto bad = j;
    std::string hex = bad["transactions"][0]["hex"].get<std::string>();
    hex[hex.size() - 1] = hex[hex.size() - 1] == '0' ? '1' : '0';
    bad["transactions"][0]["hex"] = hex;
    CHECK_THROWS(manifest_from_json(bad));
}
