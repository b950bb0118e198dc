// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <uweb/chainsim.hpp>
#include <uweb/hash.hpp>
#include <uweb/workload.hpp>

using namespace uweb;
using namespace uweb::sim;

namespace {

sim_tx synth(std::string_view tag, std::uint64_t n, std::size_t size, amount fee,
             tx_class klass = tx_class::financial) {
    sim_tx t;
    t.id = synth_txid(tag, n, 0);
    t.size = size;
    t.fee = fee;
    t.klass = klass;
    return t;
}

// Byte-true helper: spends one confirmed outpoint into one P2SH output.
transaction spend_tx(const outpoint& from, amount in_value, amount fee, std::uint8_t salt) {
    transaction tx;
    tx.inputs.push_back({from, maxrate::opaque_scriptsig(), 0xffffffff});
    tx.outputs.push_back({in_value - fee, script::p2sh(hash160(bytes{salt}))});
    return tx;
}

} // namespace

TEST_CASE("grant mints confirmed spendable outputs") {
    chain c;
    auto outs = c.grant(5, COIN, script::p2sh(digest160{}));
    REQUIRE(outs.size() == 5);
    CHECK(c.height() == 1);
    for (const auto& op : outs) {
        REQUIRE(c.utxo_value(op).has_value());
        CHECK(*c.utxo_value(op) == COIN);
    }
}

TEST_CASE("blocks include arrivals strictly before the boundary") {
    chain c;
    c.submit(synth("a", 1, 500, 5'000), 149.999);
    c.submit(synth("b", 2, 500, 5'000), 150.0); // exactly at the boundary: next block
    const block& b1 = c.mine(150.0);
    REQUIRE(b1.txs.size() == 1);
    CHECK(b1.txs[0].id == synth_txid("a", 1, 0));
    const block& b2 = c.mine(300.0);
    REQUIRE(b2.txs.size() == 1);
    CHECK(b2.txs[0].id == synth_txid("b", 2, 0));
}

TEST_CASE("greedy packing by fee rate with gap fill") {
    chain c;
    // nine rate-2.0 txs leave a 99,750-byte gap; the rate-1.5 candidate no
    // longer fits, the slightly smaller rate-1.4 one behind it does.
    for (std::uint64_t i = 0; i < 9; ++i)
        c.submit(synth("big", i, 100'000, 200'000), 1.0 + static_cast<double>(i));
    c.submit(synth("mid", 20, 99'800, 149'700), 20.0);
    c.submit(synth("fill", 21, 99'700, 139'580), 21.0);
    const block& b = c.mine(150.0);
    REQUIRE(b.txs.size() == 10);
    for (std::size_t i = 0; i < 9; ++i) CHECK(b.txs[i].id == synth_txid("big", i, 0));
    CHECK(b.txs[9].id == synth_txid("fill", 21, 0));
    CHECK(b.total_size <= policy::max_block_size);
    CHECK(b.total_size == c.params().coinbase_size + 999'700);

    const block& b2 = c.mine(300.0);
    REQUIRE(b2.txs.size() == 1);
    CHECK(b2.txs[0].id == synth_txid("mid", 20, 0));
}

TEST_CASE("ties break by arrival time, then submission order") {
    chain c;
    c.submit(synth("late", 1, 400, 800), 20.0);
    c.submit(synth("early", 2, 400, 800), 10.0);
    auto s3 = synth("also10", 3, 400, 800);
    c.submit(s3, 10.0); // same rate and time as "early": submit order decides
    const block& b = c.mine(150.0);
    REQUIRE(b.txs.size() == 3);
    CHECK(b.txs[0].id == synth_txid("early", 2, 0));
    CHECK(b.txs[1].id == synth_txid("also10", 3, 0));
    CHECK(b.txs[2].id == synth_txid("late", 1, 0));
}

TEST_CASE("children never precede their parents in a block") {
    chain c;
    auto parent = synth("p", 1, 400, 400); // low rate
    auto child = synth("c", 2, 400, 40'000); // very high rate
    child.parents.push_back(parent.id);
    c.submit(parent, 1.0);
    c.submit(child, 2.0);
    const block& b = c.mine(150.0);
    REQUIRE(b.txs.size() == 2);
    CHECK(b.txs[0].id == parent.id);
    CHECK(b.txs[1].id == child.id);
}

TEST_CASE("a child whose parent misses the block waits") {
    chain c;
    // ten fillers consume the block down to a 750-byte gap at a high rate
    for (std::uint64_t i = 0; i < 10; ++i)
        c.submit(synth("filler", i, 99'900, 9'990'000), 0.5);
    auto parent = synth("p", 1, 5'000, 5'000); // rate 1: loses to the fillers
    auto child = synth("c", 2, 400, 40'000);
    child.parents.push_back(parent.id);
    c.submit(parent, 1.0);
    c.submit(child, 2.0);

    const block& b1 = c.mine(150.0);
    REQUIRE(b1.txs.size() == 10);
    CHECK(b1.txs[0].id == synth_txid("filler", 0, 0));

    const block& b2 = c.mine(300.0);
    REQUIRE(b2.txs.size() == 2);
    CHECK(b2.txs[0].id == parent.id);
    CHECK(b2.txs[1].id == child.id);
}

TEST_CASE("admission rejections carry rule ids") {
    chain c;
    auto outs = c.grant(3, COIN, script::p2sh(digest160{}));

    SECTION("duplicate") {
        auto tx = spend_tx(outs[0], COIN, 10'000, 1);
        CHECK(c.submit(tx, tx_class::financial, 1.0).accepted);
        auto res = c.submit(tx, tx_class::financial, 2.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::duplicate);
    }

    SECTION("missing-input") {
        outpoint ghost{synth_txid("ghost", 1, 0), 0};
        auto tx = spend_tx(ghost, COIN, 10'000, 2);
        auto res = c.submit(tx, tx_class::financial, 1.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::missing_input);
    }

    SECTION("double-spend is first-seen") {
        auto tx1 = spend_tx(outs[0], COIN, 10'000, 3);
        auto tx2 = spend_tx(outs[0], COIN, 20'000, 4); // higher fee, later arrival
        CHECK(c.submit(tx1, tx_class::financial, 1.0).accepted);
        auto res = c.submit(tx2, tx_class::financial, 2.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::double_spend);
        c.mine(150.0);
        CHECK(c.confirmed(tx1.txid()));
        CHECK_FALSE(c.confirmed(tx2.txid()));
    }

    SECTION("standardness violations surface directly") {
        auto tx = spend_tx(outs[1], COIN, 100, 5); // fee far below 1/byte
        auto res = c.submit(tx, tx_class::financial, 1.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::min_fee);
    }

    SECTION("overspend") {
        auto tx = spend_tx(outs[2], 2 * COIN, 10'000, 6); // outputs exceed input
        auto res = c.submit(tx, tx_class::financial, 1.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::overspend);
    }
}

TEST_CASE("unconfirmed chain limits") {
    chain c;
    auto outs = c.grant(1, 100 * COIN, script::p2sh(digest160{}));

    SECTION("count limit at 25") {
        outpoint tip = outs[0];
        amount value = 100 * COIN;
        transaction last;
        for (int i = 0; i < 25; ++i) {
            auto tx = spend_tx(tip, value, 10'000, static_cast<std::uint8_t>(i));
            auto res = c.submit(tx, tx_class::financial, 1.0 + i);
            REQUIRE(res.accepted);
            value -= 10'000;
            tip = {tx.txid(), 0};
            last = tx;
        }
        auto tx26 = spend_tx(tip, value, 10'000, 99);
        auto res = c.submit(tx26, tx_class::financial, 50.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::chain_count);
        // after a block confirms the chain, the descendant is admissible again
        c.mine(150.0);
        CHECK(c.submit(tx26, tx_class::financial, 151.0).accepted);
    }

    SECTION("size limit at 101 kB") {
        // A 93 kB standard fan-out followed by a 8 kB child crosses the
        // package allowance even though the chain has only two links.
        transaction fan;
        fan.inputs.push_back({outs[0], maxrate::opaque_scriptsig(), 0xffffffff});
        for (int i = 0; i < 2'900; ++i)
            fan.outputs.push_back({5'000, script::p2sh(digest160{})});
        REQUIRE(fan.serialized_size() == 92'960);
        REQUIRE(c.submit(fan, tx_class::financial, 1.0).accepted);

        transaction child;
        for (std::uint32_t i = 0; i < 55; ++i)
            child.inputs.push_back({{fan.txid(), i}, maxrate::opaque_scriptsig(), 0xffffffff});
        child.outputs.push_back({0, script::p2sh(hash160(bytes{0x07}))});
        amount in_total = 55 * 5'000;
        child.outputs[0].value = in_total - static_cast<amount>(child.serialized_size());
        REQUIRE(child.serialized_size() + 92'960 > 101'000);
        auto res = c.submit(child, tx_class::financial, 2.0);
        CHECK_FALSE(res.accepted);
        CHECK(res.reason == rule::chain_size);

        // once the fan-out confirms, the child is admissible
        c.mine(150.0);
        CHECK(c.submit(child, tx_class::financial, 151.0).accepted);
    }
}

TEST_CASE("value conservation: fees burn, the rest stays spendable") {
    chain c;
    auto outs = c.grant(4, COIN, script::p2sh(digest160{}));
    amount fees = 0;
    for (int i = 0; i < 3; ++i) {
        auto tx = spend_tx(outs[i], COIN, 5'000 + i, static_cast<std::uint8_t>(i));
        REQUIRE(c.submit(tx, tx_class::financial, 1.0 + i).accepted);
        fees += 5'000 + i;
    }
    c.mine(150.0);
    // total utxo value = granted minus burned fees
    amount total = 0;
    for (int i = 0; i < 3; ++i) {
        auto tx = spend_tx(outs[i], COIN, 5'000 + i, static_cast<std::uint8_t>(i));
        auto v = c.utxo_value({tx.txid(), 0});
        REQUIRE(v.has_value());
        total += *v;
    }
    auto v3 = c.utxo_value(outs[3]);
    REQUIRE(v3.has_value());
    total += *v3;
    CHECK(total == 4 * COIN - fees);
}

TEST_CASE("stats track delays and mempool peaks") {
    chain c;
    c.submit(synth("x", 1, 1'000, 2'000), 10.0);
    c.submit(synth("y", 2, 2'000, 4'000), 20.0);
    c.mine(150.0);
    auto st = c.stats();
    REQUIRE(st.txs.size() == 2);
    CHECK(st.peak_mempool_bytes == 3'000);
    CHECK(st.peak_mempool_count == 2);
    auto d = st.delays(tx_class::financial);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == Catch::Approx(140.0));
    CHECK(d[1] == Catch::Approx(130.0));
    REQUIRE(st.blocks.size() == 1);
    CHECK(st.blocks[0].tx_count == 3); // includes coinbase
}

TEST_CASE("simulation is deterministic") {
    auto run = [] {
        chain c;
        for (std::uint64_t i = 0; i < 500; ++i) {
            double t = static_cast<double>((i * 7919) % 1500);
            std::size_t size = 200 + (i * 37) % 5'000;
            amount fee = static_cast<amount>(size * (1 + i % 4));
            c.submit(synth("d", i, size, fee), t);
        }
        for (int e = 1; e <= 12; ++e) c.mine(150.0 * e);
        std::ostringstream os;
        write_tx_csv(c.stats(), os);
        write_block_csv(c.stats(), os);
        return os.str();
    };
    CHECK(run() == run());
}

TEST_CASE("utilization over a window of blocks") {
    chain c;
    // block 0: 900,000 payload bytes of maxrate plus one financial tx
    for (std::uint64_t i = 0; i < 9; ++i)
        c.submit(synth("m", i, 100'000, 100'000, tx_class::maxrate), 1.0 + static_cast<double>(i));
    c.submit(synth("f", 20, 50'000, 100'000, tx_class::financial), 20.0);
    c.mine(150.0);
    auto rows = c.stats().blocks;
    REQUIRE(rows.size() == 1);
    auto u = compute_utilization(rows);
    CHECK(u.any);
    CHECK(u.space == Catch::Approx(900'000.0 / (900'000 + 50'000 + 250)));
    CHECK(u.txn == Catch::Approx(9.0 / 11.0)); // nine of eleven txs incl coinbase
}

TEST_CASE("ks distance") {
    std::vector<double> a{1, 2, 3, 4, 5};
    CHECK(ks_distance(a, a) == 0.0);
    std::vector<double> b{11, 12, 13, 14, 15};
    CHECK(ks_distance(a, b) == 1.0);
    std::vector<double> c1{1, 2, 3};
    std::vector<double> c2{1, 2, 4};
    CHECK(ks_distance(c1, c2) == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("empty epochs still advance the chain") {
    chain c;
    c.mine(150.0);
    c.mine(300.0);
    CHECK(c.height() == 2);
    CHECK(c.blocks()[0].txs.empty());
    CHECK(c.now() == 300.0);
}

TEST_CASE("chain parameters are validated") {
    CHECK_THROWS_AS(chain(chain_params{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(chain(chain_params{-1.0}), std::invalid_argument);
}
