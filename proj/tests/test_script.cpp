// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <uweb/hash.hpp>
#include <uweb/script.hpp>

using namespace uweb;

TEST_CASE("push factories pick the minimal form") {
    auto d = script_op::push_direct(bytes(75, 0xaa));
    CHECK(d.is_push());
    CHECK_THROWS_AS(script_op::push_direct(bytes(76, 0xaa)), parse_error);

    auto p1 = script_op::push_data1(bytes(255, 0xbb));
    CHECK(p1.data.size() == 255);
    CHECK_THROWS_AS(script_op::push_data1(bytes(256, 0xbb)), parse_error);

    auto p2 = script_op::push_data2(bytes(520, 0xcc));
    CHECK(p2.data.size() == 520);
}

TEST_CASE("script serialization round trip") {
    script s;
    s.add(script_op::push_direct(bytes{0x01, 0x02, 0x03}));
    s.add(script_op::push_data1(bytes(100, 0x11)));
    s.add(script_op::push_data2(bytes(520, 0x22)));
    s.add(script_op::op(OP_DROP));
    s.add(script_op::op(OP_HASH160));
    s.add(script_op::op(OP_EQUAL));

    bytes raw = s.serialize();
    CHECK(raw.size() == s.serialized_size());
    // 1+3 direct, 2+100 pushdata1, 3+520 pushdata2, 3 plain ops
    CHECK(raw.size() == 4 + 102 + 523 + 3);

    script back = script::parse(raw);
    CHECK(back.serialize() == raw);
    REQUIRE(back.ops.size() == 6);
    CHECK(back.ops[0].data == bytes{0x01, 0x02, 0x03});
    CHECK(back.ops[2].data.size() == 520);
    CHECK(back.ops[3].code == OP_DROP);
}

TEST_CASE("script parse failures") {
    // direct push announcing 5 bytes with only 2 present
    CHECK_THROWS_AS(script::parse(bytes{0x05, 0x01, 0x02}), parse_error);
    // pushdata1 with missing length byte
    CHECK_THROWS_AS(script::parse(bytes{0x4c}), parse_error);
    // pushdata2 truncated body
    CHECK_THROWS_AS(script::parse(bytes{0x4d, 0x10, 0x00, 0x01}), parse_error);
}

TEST_CASE("standard output script shapes") {
    digest160 h = hash160(to_bytes("redeem"));

    script p2sh = script::p2sh(h);
    CHECK(p2sh.serialized_size() == 23);
    REQUIRE(p2sh.p2sh_hash().has_value());
    CHECK(*p2sh.p2sh_hash() == h);
    CHECK_FALSE(p2sh.is_op_return());

    script p2pkh = script::p2pkh(h);
    CHECK(p2pkh.serialized_size() == 25);
    CHECK_FALSE(p2pkh.p2sh_hash().has_value());

    script ret = script::op_return(to_bytes("hello"));
    CHECK(ret.is_op_return());
    CHECK(ret.op_return_payload() == to_bytes("hello"));
    CHECK(ret.serialized_size() == 1 + 1 + 5);
}

TEST_CASE("op_return payload sizing") {
    bytes payload(80, 0x5a);
    script s = script::op_return(payload);
    CHECK(s.op_return_payload() == payload);
    // 80 bytes needs OP_PUSHDATA1: OP_RETURN + 0x4c + len + body
    CHECK(s.serialized_size() == 1 + 2 + 80);
}

TEST_CASE("push-only detection") {
    script s;
    s.add(script_op::push_direct(bytes{0x01}));
    s.add(script_op::push_data1(bytes(80, 0x00)));
    CHECK(s.is_push_only());
    s.add(script_op::op(OP_DROP));
    CHECK_FALSE(s.is_push_only());
}

TEST_CASE("bare multisig detection") {
    script ms;
    ms.add(script_op::op(OP_1));
    ms.add(script_op::push_direct(bytes(33, 0x02)));
    ms.add(script_op::op(OP_1));
    ms.add(script_op::op(OP_CHECKMULTISIG));
    CHECK(ms.is_bare_multisig());

    script p2sh = script::p2sh(digest160{});
    CHECK_FALSE(p2sh.is_bare_multisig());
}

TEST_CASE("execute hash-lock pattern") {
    bytes secret = to_bytes("part-a: some data");
    digest160 lock = hash160(secret);

    // <secret> | HASH160 <lock> EQUAL
    script redeem;
    redeem.add(script_op::op(OP_HASH160));
    redeem.add(script_op::push_direct(bytes(lock.begin(), lock.end())));
    redeem.add(script_op::op(OP_EQUAL));

    auto good = execute_script(redeem, {secret});
    REQUIRE(good.ok);
    REQUIRE_FALSE(good.stack.empty());
    CHECK(cast_to_bool(good.stack.back()));

    bytes wrong = secret;
    wrong[0] ^= 0x01;
    auto bad = execute_script(redeem, {wrong});
    REQUIRE(bad.ok);
    CHECK_FALSE(cast_to_bool(bad.stack.back()));
}

TEST_CASE("execute equalverify failure stops the script") {
    script s;
    s.add(script_op::push_direct(bytes{0x01}));
    s.add(script_op::push_direct(bytes{0x02}));
    s.add(script_op::op(OP_EQUALVERIFY));
    auto r = execute_script(s);
    CHECK_FALSE(r.ok);
}

TEST_CASE("execute rejects signature operators and underflow") {
    script sig;
    sig.add(script_op::op(OP_CHECKSIG));
    CHECK_FALSE(execute_script(sig, {bytes{0x01}, bytes{0x02}}).ok);

    script drop;
    drop.add(script_op::op(OP_DROP));
    CHECK_FALSE(execute_script(drop).ok);
}

TEST_CASE("cast_to_bool edge cases") {
    CHECK_FALSE(cast_to_bool({}));
    CHECK_FALSE(cast_to_bool(bytes{0x00}));
    CHECK_FALSE(cast_to_bool(bytes{0x00, 0x00}));
    CHECK_FALSE(cast_to_bool(bytes{0x80}));       // negative zero
    CHECK(cast_to_bool(bytes{0x00, 0x80, 0x00})); // 0x80 not in last position
    CHECK(cast_to_bool(bytes{0x01}));
}

TEST_CASE("contains scans opcodes") {
    script s;
    s.add(script_op::push_direct(bytes{0x01}));
    s.add(script_op::op(OP_CHECKSIG));
    CHECK(s.contains(OP_CHECKSIG));
    CHECK_FALSE(s.contains(OP_CHECKMULTISIG));
}
