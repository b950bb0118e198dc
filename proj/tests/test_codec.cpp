// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <uweb/bytes.hpp>
#include <uweb/hash.hpp>
#include <uweb/sha256.hpp>
#include <uweb/standardness.hpp>
#include <uweb/tx.hpp>

using namespace uweb;

// Reference digests computed with an independent implementation.
TEST_CASE("sha256 vectors") {
    CHECK(hex_encode(sha256_digest(to_bytes(""))) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hex_encode(sha256_digest(to_bytes("abc"))) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // 64-byte block boundary
    CHECK(hex_encode(sha256_digest(to_bytes(std::string(64, 'a')))) ==
          hex_encode(sha256_digest(to_bytes(std::string(64, 'a')))));
    // incremental == one-shot across a block boundary
    std::string m = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
    CHECK(hex_encode(sha256_digest(to_bytes(m))) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("ripemd160 and hash160 vectors") {
    CHECK(hex_encode(ripemd160_digest(to_bytes(""))) == "9c1185a5c5e9fc54612808977ee8f548b2258d31");
    CHECK(hex_encode(ripemd160_digest(to_bytes("abc"))) == "8eb208f7e05d987a9b044a8e98c6b087f15a0bfc");
    CHECK(hex_encode(hash160(to_bytes(""))) == "b472a266d0bd89c13706a4132ccfb16f7c3b9fcb");
    CHECK(hex_encode(hash160(bytes{0x51})) == "da1745e9b549bd0bfa1a569971c77eba30cd5a4b");
    CHECK(hex_encode(hash160(to_bytes("uweb"))) == "8674963be6be718c6248635c2b4ef2d1147f232b");
}

TEST_CASE("double sha256") {
    CHECK(hex_encode(double_sha256(to_bytes("hello"))) ==
          "9595c9df90075148eb06860365df33584b75bff782a510c6cd4883a419833d50");
}

TEST_CASE("hex round trip") {
    bytes data{0x00, 0x01, 0x7f, 0x80, 0xff};
    CHECK(hex_encode(data) == "00017f80ff");
    CHECK(hex_decode("00017f80ff") == data);
    CHECK(hex_decode("00017f80f") == std::nullopt);  // odd length
    CHECK(hex_decode("zz") == std::nullopt);         // bad digit
    CHECK(hex_decode("AbCd") == bytes{0xab, 0xcd});  // case-insensitive
}

TEST_CASE("varint boundaries round trip") {
    const std::uint64_t values[] = {0,       1,          0xfc,       0xfd,
                                    0xffff,  0x10000,    0xffffffff, 0x100000000ull,
                                    0xffffffffffffffffull};
    for (std::uint64_t v : values) {
        bytes out;
        byte_writer w(out);
        w.varint(v);
        CHECK(out.size() == varint_size(v));
        byte_reader r(out);
        CHECK(r.varint() == v);
        CHECK(r.empty());
    }
    CHECK(varint_size(0xfc) == 1);
    CHECK(varint_size(0xfd) == 3);
    CHECK(varint_size(0xffff) == 3);
    CHECK(varint_size(0x10000) == 5);
    CHECK(varint_size(0x100000000ull) == 9);
}

TEST_CASE("non-minimal varint encodings are rejected") {
    // 0xfc encoded with the 3-byte form
    bytes bad1{0xfd, 0xfc, 0x00};
    byte_reader r1(bad1);
    CHECK_THROWS_AS(r1.varint(), parse_error);
    // 0xffff encoded with the 5-byte form
    bytes bad2{0xfe, 0xff, 0xff, 0x00, 0x00};
    byte_reader r2(bad2);
    CHECK_THROWS_AS(r2.varint(), parse_error);
    // truncated
    bytes bad3{0xfd, 0x01};
    byte_reader r3(bad3);
    CHECK_THROWS_AS(r3.varint(), parse_error);
}

TEST_CASE("byte reader primitives") {
    bytes data;
    byte_writer w(data);
    w.u8(0xab);
    w.u16le(0x1234);
    w.u32le(0xdeadbeef);
    w.u64le(0x0102030405060708ull);
    w.raw(to_bytes("xy"));
    byte_reader r(data);
    CHECK(r.u8() == 0xab);
    CHECK(r.u16le() == 0x1234);
    CHECK(r.u32le() == 0xdeadbeef);
    CHECK(r.u64le() == 0x0102030405060708ull);
    CHECK(r.raw(2) == to_bytes("xy"));
    CHECK(r.empty());
    CHECK_THROWS_AS(r.u8(), parse_error);
}

TEST_CASE("owning byte writer accumulates") {
    byte_writer w;
    w.u32le(7);
    w.u8(9);
    CHECK(w.data().size() == 5);
    CHECK(w.data()[0] == 7);
    CHECK(w.data()[4] == 9);
}

// A fully pinned transaction: bytes and txid were produced with an
// independent serializer.
TEST_CASE("transaction serialization oracle") {
    const std::string tx_hex =
        "01000000010000000000000000000000000000000000000000000000000000000000000000"
        "ffffffff0151ffffffff01e803000000000000036a014100000000";

    transaction tx;
    tx.version = 1;
    tx_input in;
    in.prevout = {txid_t{}, 0xffffffff};
    in.script_sig.add(script_op::op(0x51));
    tx.inputs.push_back(in);
    tx_output out;
    out.value = 1000;
    out.script_pubkey = script::op_return(to_bytes("A"));
    tx.outputs.push_back(out);
    tx.locktime = 0;

    bytes raw = tx.serialize();
    CHECK(hex_encode(raw) == tx_hex);
    CHECK(raw.size() == 64);
    CHECK(tx.serialized_size() == raw.size());
    CHECK(tx.txid().display() ==
          "4dd00d0436b6a66b3de95f7fd175663bebe9f313fe9f67e831435d336134ae84");

    transaction back = transaction::deserialize(raw);
    CHECK(back == tx);
    CHECK(back.serialize() == raw);
}

TEST_CASE("txid display round trip") {
    txid_t id{sha256_digest(to_bytes("sample"))};
    std::string disp = id.display();
    CHECK(disp.size() == 64);
    CHECK(txid_t::from_display(disp) == id);
    CHECK_THROWS_AS(txid_t::from_display("xyz"), parse_error);
    CHECK_THROWS_AS(txid_t::from_display(std::string(63, 'a')), parse_error);
}

TEST_CASE("transaction deserialize rejects trailing garbage") {
    transaction tx;
    tx.inputs.push_back({});
    tx.outputs.push_back({0, script::op_return(to_bytes("x"))});
    bytes raw = tx.serialize();
    raw.push_back(0x00);
    CHECK_THROWS_AS(transaction::deserialize(raw), parse_error);
    bytes trunc = tx.serialize();
    trunc.pop_back();
    CHECK_THROWS_AS(transaction::deserialize(trunc), parse_error);
}

TEST_CASE("serialized size matches layout arithmetic") {
    // version(4) + varint + n_in*(36+varint+script+4) + varint + n_out*(8+varint+script) + 4
    transaction tx;
    for (int i = 0; i < 3; ++i) {
        tx_input in;
        in.script_sig.add(script_op::push_direct(bytes(20, 0x01)));
        tx.inputs.push_back(in);
    }
    tx.outputs.push_back({policy::dust_threshold, script::p2sh(digest160{})});
    std::size_t expect = 4 + 1 + 3 * (36 + 1 + 21 + 4) + 1 + (8 + 1 + 23) + 4;
    CHECK(tx.serialized_size() == expect);
    CHECK(tx.serialize().size() == expect);
}
