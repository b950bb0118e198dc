// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>

#include <uweb/gzipio.hpp>
#include <uweb/workload.hpp>

using namespace uweb;

TEST_CASE("gzip round trip") {
    bytes samples[] = {
        {},
        to_bytes("a"),
        to_bytes("hello hello hello hello hello"),
        bytes(100'000, 0x00),
    };
    for (const auto& data : samples) {
        bytes packed = gzip_compress(data);
        CHECK(gzip_decompress(packed) == data);
    }
}

TEST_CASE("gzip round trip on incompressible data") {
    sim::rng64 rng(42);
    bytes data(250'000);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    bytes packed = gzip_compress(data);
    CHECK(packed.size() > data.size()); // random data does not compress
    CHECK(gzip_decompress(packed) == data);
}

TEST_CASE("gzip output is deterministic") {
    bytes data = to_bytes("determinism check: the same input must yield the same bytes");
    bytes a = gzip_compress(data);
    bytes b = gzip_compress(data);
    CHECK(a == b);
    // fixed header: magic, deflate, no flags, zero mtime, unknown OS
    REQUIRE(a.size() >= 10);
    CHECK(a[0] == 0x1f);
    CHECK(a[1] == 0x8b);
    CHECK(a[2] == 0x08);
    CHECK(a[3] == 0x00);
    CHECK(a[9] == 0xff);
}

TEST_CASE("gzip zeros compress massively") {
    bytes data(1'000'000, 0x00);
    bytes packed = gzip_compress(data);
    CHECK(packed.size() < 2'000);
    CHECK(gzip_decompress(packed).size() == data.size());
}

TEST_CASE("decompressor honors optional header fields") {
    bytes data = to_bytes("payload behind a decorated header");
    bytes packed = gzip_compress(data);

    // Re-assemble with FNAME + FEXTRA set.
    bytes decorated(packed.begin(), packed.begin() + 10);
    decorated[3] = 0x04 | 0x08; // FEXTRA | FNAME
    // FEXTRA: xlen=4 plus four payload bytes
    decorated.insert(decorated.end(), {0x04, 0x00, 0xde, 0xad, 0xbe, 0xef});
    // FNAME: zero-terminated string
    bytes name = to_bytes("file.txt");
    decorated.insert(decorated.end(), name.begin(), name.end());
    decorated.push_back(0x00);
    decorated.insert(decorated.end(), packed.begin() + 10, packed.end());

    CHECK(gzip_decompress(decorated) == data);
}

TEST_CASE("gzip failure modes") {
    bytes data = to_bytes("integrity matters");
    bytes packed = gzip_compress(data);

    SECTION("not gzip at all") {
        CHECK_THROWS_AS(gzip_decompress(to_bytes("plainly not gzip data....")), gzip_error);
    }
    SECTION("truncated stream") {
        bytes cut(packed.begin(), packed.end() - 6);
        CHECK_THROWS_AS(gzip_decompress(cut), gzip_error);
    }
    SECTION("corrupt crc") {
        bytes bad = packed;
        bad[bad.size() - 5] ^= 0x01; // inside the stored CRC32
        CHECK_THROWS_AS(gzip_decompress(bad), gzip_error);
    }
    SECTION("corrupt length") {
        bytes bad = packed;
        bad[bad.size() - 1] ^= 0x01; // stored ISIZE
        CHECK_THROWS_AS(gzip_decompress(bad), gzip_error);
    }
    SECTION("corrupt deflate body") {
        bytes bad = packed;
        bad[12] ^= 0xff;
        CHECK_THROWS_AS(gzip_decompress(bad), gzip_error);
    }
}
