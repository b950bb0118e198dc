// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cstdint>
#include <stdexcept>

#include <zlib.h>

#include "bytes.hpp"

namespace uweb {

struct gzip_error : std::runtime_error {
    explicit gzip_error(const std::string& what) : std::runtime_error(what) {}
};

// Gzip with a fixed header (zero mtime, unknown OS) so that identical input
// always produces identical bytes.
inline bytes gzip_compress(byte_span data, int level = 9) {
    z_stream zs{};
    if (deflateInit2(&zs, level, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK)
        throw gzip_error("deflateInit2 failed");

    bytes out = {0x1f, 0x8b, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xff};
    bytes chunk(1 << 16);
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    int ret = Z_OK;
    do {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        ret = deflate(&zs, Z_FINISH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            deflateEnd(&zs);
            throw gzip_error("deflate failed");
        }
        out.insert(out.end(), chunk.begin(), chunk.begin() + (chunk.size() - zs.avail_out));
    } while (ret != Z_STREAM_END);
    deflateEnd(&zs);

    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0, data.data(), static_cast<uInt>(data.size())));
    std::uint32_t isize = static_cast<std::uint32_t>(data.size());
    byte_writer w(out);
    w.u32le(crc);
    w.u32le(isize);
    return out;
}

inline bytes gzip_decompress(byte_span data) {
    if (data.size() < 18 || data[0] != 0x1f || data[1] != 0x8b || data[2] != 0x08)
        throw gzip_error("not a gzip stream");
    std::uint8_t flags = data[3];
    std::size_t off = 10;
    if (flags & 0x04) { // FEXTRA
        if (data.size() < off + 2) throw gzip_error("truncated gzip extra field");
        std::size_t xlen = data[off] | (data[off + 1] << 8);
        off += 2 + xlen;
    }
    if (flags & 0x08) { // FNAME
        while (off < data.size() && data[off] != 0) ++off;
        ++off;
    }
    if (flags & 0x10) { // FCOMMENT
        while (off < data.size() && data[off] != 0) ++off;
        ++off;
    }
    if (flags & 0x02) off += 2; // FHCRC
    if (data.size() < off + 8) throw gzip_error("truncated gzip stream");

    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) throw gzip_error("inflateInit2 failed");
    bytes out;
    bytes chunk(1 << 16);
    zs.next_in = const_cast<Bytef*>(data.data() + off);
    zs.avail_in = static_cast<uInt>(data.size() - off - 8);
    int ret = Z_OK;
    do {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw gzip_error("inflate failed");
        }
        out.insert(out.end(), chunk.begin(), chunk.begin() + (chunk.size() - zs.avail_out));
    } while (ret != Z_STREAM_END);
    inflateEnd(&zs);

    byte_reader tr(data.subspan(data.size() - 8));
    std::uint32_t crc_expect = tr.u32le();
    std::uint32_t isize = tr.u32le();
    std::uint32_t crc_actual =
        static_cast<std::uint32_t>(crc32(0, out.data(), static_cast<uInt>(out.size())));
    if (crc_expect != crc_actual) throw gzip_error("gzip crc mismatch");
    if (isize != static_cast<std::uint32_t>(out.size())) throw gzip_error("gzip length mismatch");
    return out;
}

} // namespace uweb
