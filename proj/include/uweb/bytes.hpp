// Copyright (c) 2026 The UWeb developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uweb {

using bytes = std::vector<std::uint8_t>;
using byte_span = std::span<const std::uint8_t>;

inline bytes to_bytes(std::string_view s) {
    return bytes(s.begin(), s.end());
}

inline std::string to_string(byte_span b) {
    return std::string(b.begin(), b.end());
}

inline void append(bytes& out, byte_span more) {
    out.insert(out.end(), more.begin(), more.end());
}

// ---- hex --------------------------------------------------------------

inline std::string hex_encode(byte_span data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

inline std::optional<int> hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return std::nullopt;
}

inline std::optional<bytes> hex_decode(std::string_view s) {
    if (s.size() % 2 != 0) return std::nullopt;
    bytes out;
    out.reserve(s.size() / 2);
    for (std::size_t i = 0; i < s.size(); i += 2) {
        auto hi = hex_nibble(s[i]);
        auto lo = hex_nibble(s[i + 1]);
        if (!hi || !lo) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((*hi << 4) | *lo));
    }
    return out;
}

// ---- serialization cursors --------------------------------------------

class byte_writer {
public:
    // Owning mode: accumulate into an internal buffer, read back via data().
    byte_writer() : out_(own_) {}
    explicit byte_writer(bytes& out) : out_(out) {}

    const bytes& data() const { return own_; }

    void u8(std::uint8_t v) { out_.push_back(v); }

    void u16le(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }

    void u32le(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64le(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void i32le(std::int32_t v) { u32le(static_cast<std::uint32_t>(v)); }
    void i64le(std::int64_t v) { u64le(static_cast<std::uint64_t>(v)); }

    void raw(byte_span data) { append(out_, data); }

    // CompactSize variable-length integer.
    void varint(std::uint64_t v) {
        if (v < 0xfd) {
            u8(static_cast<std::uint8_t>(v));
        } else if (v <= 0xffff) {
            u8(0xfd);
            u16le(static_cast<std::uint16_t>(v));
        } else if (v <= 0xffffffff) {
            u8(0xfe);
            u32le(static_cast<std::uint32_t>(v));
        } else {
            u8(0xff);
            u64le(v);
        }
    }

private:
    bytes own_;
    bytes& out_;
};

struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

class byte_reader {
public:
    explicit byte_reader(byte_span data) : data_(data) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    bool empty() const { return remaining() == 0; }
    std::size_t pos() const { return pos_; }

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint16_t u16le() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32le() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
        pos_ += 4;
        return v;
    }

    std::uint64_t u64le() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
        pos_ += 8;
        return v;
    }

    std::int32_t i32le() { return static_cast<std::int32_t>(u32le()); }
    std::int64_t i64le() { return static_cast<std::int64_t>(u64le()); }

    bytes raw(std::size_t n) {
        need(n);
        bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    byte_span view(std::size_t n) {
        need(n);
        byte_span out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint64_t varint() {
        std::uint8_t tag = u8();
        if (tag < 0xfd) return tag;
        if (tag == 0xfd) {
            std::uint64_t v = u16le();
            if (v < 0xfd) throw parse_error("non-minimal varint");
            return v;
        }
        if (tag == 0xfe) {
            std::uint64_t v = u32le();
            if (v <= 0xffff) throw parse_error("non-minimal varint");
            return v;
        }
        std::uint64_t v = u64le();
        if (v <= 0xffffffff) throw parse_error("non-minimal varint");
        return v;
    }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw parse_error("unexpected end of data");
    }

    byte_span data_;
    std::size_t pos_ = 0;
};

inline std::size_t varint_size(std::uint64_t v) {
    if (v < 0xfd) return 1;
    if (v <= 0xffff) return 3;
    if (v <= 0xffffffff) return 5;
    return 9;
}

} // namespace uweb
