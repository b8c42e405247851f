#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>

#include "asmlens/error.hpp"

namespace asmlens {

// Little-endian cursor over a byte span; reads past the end throw MalformedDebugInfo.
class ByteReader {
public:
    ByteReader() = default;
    explicit ByteReader(std::span<const std::uint8_t> data, std::size_t pos = 0) : data_(data), pos_(pos) {}

    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) {
        if (p > data_.size()) fail();
        pos_ = p;
    }
    void skip(std::size_t n) { seek(pos_ + n); }
    bool at_end() const { return pos_ >= data_.size(); }
    std::size_t size() const { return data_.size(); }
    std::span<const std::uint8_t> data() const { return data_; }

    std::uint64_t uint(std::size_t n) {
        need(n);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
        pos_ += n;
        return v;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::uint64_t u64() { return uint(8); }
    std::int8_t s8() { return static_cast<std::int8_t>(u8()); }

    std::uint64_t uleb() {
        std::uint64_t v = 0;
        int shift = 0;
        for (;;) {
            std::uint8_t b = u8();
            if (shift < 64) v |= std::uint64_t{b & 0x7fu} << shift;
            shift += 7;
            if (!(b & 0x80)) return v;
        }
    }
    std::int64_t sleb() {
        std::int64_t v = 0;
        int shift = 0;
        std::uint8_t b = 0;
        do {
            b = u8();
            if (shift < 64) v |= static_cast<std::int64_t>(std::uint64_t{b & 0x7fu} << shift);
            shift += 7;
        } while (b & 0x80);
        if (shift < 64 && (b & 0x40)) v |= -(std::int64_t{1} << shift);
        return v;
    }
    std::string cstr() {
        const void* end = std::memchr(data_.data() + pos_, 0, data_.size() - pos_);
        if (!end) fail();
        auto len = static_cast<std::size_t>(static_cast<const std::uint8_t*>(end) - (data_.data() + pos_));
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
        pos_ += len + 1;
        return s;
    }
    std::span<const std::uint8_t> bytes(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;

    void need(std::size_t n) const {
        if (pos_ + n > data_.size() || pos_ + n < pos_) fail();
    }
    [[noreturn]] static void fail() { throw Error(ErrorKind::MalformedDebugInfo, "truncated data"); }
};

// Reads a NUL-terminated string at `offset` of a string section.
inline std::string string_at(std::span<const std::uint8_t> section, std::uint64_t offset) {
    if (offset >= section.size()) throw Error(ErrorKind::MalformedDebugInfo, "string offset out of range");
    ByteReader r(section, offset);
    return r.cstr();
}

}  // namespace asmlens
