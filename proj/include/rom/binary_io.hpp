#pragma once

// Little-endian primitive encoding shared by the snapshot and checkpoint formats.

#include "rom/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rom::io {

namespace detail {

template <typename T>
std::array<char, sizeof(T)> to_le_bytes(T value)
{
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    return bytes;
}

template <typename T>
T from_le_bytes(std::array<char, sizeof(T)> bytes)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    return std::bit_cast<T>(bytes);
}

} // namespace detail

class Writer {
public:
    explicit Writer(std::ostream& os) : os_{os} {}

    void magic(std::string_view m) { os_.write(m.data(), static_cast<std::streamsize>(m.size())); }

    void u32(std::uint32_t v) { put(v); }
    void f64(double v) { put(v); }

    void f64s(std::span<const double> values)
    {
        if constexpr (std::endian::native == std::endian::little) {
            os_.write(reinterpret_cast<const char*>(values.data()),
                      static_cast<std::streamsize>(values.size() * sizeof(double)));
        } else {
            for (double v : values) put(v);
        }
    }

    /// u32 length prefix followed by raw bytes.
    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        magic(s);
    }

    void check(const std::string& what) const
    {
        if (!os_) throw IoError("write failed: " + what);
    }

private:
    template <typename T>
    void put(T v)
    {
        auto bytes = detail::to_le_bytes(v);
        os_.write(bytes.data(), bytes.size());
    }

    std::ostream& os_;
};

class Reader {
public:
    Reader(std::istream& is, std::string source) : is_{is}, source_{std::move(source)} {}

    void expect_magic(std::string_view m)
    {
        std::string got(m.size(), '\0');
        read_raw(got.data(), got.size(), "magic");
        if (got != m) {
            throw FormatError(source_ + ": bad magic, expected '" + std::string(m) + "'");
        }
    }

    std::uint32_t u32(const char* what) { return get<std::uint32_t>(what); }
    double f64(const char* what) { return get<double>(what); }

    void f64s(std::span<double> out, const char* what)
    {
        if constexpr (std::endian::native == std::endian::little) {
            read_raw(reinterpret_cast<char*>(out.data()), out.size() * sizeof(double), what);
        } else {
            for (double& v : out) v = get<double>(what);
        }
    }

    std::string str(const char* what, std::uint32_t max_len = 1u << 24)
    {
        auto n = u32(what);
        if (n > max_len) throw FormatError(source_ + ": implausible length for " + what);
        std::string s(n, '\0');
        read_raw(s.data(), n, what);
        return s;
    }

    /// Throws unless the stream is exhausted.
    void expect_end()
    {
        if (is_.peek() != std::char_traits<char>::eof()) {
            throw FormatError(source_ + ": trailing bytes after payload");
        }
    }

    const std::string& source() const { return source_; }

private:
    template <typename T>
    T get(const char* what)
    {
        std::array<char, sizeof(T)> bytes{};
        read_raw(bytes.data(), bytes.size(), what);
        return detail::from_le_bytes<T>(bytes);
    }

    void read_raw(char* dst, std::size_t n, const char* what)
    {
        is_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n) {
            throw FormatError(source_ + ": truncated while reading " + what);
        }
    }

    std::istream& is_;
    std::string source_;
};

} // namespace rom::io
