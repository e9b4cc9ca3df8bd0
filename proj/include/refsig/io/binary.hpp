#pragma once

// Little-endian field encoding independent of the host byte order.

#include "../error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace refsig::io::detail
{
template <typename U>
void put_le(std::vector<unsigned char>& out, U v)
{
        for (std::size_t i = 0; i < sizeof(U); ++i)
        {
                out.push_back(static_cast<unsigned char>(v & 0xFF));
                v = static_cast<U>(v >> 8);
        }
}

inline void put_f64(std::vector<unsigned char>& out, const double v)
{
        put_le(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_i16(std::vector<unsigned char>& out, const std::int16_t v)
{
        put_le(out, static_cast<std::uint16_t>(v));
}

/// Bounds-checked little-endian reader over a byte span.
class Reader
{
public:
        explicit Reader(std::span<const unsigned char> bytes, std::string what = "input")
                : bytes_(bytes), what_(std::move(what))
        {
        }

        template <typename U>
        U get()
        {
                need(sizeof(U));
                U v = 0;
                for (std::size_t i = 0; i < sizeof(U); ++i)
                {
                        v = static_cast<U>(v | static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i)));
                }
                pos_ += sizeof(U);
                return v;
        }

        double get_f64()
        {
                return std::bit_cast<double>(get<std::uint64_t>());
        }

        std::int16_t get_i16()
        {
                return static_cast<std::int16_t>(get<std::uint16_t>());
        }

        void need(const std::size_t n) const
        {
                if (bytes_.size() - pos_ < n)
                {
                        refsig::detail::throw_data(what_ + " truncated at offset " + std::to_string(pos_) + ": need "
                                                   + std::to_string(n) + " more bytes, have "
                                                   + std::to_string(bytes_.size() - pos_));
                }
        }

        [[nodiscard]] std::size_t offset() const
        {
                return pos_;
        }

        [[nodiscard]] std::size_t remaining() const
        {
                return bytes_.size() - pos_;
        }

private:
        std::span<const unsigned char> bytes_;
        std::string what_;
        std::size_t pos_ = 0;
};
}
