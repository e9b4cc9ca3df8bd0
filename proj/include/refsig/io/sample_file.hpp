#pragma once

// Sample file: 36-byte little-endian header followed by the interleaved
// payload.
//
//   offset  size  field
//        0     4  magic "RSG1"
//        4     2  version (1)
//        6     2  channels
//        8     4  format code (0 int16, 1 float64)
//       12     8  sample rate, Hz (binary64)
//       20     8  samples per channel
//       28     8  start time, s (binary64)

#include "../error.hpp"
#include "../stream.hpp"
#include "binary.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace refsig::io
{
inline constexpr std::size_t sample_header_bytes = 36;
inline constexpr std::uint16_t sample_file_version = 1;

struct SampleFileHeader
{
        std::uint16_t version = sample_file_version;
        std::uint16_t channels = 1;
        SampleFormat format = SampleFormat::float64;
        double sample_rate_hz = 0;
        std::uint64_t sample_count = 0;  // per channel
        double start_time_s = 0;
};

inline std::vector<unsigned char> encode_samples(const RealSampleStream& stream)
{
        stream.validate();
        if (stream.channels > std::numeric_limits<std::uint16_t>::max())
        {
                refsig::detail::throw_data("too many channels for the file format");
        }
        std::vector<unsigned char> out;
        const std::size_t width = stream.format == SampleFormat::int16 ? 2 : 8;
        out.reserve(sample_header_bytes + stream.samples.size() * width);
        for (const char c : {'R', 'S', 'G', '1'})
        {
                out.push_back(static_cast<unsigned char>(c));
        }
        detail::put_le(out, sample_file_version);
        detail::put_le(out, static_cast<std::uint16_t>(stream.channels));
        detail::put_le(out, static_cast<std::uint32_t>(stream.format));
        detail::put_f64(out, stream.sample_rate_hz);
        detail::put_le(out, static_cast<std::uint64_t>(stream.frames()));
        detail::put_f64(out, stream.start_time_s);
        for (const double v : stream.samples)
        {
                if (stream.format == SampleFormat::int16)
                {
                        detail::put_i16(out, static_cast<std::int16_t>(v));
                }
                else
                {
                        detail::put_f64(out, v);
                }
        }
        return out;
}

inline SampleFileHeader decode_header(detail::Reader& r)
{
        r.need(4);
        const char magic[4] = {static_cast<char>(r.get<std::uint8_t>()), static_cast<char>(r.get<std::uint8_t>()),
                               static_cast<char>(r.get<std::uint8_t>()), static_cast<char>(r.get<std::uint8_t>())};
        if (std::string(magic, 4) != "RSG1")
        {
                refsig::detail::throw_data("bad magic at offset 0: expected \"RSG1\"");
        }
        SampleFileHeader h;
        h.version = r.get<std::uint16_t>();
        if (h.version != sample_file_version)
        {
                refsig::detail::throw_data("unsupported version " + std::to_string(h.version) + " at offset 4");
        }
        h.channels = r.get<std::uint16_t>();
        if (h.channels == 0)
        {
                refsig::detail::throw_data("zero channels at offset 6");
        }
        const auto code = r.get<std::uint32_t>();
        if (code > 1)
        {
                refsig::detail::throw_data("unknown format code " + std::to_string(code) + " at offset 8");
        }
        h.format = static_cast<SampleFormat>(code);
        h.sample_rate_hz = r.get_f64();
        if (!(h.sample_rate_hz > 0) || !std::isfinite(h.sample_rate_hz))
        {
                refsig::detail::throw_data("invalid sample rate at offset 12");
        }
        h.sample_count = r.get<std::uint64_t>();
        h.start_time_s = r.get_f64();
        if (!std::isfinite(h.start_time_s))
        {
                refsig::detail::throw_data("invalid start time at offset 28");
        }
        return h;
}

inline RealSampleStream decode_samples(std::span<const unsigned char> bytes)
{
        detail::Reader r(bytes, "sample file");
        const SampleFileHeader h = decode_header(r);
        const std::size_t width = h.format == SampleFormat::int16 ? 2 : 8;
        const std::uint64_t total = h.sample_count * h.channels;
        if (h.sample_count != 0 && total / h.channels != h.sample_count)
        {
                refsig::detail::throw_data("sample count overflows");
        }
        if (r.remaining() != total * width)
        {
                refsig::detail::throw_data("payload of " + std::to_string(r.remaining())
                                           + " bytes does not match the declared " + std::to_string(h.sample_count)
                                           + " samples x " + std::to_string(h.channels) + " channels");
        }
        RealSampleStream s;
        s.sample_rate_hz = h.sample_rate_hz;
        s.channels = h.channels;
        s.format = h.format;
        s.start_time_s = h.start_time_s;
        s.samples.resize(total);
        for (double& v : s.samples)
        {
                v = h.format == SampleFormat::int16 ? static_cast<double>(r.get_i16()) : r.get_f64();
        }
        if (h.format == SampleFormat::float64)
        {
                s.validate();
        }
        return s;
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path)
{
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
                refsig::detail::throw_data("cannot open " + path.string());
        }
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes)
{
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
        {
                refsig::detail::throw_data("cannot create " + path.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out.flush())
        {
                refsig::detail::throw_data("write to " + path.string() + " failed");
        }
}

/// Writes header and payload; returns the number of bytes written.
inline std::size_t write_samples(const RealSampleStream& stream, const std::filesystem::path& path)
{
        const std::vector<unsigned char> bytes = encode_samples(stream);
        write_file(path, bytes);
        return bytes.size();
}

inline RealSampleStream read_samples(const std::filesystem::path& path)
{
        const std::vector<unsigned char> bytes = read_file(path);
        return decode_samples(bytes);
}
}
