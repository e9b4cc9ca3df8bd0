#pragma once

// Framed sample transport with loss repair. Wire layout of one frame:
//
//   u64 sequence | u32 payload_samples (per channel) |
//   payload_samples * channels int16, interleaved, little-endian

#include "../error.hpp"
#include "../stream.hpp"
#include "binary.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace refsig::io
{
inline constexpr std::size_t frame_header_bytes = 12;

struct StreamFrame
{
        std::uint64_t sequence = 0;
        std::uint32_t payload_samples = 0;
        std::vector<std::int16_t> payload;
};

struct GapSpan
{
        std::uint64_t first_missing_sequence = 0;
        std::uint64_t frame_count = 0;
};

struct GapReport
{
        std::vector<GapSpan> gaps;
        std::uint64_t padded_samples = 0;  // per channel
};

inline void encode_frame(const StreamFrame& f, const std::size_t channels, std::vector<unsigned char>& out)
{
        if (f.payload.size() != static_cast<std::size_t>(f.payload_samples) * channels)
        {
                refsig::detail::throw_data("frame " + std::to_string(f.sequence) + " payload size does not match "
                                           + std::to_string(f.payload_samples) + " samples x "
                                           + std::to_string(channels) + " channels");
        }
        detail::put_le(out, f.sequence);
        detail::put_le(out, f.payload_samples);
        for (const std::int16_t v : f.payload)
        {
                detail::put_i16(out, v);
        }
}

/// Splits a byte sequence into consecutive frames.
inline std::vector<StreamFrame> decode_frames(std::span<const unsigned char> bytes, const std::size_t channels)
{
        if (channels == 0)
        {
                refsig::detail::throw_argument("channel count must be >= 1");
        }
        detail::Reader r(bytes, "frame stream");
        std::vector<StreamFrame> frames;
        while (r.remaining() > 0)
        {
                StreamFrame f;
                f.sequence = r.get<std::uint64_t>();
                f.payload_samples = r.get<std::uint32_t>();
                const std::size_t n = static_cast<std::size_t>(f.payload_samples) * channels;
                r.need(2 * n);
                f.payload.resize(n);
                for (std::int16_t& v : f.payload)
                {
                        v = r.get_i16();
                }
                frames.push_back(std::move(f));
        }
        return frames;
}

/// Incremental loss-repairing assembler. The first frame fixes the base
/// sequence and frame size; later frames must arrive in increasing
/// sequence order, and skipped sequences are replaced by zero frames.
class FrameAssembler
{
public:
        FrameAssembler(const std::size_t channels, const double sample_rate_hz) : channels_(channels)
        {
                if (channels == 0)
                {
                        refsig::detail::throw_argument("channel count must be >= 1");
                }
                stream_.channels = channels;
                stream_.sample_rate_hz = sample_rate_hz;
                stream_.format = SampleFormat::int16;
        }

        void push(const StreamFrame& f)
        {
                if (f.payload.size() != static_cast<std::size_t>(f.payload_samples) * channels_)
                {
                        refsig::detail::throw_data("frame " + std::to_string(f.sequence)
                                                   + " payload length disagrees with its sample count");
                }
                if (!next_)
                {
                        frame_samples_ = f.payload_samples;
                        next_ = f.sequence;
                        base_ = f.sequence;
                }
                if (f.payload_samples != frame_samples_)
                {
                        refsig::detail::throw_data("frame " + std::to_string(f.sequence) + " carries "
                                                   + std::to_string(f.payload_samples) + " samples, expected "
                                                   + std::to_string(frame_samples_));
                }
                if (f.sequence < *next_)
                {
                        if (f.sequence >= base_ && !in_gap(f.sequence))
                        {
                                refsig::detail::throw_data("duplicate frame " + std::to_string(f.sequence));
                        }
                        refsig::detail::throw_data("frame " + std::to_string(f.sequence)
                                                   + " arrived out of order (expected >= " + std::to_string(*next_)
                                                   + ")");
                }
                if (f.sequence > *next_)
                {
                        const std::uint64_t missing = f.sequence - *next_;
                        report_.gaps.push_back({*next_, missing});
                        report_.padded_samples += missing * frame_samples_;
                        stream_.samples.resize(stream_.samples.size() + missing * frame_samples_ * channels_, 0.0);
                }
                for (const std::int16_t v : f.payload)
                {
                        stream_.samples.push_back(static_cast<double>(v));
                }
                next_ = f.sequence + 1;
        }

        [[nodiscard]] const RealSampleStream& stream() const
        {
                return stream_;
        }

        [[nodiscard]] const GapReport& report() const
        {
                return report_;
        }

private:
        [[nodiscard]] bool in_gap(const std::uint64_t seq) const
        {
                for (const GapSpan& g : report_.gaps)
                {
                        if (seq >= g.first_missing_sequence && seq - g.first_missing_sequence < g.frame_count)
                        {
                                return true;
                        }
                }
                return false;
        }

        std::size_t channels_;
        std::uint32_t frame_samples_ = 0;
        std::optional<std::uint64_t> next_;
        std::uint64_t base_ = 0;
        RealSampleStream stream_;
        GapReport report_;
};

struct IngestResult
{
        RealSampleStream stream;
        GapReport report;
};

inline IngestResult ingest_framed_stream(std::span<const StreamFrame> frames, const std::size_t channels,
                                         const double sample_rate_hz = 25e6)
{
        if (frames.empty())
        {
                refsig::detail::throw_data("no frames to ingest");
        }
        FrameAssembler a(channels, sample_rate_hz);
        for (const StreamFrame& f : frames)
        {
                a.push(f);
        }
        return {a.stream(), a.report()};
}
}
