#pragma once

#include "error.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
enum class SampleFormat : std::uint32_t
{
        int16 = 0,   // ADC codes (14-bit codes carried in int16 words by default)
        float64 = 1,
};

/// Multichannel real-valued sampled signal, interleaved by frame.
struct RealSampleStream
{
        double sample_rate_hz = 0;
        std::size_t channels = 1;
        SampleFormat format = SampleFormat::float64;
        std::vector<double> samples;
        double start_time_s = 0;

        [[nodiscard]] std::size_t frames() const
        {
                return channels == 0 ? 0 : samples.size() / channels;
        }

        [[nodiscard]] std::vector<double> channel(const std::size_t index) const
        {
                if (index >= channels)
                {
                        detail::throw_argument(
                                "channel " + std::to_string(index) + " out of range (" + std::to_string(channels)
                                + " channels)");
                }
                std::vector<double> res(frames());
                for (std::size_t i = 0; i < res.size(); ++i)
                {
                        res[i] = samples[i * channels + index];
                }
                return res;
        }

        void validate() const
        {
                if (!(sample_rate_hz > 0) || !std::isfinite(sample_rate_hz))
                {
                        detail::throw_data("sample rate must be positive and finite");
                }
                if (channels < 1)
                {
                        detail::throw_data("stream must have at least one channel");
                }
                if (samples.size() % channels != 0)
                {
                        detail::throw_data(
                                "sample count " + std::to_string(samples.size()) + " not divisible by channel count "
                                + std::to_string(channels));
                }
                for (const double v : samples)
                {
                        if (!std::isfinite(v))
                        {
                                detail::throw_data("stream contains non-finite samples");
                        }
                        if (format == SampleFormat::int16
                            && (v != std::round(v) || v < -32768.0 || v > 32767.0))
                        {
                                detail::throw_data("int16 stream holds a value that is not a 16-bit integer code");
                        }
                }
        }
};

/// Builds a single-channel float stream.
inline RealSampleStream make_stream(std::vector<double> samples, const double sample_rate_hz,
                                    const double start_time_s = 0)
{
        RealSampleStream s;
        s.sample_rate_hz = sample_rate_hz;
        s.channels = 1;
        s.format = SampleFormat::float64;
        s.samples = std::move(samples);
        s.start_time_s = start_time_s;
        return s;
}

/// Decimated complex I/Q series of one channel. Sample k is centred at
/// start_time_s + k / sample_rate_hz on the input time axis.
struct ComplexBaseband
{
        double sample_rate_hz = 0;
        double start_time_s = 0;
        std::vector<std::complex<double>> iq;
        std::string origin;

        [[nodiscard]] double time_of(const std::size_t k) const
        {
                return start_time_s + static_cast<double>(k) / sample_rate_hz;
        }
};

enum class TimeErrorKind
{
        sine,
        pulse,
};

/// Time-error series. When times_s is empty the series is uniform:
/// sample k sits at start_time_s + k / rate_hz.
struct TimeErrorSeries
{
        std::vector<double> values_s;
        double rate_hz = 1;
        double start_time_s = 0;
        TimeErrorKind kind = TimeErrorKind::sine;
        std::vector<double> times_s;

        [[nodiscard]] double time_of(const std::size_t k) const
        {
                if (!times_s.empty())
                {
                        return times_s[k];
                }
                return start_time_s + static_cast<double>(k) / rate_hz;
        }

        [[nodiscard]] std::vector<double> time_axis() const
        {
                std::vector<double> t(values_s.size());
                for (std::size_t k = 0; k < t.size(); ++k)
                {
                        t[k] = time_of(k);
                }
                return t;
        }
};

struct EdgeEvent
{
        std::int64_t coarse_index = 0;
        double fractional_index = 0;
        double time_s = 0;
};

struct EdgeEventSeries
{
        std::vector<EdgeEvent> events;
        double sample_rate_hz = 0;
        std::size_t channel = 0;
        /// Coarse detections discarded because their window overran the
        /// stream or could not be refined.
        std::size_t dropped = 0;
};
}
