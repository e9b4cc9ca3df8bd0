#pragma once

#include "detail/phase.hpp"
#include "error.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
struct DdcConfig
{
        double nco_freq_hz = 10e6;
        double sample_rate_hz = 25e6;
        /// f_t - f_r; non-zero values are removed after decimation.
        double beat_freq_hz = 0;
        double nco_phase_init_rad = 0;

        void validate() const
        {
                if (!(sample_rate_hz > 0) || !std::isfinite(sample_rate_hz))
                {
                        detail::throw_argument("sample rate must be positive");
                }
                if (!std::isfinite(nco_freq_hz) || std::abs(nco_freq_hz) >= sample_rate_hz / 2)
                {
                        detail::throw_argument(
                                "NCO frequency " + std::to_string(nco_freq_hz) + " Hz is not below Nyquist");
                }
                if (!std::isfinite(beat_freq_hz) || !std::isfinite(nco_phase_init_rad))
                {
                        detail::throw_argument("beat frequency and initial phase must be finite");
                }
        }
};

/// Complex down-mixer. The mixer phase of sample n is derived from n itself
/// and wrapped to (-pi, pi], so rounding never accumulates over long runs.
/// Frequencies that are a small rational fraction of the sample rate use a
/// precomputed rotation table.
class NcoMixer
{
public:
        explicit NcoMixer(const DdcConfig& cfg) : cfg_(cfg)
        {
                cfg_.validate();
                ratio_ = cfg_.nco_freq_hz / cfg_.sample_rate_hz;
                period_ = detail::rational_period(std::abs(ratio_));
                if (period_ > 0)
                {
                        table_.resize(static_cast<std::size_t>(period_));
                        for (std::int64_t n = 0; n < period_; ++n)
                        {
                                table_[static_cast<std::size_t>(n)] = std::polar(1.0, -phase(n));
                        }
                }
        }

        /// Mixer phase 2*pi*f_t*n/f_s + phi_init wrapped to (-pi, pi].
        [[nodiscard]] double phase(const std::int64_t n) const
        {
                return detail::wrap_angle(2 * std::numbers::pi * detail::cycles_fraction(n, ratio_)
                                          + cfg_.nco_phase_init_rad);
        }

        [[nodiscard]] std::complex<double> oscillator(const std::int64_t n) const
        {
                if (period_ > 0)
                {
                        return table_[static_cast<std::size_t>(n % period_)];
                }
                return std::polar(1.0, -phase(n));
        }

        /// Mixes the next in.size() samples into out (same size).
        void mix(std::span<const double> in, std::span<std::complex<double>> out)
        {
                if (in.size() != out.size())
                {
                        detail::throw_argument("mixer input and output sizes differ");
                }
                for (std::size_t i = 0; i < in.size(); ++i)
                {
                        out[i] = in[i] * oscillator(index_++);
                }
        }

        [[nodiscard]] std::int64_t position() const
        {
                return index_;
        }

        [[nodiscard]] const DdcConfig& config() const
        {
                return cfg_;
        }

private:
        DdcConfig cfg_;
        double ratio_ = 0;
        std::int64_t period_ = 0;
        std::vector<std::complex<double>> table_;
        std::int64_t index_ = 0;
};

inline std::vector<std::complex<double>> nco_mix(std::span<const double> channel, const DdcConfig& cfg)
{
        NcoMixer mixer(cfg);
        std::vector<std::complex<double>> out(channel.size());
        mixer.mix(channel, out);
        return out;
}
}
