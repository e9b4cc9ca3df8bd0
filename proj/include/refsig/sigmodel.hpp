#pragma once

// Synthetic sine and pulse reference signals with known phase/time errors.

#include "detail/phase.hpp"
#include "error.hpp"
#include "stream.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace refsig
{
/// Second-order low-pass step response, 0 for t < 0. Requires 0 < zeta < 1.
inline double lp2_step_response(const double t, const double omega0, const double zeta)
{
        if (!(zeta > 0 && zeta < 1))
        {
                detail::throw_numeric("damping must lie in (0, 1), got " + std::to_string(zeta));
        }
        if (!(omega0 > 0) || !std::isfinite(omega0))
        {
                detail::throw_numeric("cutoff must be positive, got " + std::to_string(omega0));
        }
        if (!std::isfinite(t))
        {
                detail::throw_numeric("time must be finite");
        }
        if (t < 0)
        {
                return 0;
        }
        const double wd = std::sqrt(1 - zeta * zeta);
        return 1 - std::exp(-zeta * omega0 * t) * std::sin(wd * omega0 * t + std::acos(zeta)) / wd;
}

//
// Phase error generators
//

struct ZeroPhase
{
};

struct ConstantPhase
{
        double rad = 0;
};

struct LinearPhase
{
        double rad_per_s = 0;
};

struct SinusoidalPhase
{
        double amplitude_rad = 0;
        double freq_hz = 0;
};

struct WhitePhase
{
        double rms_rad = 0;
};

/// Sampled phase error, linearly interpolated and held at the ends.
struct TablePhase
{
        std::vector<double> rad;
        double rate_hz = 1;
        double start_time_s = 0;
};

using PhaseErrorModel = std::variant<ZeroPhase, ConstantPhase, LinearPhase, SinusoidalPhase, WhitePhase, TablePhase>;

inline void validate(const PhaseErrorModel& model)
{
        const auto finite = [](const double v)
        {
                if (!std::isfinite(v))
                {
                        detail::throw_argument("phase error parameters must be finite");
                }
        };
        std::visit(
                [&](const auto& m)
                {
                        using T = std::decay_t<decltype(m)>;
                        if constexpr (std::is_same_v<T, ConstantPhase>)
                        {
                                finite(m.rad);
                        }
                        else if constexpr (std::is_same_v<T, LinearPhase>)
                        {
                                finite(m.rad_per_s);
                        }
                        else if constexpr (std::is_same_v<T, SinusoidalPhase>)
                        {
                                finite(m.amplitude_rad);
                                finite(m.freq_hz);
                        }
                        else if constexpr (std::is_same_v<T, WhitePhase>)
                        {
                                finite(m.rms_rad);
                                if (m.rms_rad < 0)
                                {
                                        detail::throw_argument("white phase rms must be non-negative");
                                }
                        }
                        else if constexpr (std::is_same_v<T, TablePhase>)
                        {
                                finite(m.rate_hz);
                                finite(m.start_time_s);
                                if (!(m.rate_hz > 0) || m.rad.empty())
                                {
                                        detail::throw_argument("phase table needs a positive rate and at least one entry");
                                }
                                for (const double v : m.rad)
                                {
                                        finite(v);
                                }
                        }
                },
                model);
}

/// Deterministic part of the phase error at time t (white noise excluded).
inline double deterministic_phase(const PhaseErrorModel& model, const double t)
{
        return std::visit(
                [t](const auto& m) -> double
                {
                        using T = std::decay_t<decltype(m)>;
                        if constexpr (std::is_same_v<T, ConstantPhase>)
                        {
                                return m.rad;
                        }
                        else if constexpr (std::is_same_v<T, LinearPhase>)
                        {
                                return m.rad_per_s * t;
                        }
                        else if constexpr (std::is_same_v<T, SinusoidalPhase>)
                        {
                                return m.amplitude_rad * std::sin(2 * std::numbers::pi * m.freq_hz * t);
                        }
                        else if constexpr (std::is_same_v<T, TablePhase>)
                        {
                                const double pos = (t - m.start_time_s) * m.rate_hz;
                                if (pos <= 0)
                                {
                                        return m.rad.front();
                                }
                                const auto last = static_cast<double>(m.rad.size() - 1);
                                if (pos >= last)
                                {
                                        return m.rad.back();
                                }
                                const auto i = static_cast<std::size_t>(pos);
                                const double frac = pos - static_cast<double>(i);
                                return m.rad[i] + frac * (m.rad[i + 1] - m.rad[i]);
                        }
                        else
                        {
                                return 0.0;
                        }
                },
                model);
}

struct SineModel
{
        double carrier_freq_hz = 10e6;
        double amplitude = 0.5;
        PhaseErrorModel phase_error = ZeroPhase{};
        std::optional<double> noise_snr_db;
        std::uint64_t seed = 1;
};

/// Standard deviation of additive noise giving the requested SNR against
/// the power of a sinusoid of the given amplitude.
inline double sine_noise_sigma(const double amplitude, const double snr_db)
{
        return amplitude / std::numbers::sqrt2 * std::pow(10.0, -snr_db / 20);
}

/// Pulse SNR is referred to the pulse amplitude (peak power).
inline double pulse_noise_sigma(const double amplitude, const double snr_db)
{
        return amplitude * std::pow(10.0, -snr_db / 20);
}

/// Sequential sine generator; successive calls continue the same signal so
/// arbitrarily long records can be produced in bounded memory.
class SineSynthesizer
{
public:
        SineSynthesizer(SineModel model, const double sample_rate_hz)
                : model_(std::move(model)), fs_(sample_rate_hz), ratio_(model_.carrier_freq_hz / sample_rate_hz),
                  rng_(model_.seed)
        {
                if (!(fs_ > 0) || !std::isfinite(fs_))
                {
                        detail::throw_argument("sample rate must be positive");
                }
                if (!(model_.carrier_freq_hz > 0) || !std::isfinite(model_.carrier_freq_hz))
                {
                        detail::throw_argument("carrier frequency must be positive");
                }
                if (!(model_.amplitude > 0 && model_.amplitude <= 1))
                {
                        detail::throw_argument("amplitude must lie in (0, 1]");
                }
                if (model_.carrier_freq_hz >= fs_ / 2)
                {
                        detail::throw_numeric(
                                "carrier " + std::to_string(model_.carrier_freq_hz) + " Hz violates Nyquist for "
                                + std::to_string(fs_) + " S/s");
                }
                validate(model_.phase_error);
                if (model_.noise_snr_db)
                {
                        sigma_ = sine_noise_sigma(model_.amplitude, *model_.noise_snr_db);
                }
                if (const auto* w = std::get_if<WhitePhase>(&model_.phase_error))
                {
                        white_rms_ = w->rms_rad;
                }
                is_zero_phase_ = std::holds_alternative<ZeroPhase>(model_.phase_error);
                period_ = detail::rational_period(ratio_);
                if (period_ > 0)
                {
                        const auto p = static_cast<std::int64_t>(std::llround(ratio_ * static_cast<double>(period_)));
                        table_.resize(static_cast<std::size_t>(period_));
                        for (std::int64_t i = 0; i < period_; ++i)
                        {
                                table_[static_cast<std::size_t>(i)] =
                                        2 * std::numbers::pi * static_cast<double>((p * i) % period_)
                                        / static_cast<double>(period_);
                        }
                }
        }

        void next(std::span<double> out)
        {
                const double two_pi = 2 * std::numbers::pi;
                for (double& v : out)
                {
                        const std::int64_t k = index_++;
                        const double carrier = period_ > 0 ? table_[static_cast<std::size_t>(k % period_)]
                                                           : two_pi * detail::cycles_fraction(k, ratio_);
                        double phase = 0;
                        if (!is_zero_phase_)
                        {
                                phase = deterministic_phase(model_.phase_error, static_cast<double>(k) / fs_);
                                if (white_rms_ > 0)
                                {
                                        phase += white_rms_ * normal_(rng_);
                                }
                        }
                        v = model_.amplitude * std::sin(carrier + phase);
                        if (sigma_ > 0)
                        {
                                v += sigma_ * normal_(rng_);
                        }
                }
        }

        [[nodiscard]] std::int64_t position() const
        {
                return index_;
        }

private:
        SineModel model_;
        double fs_;
        double ratio_;
        std::mt19937_64 rng_;
        boost::random::normal_distribution<double> normal_;
        double sigma_ = 0;
        double white_rms_ = 0;
        bool is_zero_phase_ = true;
        std::int64_t period_ = 0;
        std::vector<double> table_;
        std::int64_t index_ = 0;
};

inline std::size_t sample_count(const double sample_rate_hz, const double duration_s)
{
        if (!(duration_s > 0) || !std::isfinite(duration_s))
        {
                detail::throw_argument("duration must be positive");
        }
        return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

inline RealSampleStream synth_sine(const SineModel& model, const double sample_rate_hz, const double duration_s)
{
        SineSynthesizer synth(model, sample_rate_hz);
        std::vector<double> samples(sample_count(sample_rate_hz, duration_s));
        synth.next(samples);
        return make_stream(std::move(samples), sample_rate_hz);
}

//
// Pulse trains
//

struct PulseModel
{
        double period_s = 1;
        double high_s = 0.25;
        double cutoff_rad_per_s = 2 * std::numbers::pi * 5e6;
        double damping = 0.6;
        std::vector<double> time_errors_s;
        double amplitude = 0.5;
};

/// Random-access pulse train evaluator with optional additive noise.
class PulseSynthesizer
{
public:
        PulseSynthesizer(PulseModel model, const double sample_rate_hz, const std::optional<double> noise_snr_db = {},
                         const std::uint64_t seed = 1)
                : model_(std::move(model)), fs_(sample_rate_hz), rng_(seed)
        {
                if (!(fs_ > 0) || !std::isfinite(fs_))
                {
                        detail::throw_argument("sample rate must be positive");
                }
                if (!(model_.high_s > 0 && model_.high_s < model_.period_s))
                {
                        detail::throw_argument("pulse high time must lie in (0, period)");
                }
                if (!(model_.damping > 0 && model_.damping < 1))
                {
                        detail::throw_numeric("damping must lie in (0, 1), got " + std::to_string(model_.damping));
                }
                if (!(model_.cutoff_rad_per_s > 0))
                {
                        detail::throw_numeric("cutoff must be positive");
                }
                for (std::size_t n = 0; n < model_.time_errors_s.size(); ++n)
                {
                        const double te = model_.time_errors_s[n];
                        if (!std::isfinite(te) || std::abs(te) >= model_.period_s / 2)
                        {
                                detail::throw_numeric(
                                        "time error of pulse " + std::to_string(n)
                                        + " is not below half a period (overlapping-pulse ambiguity)");
                        }
                }
                wd_ = std::sqrt(1 - model_.damping * model_.damping);
                phase0_ = std::acos(model_.damping);
                decay_ = model_.damping * model_.cutoff_rad_per_s;
                tail_s_ = std::log(1e12 / wd_) / decay_;
                samples_per_period_ = model_.period_s * fs_;
                if (noise_snr_db)
                {
                        sigma_ = pulse_noise_sigma(model_.amplitude, *noise_snr_db);
                }
        }

        /// Noiseless value at sample index k.
        [[nodiscard]] double value(const std::int64_t k) const
        {
                const double t = static_cast<double>(k) / fs_;
                const double period = model_.period_s;
                const auto n_hi = static_cast<std::int64_t>(std::floor((t + period / 2) / period));
                const auto n_lo =
                        static_cast<std::int64_t>(std::floor((t - model_.high_s - tail_s_ - period / 2) / period));
                double sum = 0;
                for (std::int64_t n = n_lo; n <= n_hi; ++n)
                {
                        const double tau = (static_cast<double>(k) - static_cast<double>(n) * samples_per_period_) / fs_
                                           - time_error(n);
                        sum += pulse_shape(tau);
                }
                return model_.amplitude * sum;
        }

        /// Writes samples first_index, first_index+1, ... into out, adding noise
        /// drawn sequentially from the generator.
        void fill(const std::int64_t first_index, std::span<double> out)
        {
                for (std::size_t i = 0; i < out.size(); ++i)
                {
                        out[i] = value(first_index + static_cast<std::int64_t>(i));
                        if (sigma_ > 0)
                        {
                                out[i] += sigma_ * normal_(rng_);
                        }
                }
        }

        [[nodiscard]] double time_error(const std::int64_t n) const
        {
                if (n < 0 || static_cast<std::size_t>(n) >= model_.time_errors_s.size())
                {
                        return 0;
                }
                return model_.time_errors_s[static_cast<std::size_t>(n)];
        }

        [[nodiscard]] const PulseModel& model() const
        {
                return model_;
        }

private:
        // decaying part of the step response: h(t) = 1 - g(t)
        [[nodiscard]] double ring(const double tau) const
        {
                if (tau > tail_s_)
                {
                        return 0;
                }
                return std::exp(-decay_ * tau) * std::sin(wd_ * model_.cutoff_rad_per_s * tau + phase0_) / wd_;
        }

        [[nodiscard]] double pulse_shape(const double tau) const
        {
                if (tau < 0)
                {
                        return 0;
                }
                if (tau < model_.high_s)
                {
                        return 1 - ring(tau);
                }
                return ring(tau - model_.high_s) - ring(tau);
        }

        PulseModel model_;
        double fs_;
        std::mt19937_64 rng_;
        boost::random::normal_distribution<double> normal_;
        double sigma_ = 0;
        double wd_ = 0;
        double phase0_ = 0;
        double decay_ = 0;
        double tail_s_ = 0;
        double samples_per_period_ = 0;
};

inline RealSampleStream synth_pulse_train(const PulseModel& model, const double sample_rate_hz,
                                          const double duration_s, const std::optional<double> noise_snr_db = {},
                                          const std::uint64_t seed = 1)
{
        if (duration_s < model.period_s)
        {
                detail::throw_argument("duration must cover at least one pulse period");
        }
        PulseSynthesizer synth(model, sample_rate_hz, noise_snr_db, seed);
        std::vector<double> samples(sample_count(sample_rate_hz, duration_s));
        synth.fill(0, samples);
        return make_stream(std::move(samples), sample_rate_hz);
}

//
// ADC quantization
//

struct AdcSpec
{
        int bits = 14;
        double input_level = 1.0;
};

struct QuantizeResult
{
        RealSampleStream stream;
        std::size_t clipped = 0;
};

/// Maps 1.0 * input_level to the largest positive code and rounds to the
/// nearest code. Streams that already hold codes are only range-clamped,
/// which makes the operation idempotent.
inline QuantizeResult quantize(const RealSampleStream& stream, const AdcSpec& adc)
{
        if (adc.bits < 2 || adc.bits > 24)
        {
                detail::throw_argument("ADC bits must lie in [2, 24]");
        }
        if (!(adc.input_level > 0 && adc.input_level <= 1))
        {
                detail::throw_argument("ADC input level must lie in (0, 1]");
        }
        const double max_code = std::ldexp(1.0, adc.bits - 1) - 1;
        const double min_code = -std::ldexp(1.0, adc.bits - 1);
        const bool already_codes = stream.format == SampleFormat::int16;
        const double scale = already_codes ? 1.0 : adc.input_level * max_code;

        QuantizeResult res;
        res.stream = stream;
        res.stream.format = adc.bits <= 16 ? SampleFormat::int16 : SampleFormat::float64;
        for (double& v : res.stream.samples)
        {
                double code = std::round(v * scale);
                if (code > max_code || code < min_code)
                {
                        ++res.clipped;
                        code = std::clamp(code, min_code, max_code);
                }
                v = code;
        }
        return res;
}
}
