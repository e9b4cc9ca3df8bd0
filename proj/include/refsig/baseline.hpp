#pragma once

// Classical references: dual mixer time difference (DMTD) beat processing
// and a non-interpolating time interval counter (TIC).

#include "detail/phase.hpp"
#include "error.hpp"
#include "fir_design.hpp"
#include "stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
struct DmtdConfig
{
        double transfer_freq_hz = 9.99e6;
        double reference_freq_hz = 10e6;
        double beat_freq_hz = 10e3;  // |f_r - f_t|
        FirStage lowpass;

        void validate(const double sample_rate_hz) const
        {
                if (!(transfer_freq_hz > 0) || transfer_freq_hz >= sample_rate_hz / 2)
                {
                        detail::throw_argument("transfer frequency must lie in (0, fs/2)");
                }
                if (!(beat_freq_hz > 0))
                {
                        detail::throw_argument("beat frequency must be positive");
                }
                lowpass.validate();
        }
};

/// DMTD configuration for the given frequencies. The beat low-pass is flat
/// to twice the beat frequency and rejects the (aliased) sum-frequency
/// product of the mixer by atten_db.
inline DmtdConfig make_dmtd_config(const double reference_freq_hz, const double transfer_freq_hz,
                                   const double sample_rate_hz, const double atten_db = 160)
{
        DmtdConfig cfg;
        cfg.reference_freq_hz = reference_freq_hz;
        cfg.transfer_freq_hz = transfer_freq_hz;
        cfg.beat_freq_hz = std::abs(reference_freq_hz - transfer_freq_hz);
        if (!(cfg.beat_freq_hz > 0))
        {
                detail::throw_argument("reference and transfer frequencies must differ");
        }
        const double nyq = sample_rate_hz / 2;
        double sum = std::fmod(reference_freq_hz + transfer_freq_hz, sample_rate_hz);
        if (sum > nyq)
        {
                sum = sample_rate_hz - sum;
        }
        const double pass = 2 * cfg.beat_freq_hz / nyq;
        const double stop = std::min(0.5 * (sum - cfg.beat_freq_hz) / nyq + pass, 1.0);
        if (!(stop > pass))
        {
                detail::throw_numeric("sum-frequency product falls into the beat band; choose another sample rate");
        }
        cfg.lowpass.taps = design_kaiser_lowpass(pass, stop, atten_db);
        cfg.lowpass.decimation = 1;
        return cfg;
}

struct BeatSignal
{
        std::vector<double> samples;
        double sample_rate_hz = 0;
        double start_time_s = 0;  // time of samples[0]
};

/// Multiplies by sin(2 pi f_t n / fs), low-pass filters and normalises to
/// unit amplitude. Only fully supported filter outputs are kept; the start
/// time accounts for the filter delay.
inline BeatSignal dmtd_beat(std::span<const double> x, const DmtdConfig& cfg, const double sample_rate_hz,
                            const double start_time_s = 0)
{
        cfg.validate(sample_rate_hz);
        const double gain = std::abs(amplitude_response(cfg.lowpass.taps, cfg.beat_freq_hz / (sample_rate_hz / 2)));
        if (gain < std::numbers::sqrt2 / 2)
        {
                detail::throw_argument("beat low-pass does not pass the beat frequency");
        }
        const std::size_t l = cfg.lowpass.taps.size();
        if (x.size() < l)
        {
                detail::throw_data("signal shorter than the beat low-pass");
        }
        const double ratio = cfg.transfer_freq_hz / sample_rate_hz;
        std::vector<double> mixed(x.size());
        for (std::size_t n = 0; n < x.size(); ++n)
        {
                const double c = detail::cycles_fraction(static_cast<std::int64_t>(n), ratio);
                mixed[n] = 2 * x[n] * std::sin(2 * std::numbers::pi * c);
        }
        BeatSignal beat;
        beat.sample_rate_hz = sample_rate_hz;
        beat.start_time_s = start_time_s + static_cast<double>(l - 1) / 2 / sample_rate_hz;
        beat.samples.resize(x.size() - l + 1);
        const double* h = cfg.lowpass.taps.data();
        for (std::size_t i = 0; i < beat.samples.size(); ++i)
        {
                double acc = 0;
                for (std::size_t k = 0; k < l; ++k)
                {
                        acc += h[k] * mixed[i + k];
                }
                beat.samples[i] = acc;
        }
        double power = 0;
        for (const double v : beat.samples)
        {
                power += v * v;
        }
        const double amp = std::sqrt(2 * power / static_cast<double>(beat.samples.size()));
        if (amp > 0)
        {
                for (double& v : beat.samples)
                {
                        v /= amp;
                }
        }
        return beat;
}

struct ZeroCrossings
{
        std::vector<double> times_s;
        std::vector<bool> rising;
        std::string diagnostic;
};

/// Sign changes located by linear interpolation. Samples >= 0 count as
/// positive; both polarities are reported.
inline ZeroCrossings zero_crossings(std::span<const double> x, const double sample_rate_hz,
                                    const double start_time_s = 0)
{
        ZeroCrossings z;
        for (std::size_t i = 1; i < x.size(); ++i)
        {
                const double a = x[i - 1];
                const double b = x[i];
                const bool pa = a >= 0;
                const bool pb = b >= 0;
                if (pa == pb)
                {
                        continue;
                }
                const double frac = a / (a - b);
                z.times_s.push_back(start_time_s + (static_cast<double>(i - 1) + frac) / sample_rate_hz);
                z.rising.push_back(pb);
        }
        if (z.times_s.empty())
        {
                z.diagnostic = "signal has no sign change";
        }
        return z;
}

inline ZeroCrossings zero_crossings(const BeatSignal& beat)
{
        return zero_crossings(beat.samples, beat.sample_rate_hz, beat.start_time_s);
}

struct TicSpec
{
        double clock_freq_hz = 250e6;
        double threshold = 0;
};

struct TicReading
{
        std::int64_t counts = 0;
        double interval_s = 0;
};

/// Whole clock periods between start and stop. A relative guard of 1e-9
/// counts keeps intervals of exactly k periods at k despite rounding.
inline TicReading tic_count(const double start_s, const double stop_s, const TicSpec& spec)
{
        if (!(spec.clock_freq_hz > 0))
        {
                detail::throw_argument("TIC clock must be positive");
        }
        if (!(stop_s >= start_s))
        {
                detail::throw_data("TIC stop precedes start");
        }
        TicReading r;
        r.counts = static_cast<std::int64_t>(std::floor((stop_s - start_s) * spec.clock_freq_hz + 1e-9));
        r.interval_s = static_cast<double>(r.counts) / spec.clock_freq_hz;
        return r;
}

/// Converts a beat-domain interval to the carrier domain: the beat carries
/// the carrier's phase, so time scales by f_b / f_r.
inline double dmtd_time_error(const double dt_tic_s, const double reference_freq_hz, const double beat_freq_hz)
{
        if (!(beat_freq_hz > 0) || !(reference_freq_hz > 0))
        {
                detail::throw_argument("frequencies must be positive");
        }
        return dt_tic_s * beat_freq_hz / reference_freq_hz;
}

struct DmtdResult
{
        TimeErrorSeries series;           // carrier-domain time error of A against B
        std::vector<double> tic_intervals_s;  // raw beat-domain readings
        std::size_t unmatched = 0;
};

/// Full DMTD measurement of channel A against channel B. Every A crossing
/// starts the counter and the next B crossing of equal polarity stops it.
/// Results are wrapped to half a carrier period around zero and signed so
/// that a phase lead of A gives a positive time error.
inline DmtdResult dmtd_measure(std::span<const double> a, std::span<const double> b, const DmtdConfig& cfg,
                               const double sample_rate_hz, const TicSpec& tic, const double start_time_s = 0)
{
        const ZeroCrossings za = zero_crossings(dmtd_beat(a, cfg, sample_rate_hz, start_time_s));
        const ZeroCrossings zb = zero_crossings(dmtd_beat(b, cfg, sample_rate_hz, start_time_s));
        if (za.times_s.empty() || zb.times_s.empty())
        {
                detail::throw_data("beat signal without zero crossings");
        }
        const double sign = cfg.reference_freq_hz > cfg.transfer_freq_hz ? 1.0 : -1.0;
        const double period = 1 / cfg.reference_freq_hz;
        DmtdResult res;
        res.series.kind = TimeErrorKind::sine;
        res.series.rate_hz = 2 * cfg.beat_freq_hz;
        std::size_t j = 0;
        for (std::size_t i = 0; i < za.times_s.size(); ++i)
        {
                const double start = za.times_s[i];
                while (j < zb.times_s.size() && zb.times_s[j] < start)
                {
                        ++j;
                }
                std::size_t k = j;
                while (k < zb.times_s.size() && zb.rising[k] != za.rising[i])
                {
                        ++k;
                }
                if (k == zb.times_s.size())
                {
                        ++res.unmatched;
                        continue;
                }
                const TicReading r = tic_count(start, zb.times_s[k], tic);
                double dt = sign * dmtd_time_error(r.interval_s, cfg.reference_freq_hz, cfg.beat_freq_hz);
                dt -= period * std::round(dt / period);
                res.tic_intervals_s.push_back(r.interval_s);
                res.series.times_s.push_back(start);
                res.series.values_s.push_back(dt);
        }
        if (res.series.values_s.empty())
        {
                detail::throw_data("no DMTD measurements: channel B has no crossing after channel A");
        }
        res.series.start_time_s = res.series.times_s.front();
        return res;
}
}
