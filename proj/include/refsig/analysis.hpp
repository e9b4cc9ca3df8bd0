#pragma once

// Post-processing: phase difference of two basebands, time-error
// conversion, rate reduction, edge pairing and drift statistics.

#include "allan.hpp"
#include "decimator.hpp"
#include "detail/stats.hpp"
#include "error.hpp"
#include "savgol.hpp"
#include "stream.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
namespace detail
{
inline void require_aligned(const ComplexBaseband& a, const ComplexBaseband& b)
{
        if (a.iq.size() != b.iq.size())
        {
                throw_data("baseband lengths differ: " + std::to_string(a.iq.size()) + " vs "
                           + std::to_string(b.iq.size()));
        }
        if (std::abs(a.sample_rate_hz - b.sample_rate_hz) > 1e-9 * std::max(a.sample_rate_hz, b.sample_rate_hz))
        {
                throw_data("baseband rates differ");
        }
}
}

/// arg(zA / zB) per sample, in (-pi, pi].
inline std::vector<double> complex_phase_difference(const ComplexBaseband& a, const ComplexBaseband& b)
{
        detail::require_aligned(a, b);
        std::vector<double> out(a.iq.size());
        for (std::size_t i = 0; i < out.size(); ++i)
        {
                if (b.iq[i] == std::complex<double>{})
                {
                        detail::throw_numeric("zero divisor at sample " + std::to_string(i));
                }
                const double p = std::arg(a.iq[i] * std::conj(b.iq[i]));
                out[i] = p == -std::numbers::pi ? std::numbers::pi : p;
        }
        return out;
}

/// Adds multiples of 2*pi so successive differences fall in (-pi, pi].
inline std::vector<double> unwrap_phase(std::span<const double> wrapped)
{
        std::vector<double> out(wrapped.begin(), wrapped.end());
        constexpr double two_pi = 2 * std::numbers::pi;
        double offset = 0;
        for (std::size_t i = 1; i < out.size(); ++i)
        {
                double d = wrapped[i] - wrapped[i - 1];
                double k = 0;
                while (d + k * two_pi > std::numbers::pi)
                {
                        k -= 1;
                }
                while (d + k * two_pi <= -std::numbers::pi)
                {
                        k += 1;
                }
                offset += k * two_pi;
                out[i] = wrapped[i] + offset;
        }
        return out;
}

/// dt = phase / (2 pi f_r).
inline TimeErrorSeries phase_to_time_error(std::span<const double> phase_rad, const double carrier_hz,
                                           const double rate_hz = 1, const double start_time_s = 0)
{
        if (!(carrier_hz > 0))
        {
                detail::throw_argument("carrier frequency must be positive");
        }
        TimeErrorSeries s;
        s.values_s.resize(phase_rad.size());
        const double k = 2 * std::numbers::pi * carrier_hz;
        for (std::size_t i = 0; i < phase_rad.size(); ++i)
        {
                s.values_s[i] = phase_rad[i] / k;
        }
        s.rate_hz = rate_hz;
        s.start_time_s = start_time_s;
        s.kind = TimeErrorKind::sine;
        return s;
}

/// Time error of channel A against channel B from their basebands.
inline TimeErrorSeries sine_time_error(const ComplexBaseband& a, const ComplexBaseband& b, const double carrier_hz)
{
        const std::vector<double> phase = unwrap_phase(complex_phase_difference(a, b));
        return phase_to_time_error(phase, carrier_hz, a.sample_rate_hz, a.start_time_s);
}

//
// Reduction to one sample per second
//

namespace detail
{
inline bool split_rate(long long n, const int max_stage, std::vector<int>& stages)
{
        stages.clear();
        int tens = 0;
        while (n > 1 && n % 10 == 0)
        {
                n /= 10;
                ++tens;
        }
        if (n > 1)
        {
                // remainder split into the fewest factors of at most max_stage
                std::vector<int> rest;
                while (n > 1)
                {
                        int f = static_cast<int>(std::min<long long>(n, max_stage));
                        while (f > 1 && n % f != 0)
                        {
                                --f;
                        }
                        if (f == 1)
                        {
                                return false;
                        }
                        rest.push_back(f);
                        n /= f;
                }
                stages = rest;
        }
        stages.insert(stages.end(), static_cast<std::size_t>(tens), 10);
        if (stages.empty())
        {
                stages.push_back(1);
        }
        return true;
}

inline std::string describe_stages(const std::vector<int>& stages)
{
        std::string s;
        for (std::size_t i = 0; i < stages.size(); ++i)
        {
                s += (i ? "x" : "") + std::to_string(stages[i]);
        }
        return s;
}
}

/// Stage factors that take rate_hz down to 1 Hz: any non-decade remainder
/// first, then stages of 10.
inline std::vector<int> one_hz_stages(const double rate_hz, const int max_stage = 50)
{
        const long long n = std::llround(rate_hz);
        if (n < 1 || std::abs(rate_hz - static_cast<double>(n)) > 1e-9 * rate_hz)
        {
                detail::throw_numeric("rate " + std::to_string(rate_hz) + " Hz is not an integer multiple of 1 Hz");
        }
        std::vector<int> stages;
        if (detail::split_rate(n, max_stage, stages))
        {
                return stages;
        }
        std::string msg = "rate " + std::to_string(n) + " Hz has a prime factor above " + std::to_string(max_stage)
                          + "; feasible nearby rates:";
        std::vector<int> alt;
        for (long long d = 1, found = 0; found < 2 && d < n; ++d)
        {
                for (const long long cand : {n - d, n + d})
                {
                        if (found < 2 && cand > 1 && detail::split_rate(cand, max_stage, alt))
                        {
                                msg += " " + std::to_string(cand) + " (" + detail::describe_stages(alt) + ")";
                                ++found;
                        }
                }
        }
        detail::throw_numeric(msg);
}

inline DecimatorSpec one_hz_decimator(const double rate_hz, const double atten_db = 120)
{
        return design_decimator(one_hz_stages(rate_hz), atten_db, 0.8);
}

inline TimeErrorSeries decimate_to_1hz(const TimeErrorSeries& series, const double atten_db = 120)
{
        if (!series.times_s.empty())
        {
                detail::throw_data("rate reduction needs a uniformly sampled series");
        }
        const DecimatorSpec spec = one_hz_decimator(series.rate_hz, atten_db);
        const std::size_t warmup = warmup_samples(spec);
        if (series.values_s.size() < warmup)
        {
                detail::throw_data("series of " + std::to_string(series.values_s.size())
                                   + " points is shorter than the 1 Hz decimator warm-up of " + std::to_string(warmup));
        }
        DecimationChain<double> chain(spec);
        TimeErrorSeries out;
        chain.push(series.values_s, out.values_s);
        out.rate_hz = series.rate_hz / spec.total_decimation;
        out.start_time_s = series.start_time_s + chain.delay_input_samples() / series.rate_hz;
        out.kind = series.kind;
        return out;
}

inline ComplexBaseband decimate_to_1hz(const ComplexBaseband& z, const double atten_db = 120)
{
        return fir_decimate(z, one_hz_decimator(z.sample_rate_hz, atten_db));
}

//
// Pulse edge pairing
//

struct PairedEdges
{
        TimeErrorSeries series;
        std::size_t unmatched_a = 0;
        std::size_t unmatched_b = 0;
};

/// Pairs every event of a with the nearest unused event of b within
/// max_offset_s (default: half the median spacing of a) and reports
/// time_a - time_b at time_a.
inline PairedEdges pair_edge_times(const EdgeEventSeries& a, const EdgeEventSeries& b,
                                   std::optional<double> max_offset_s = {})
{
        if (a.events.empty() || b.events.empty())
        {
                detail::throw_data("edge pairing needs two non-empty event series");
        }
        if (!max_offset_s)
        {
                if (a.events.size() < 2)
                {
                        detail::throw_argument("maximum offset must be given for a single event");
                }
                std::vector<double> gaps;
                for (std::size_t i = 1; i < a.events.size(); ++i)
                {
                        gaps.push_back(a.events[i].time_s - a.events[i - 1].time_s);
                }
                max_offset_s = detail::median(gaps) / 2;
        }
        const double lim = *max_offset_s;
        PairedEdges res;
        res.series.kind = TimeErrorKind::pulse;
        std::vector<bool> used(b.events.size(), false);
        std::size_t start = 0;
        for (const EdgeEvent& ea : a.events)
        {
                while (start < b.events.size() && b.events[start].time_s < ea.time_s - lim)
                {
                        ++start;
                }
                std::size_t best = b.events.size();
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t j = start; j < b.events.size() && b.events[j].time_s <= ea.time_s + lim; ++j)
                {
                        const double d = std::abs(b.events[j].time_s - ea.time_s);
                        if (!used[j] && d < best_d)
                        {
                                best = j;
                                best_d = d;
                        }
                }
                if (best == b.events.size())
                {
                        ++res.unmatched_a;
                        continue;
                }
                used[best] = true;
                res.series.times_s.push_back(ea.time_s);
                res.series.values_s.push_back(ea.time_s - b.events[best].time_s);
        }
        res.unmatched_b = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
        if (res.series.values_s.empty())
        {
                detail::throw_data("no edge pairs within " + std::to_string(lim) + " s");
        }
        if (res.series.times_s.size() >= 2)
        {
                std::vector<double> gaps;
                for (std::size_t i = 1; i < res.series.times_s.size(); ++i)
                {
                        gaps.push_back(res.series.times_s[i] - res.series.times_s[i - 1]);
                }
                res.series.rate_hz = 1 / detail::median(gaps);
        }
        res.series.start_time_s = res.series.times_s.front();
        return res;
}

//
// Drift and summary statistics
//

struct DriftFit
{
        double slope = 0;          // s/s
        double intercept_s = 0;    // value at t = 0
        double residual_rms_s = 0;
        double slope_stderr = 0;
};

/// Ordinary least-squares line through (t, dt).
inline DriftFit fit_linear_drift(std::span<const double> t, std::span<const double> y)
{
        if (t.size() != y.size())
        {
                detail::throw_data("time and value counts differ");
        }
        if (y.size() < 3)
        {
                detail::throw_data("drift fit needs at least 3 points");
        }
        const double n = static_cast<double>(y.size());
        const double tm = detail::mean(t);
        const double ym = detail::mean(y);
        double stt = 0;
        double sty = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
        {
                const double dt = t[i] - tm;
                stt += dt * dt;
                sty += dt * (y[i] - ym);
        }
        if (!(stt > 0))
        {
                detail::throw_numeric("degenerate time axis: all samples at the same time");
        }
        DriftFit fit;
        fit.slope = sty / stt;
        fit.intercept_s = ym - fit.slope * tm;
        double ss = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
        {
                const double r = y[i] - (ym + fit.slope * (t[i] - tm));
                ss += r * r;
        }
        fit.residual_rms_s = std::sqrt(ss / n);
        fit.slope_stderr = std::sqrt(ss / (n - 2) / stt);
        return fit;
}

inline DriftFit fit_linear_drift(const TimeErrorSeries& series)
{
        const std::vector<double> t = series.time_axis();
        return fit_linear_drift(t, series.values_s);
}

struct SummaryStats
{
        double sigma_s = 0;  // population standard deviation
        double mu_s = 0;
        double linear_drift = 0;  // s/s, 0 when fewer than 3 points
};

inline SummaryStats summary_stats(const TimeErrorSeries& series)
{
        if (series.values_s.empty())
        {
                detail::throw_data("summary of an empty series");
        }
        SummaryStats s;
        s.mu_s = detail::mean(series.values_s);
        double acc = 0;
        for (const double v : series.values_s)
        {
                acc += (v - s.mu_s) * (v - s.mu_s);
        }
        s.sigma_s = std::sqrt(acc / static_cast<double>(series.values_s.size()));
        if (series.values_s.size() >= 3)
        {
                s.linear_drift = fit_linear_drift(series).slope;
        }
        return s;
}
}
