#pragma once

// Kaiser-windowed sinc low-pass design. Frequencies are normalised to the
// Nyquist frequency of the filter's input rate (1.0 == fs/2).

#include "error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
struct FirStage
{
        std::vector<double> taps;
        int decimation = 1;

        void validate() const
        {
                if (taps.empty())
                {
                        detail::throw_argument("FIR stage has no taps");
                }
                if (decimation < 1)
                {
                        detail::throw_argument("decimation factor must be >= 1");
                }
                const std::size_t n = taps.size();
                double sum = 0;
                for (std::size_t k = 0; k < n; ++k)
                {
                        if (taps[k] != taps[n - 1 - k])
                        {
                                detail::throw_argument("FIR taps are not symmetric");
                        }
                        sum += taps[k];
                }
                if (std::abs(sum - 1) > 1e-12)
                {
                        detail::throw_argument("FIR DC gain " + std::to_string(sum) + " is not 1");
                }
        }
};

/// Zero-phase amplitude response of symmetric taps at f (fraction of
/// Nyquist). Magnitude is its absolute value.
inline double amplitude_response(std::span<const double> taps, const double f)
{
        const std::size_t n = taps.size();
        const double w = std::numbers::pi * f;
        const double centre = static_cast<double>(n - 1) / 2;
        double acc = 0;
        for (std::size_t k = 0; k < n; ++k)
        {
                acc += taps[k] * std::cos(w * (static_cast<double>(k) - centre));
        }
        return acc;
}

inline double magnitude_db(std::span<const double> taps, const double f)
{
        const double a = std::abs(amplitude_response(taps, f));
        return 20 * std::log10(std::max(a, 1e-300));
}

/// Largest magnitude (dB) over [from, to], read from a zero-padded FFT
/// whose bin spacing (at most 1/(16 N) of Nyquist) resolves every sidelobe.
/// The end points are evaluated directly.
inline double max_magnitude_db(std::span<const double> taps, const double from, const double to)
{
        std::size_t m = 1;
        while (m < 32 * taps.size())
        {
                m <<= 1;
        }
        std::vector<double> padded(m, 0.0);
        std::copy(taps.begin(), taps.end(), padded.begin());
        std::vector<std::complex<double>> spec;
        Eigen::FFT<double> fft;
        fft.fwd(spec, padded);
        double worst = std::max(magnitude_db(taps, from), magnitude_db(taps, to));
        const double bin = 2.0 / static_cast<double>(m);
        const auto first = static_cast<std::size_t>(std::ceil(from / bin));
        for (std::size_t k = first; k <= m / 2 && static_cast<double>(k) * bin <= to; ++k)
        {
                worst = std::max(worst, 20 * std::log10(std::max(std::abs(spec[k]), 1e-300)));
        }
        return worst;
}

inline double kaiser_beta(const double atten_db)
{
        if (atten_db > 50)
        {
                return 0.1102 * (atten_db - 8.7);
        }
        if (atten_db >= 21)
        {
                return 0.5842 * std::pow(atten_db - 21, 0.4) + 0.07886 * (atten_db - 21);
        }
        return 0;
}

/// Odd tap count estimated by Kaiser's formula for a transition of the
/// given width (fraction of Nyquist).
inline std::size_t kaiser_length(const double atten_db, const double transition)
{
        const double dw = std::numbers::pi * transition;
        auto n = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * dw))) + 1;
        if (n % 2 == 0)
        {
                ++n;
        }
        return std::max<std::size_t>(n, 3);
}

inline std::vector<double> kaiser_window(const std::size_t n, const double beta)
{
        std::vector<double> w(n);
        const double denom = std::cyl_bessel_i(0.0, beta);
        const double half = static_cast<double>(n - 1) / 2;
        for (std::size_t k = 0; k <= (n - 1) / 2; ++k)
        {
                const double r = (static_cast<double>(k) - half) / half;
                const double v = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1 - r * r))) / denom;
                w[k] = v;
                w[n - 1 - k] = v;
        }
        return w;
}

/// Windowed sinc with -6 dB point at fc, exactly symmetric, DC gain 1.
inline std::vector<double> windowed_sinc(const std::size_t n, const double fc, const double beta)
{
        const std::vector<double> w = kaiser_window(n, beta);
        std::vector<double> h(n);
        const std::size_t mid = (n - 1) / 2;
        for (std::size_t k = 0; k <= mid; ++k)
        {
                const double x = static_cast<double>(k) - static_cast<double>(mid);
                const double s = x == 0 ? fc : std::sin(std::numbers::pi * fc * x) / (std::numbers::pi * x);
                h[k] = s * w[k];
                h[n - 1 - k] = h[k];
        }
        double sum = 0;
        for (std::size_t k = 0; k < mid; ++k)
        {
                sum += 2 * h[k];
        }
        sum += h[mid];
        for (double& v : h)
        {
                v /= sum;
        }
        return h;
}

namespace detail
{
inline void check_design_args(const double atten_db, const double pass, const double stop)
{
        if (!(atten_db >= 40 && atten_db <= 160))
        {
                throw_argument("stopband attenuation must lie in [40, 160] dB");
        }
        if (!(pass > 0 && stop > pass && stop <= 1))
        {
                throw_argument(
                        "band edges must satisfy 0 < pass < stop <= 1 (got " + std::to_string(pass) + ", "
                        + std::to_string(stop) + ")");
        }
}

[[noreturn]] inline void throw_too_long(const std::size_t required, const std::size_t max_taps)
{
        throw_numeric(
                "filter design infeasible: needs at least " + std::to_string(required) + " taps, budget is "
                + std::to_string(max_taps));
}

/// Frequency where the amplitude response falls to 1/sqrt(2).
inline double three_db_point(std::span<const double> taps, double lo, double hi)
{
        const double target = std::numbers::sqrt2 / 2;
        for (int i = 0; i < 60; ++i)
        {
                const double mid = (lo + hi) / 2;
                if (amplitude_response(taps, mid) > target)
                {
                        lo = mid;
                }
                else
                {
                        hi = mid;
                }
        }
        return (lo + hi) / 2;
}
}

/// Low-pass that is flat up to pass and at least atten_db down from stop
/// to Nyquist. Grows the Kaiser estimate until the evaluated response meets
/// the bound.
inline std::vector<double> design_kaiser_lowpass(const double pass, const double stop, const double atten_db,
                                                 const std::size_t max_taps = 16383)
{
        detail::check_design_args(atten_db, pass, stop);
        const double beta = kaiser_beta(atten_db);
        const double fc = (pass + stop) / 2;
        std::size_t n = kaiser_length(atten_db, stop - pass);
        if (n > max_taps)
        {
                detail::throw_too_long(n, max_taps);
        }
        while (true)
        {
                std::vector<double> h = windowed_sinc(n, fc, beta);
                if (max_magnitude_db(h, stop, 1.0) <= -atten_db)
                {
                        return h;
                }
                n += 2 * std::max<std::size_t>(1, n / 1000);
                if (n > max_taps)
                {
                        detail::throw_too_long(n, max_taps);
                }
        }
}

/// Low-pass whose -3 dB point sits at cutoff and whose response is at least
/// atten_db down from cutoff + transition to Nyquist.
inline FirStage design_fir_lowpass(const double cutoff, const double atten_db, const double transition,
                                   const std::size_t max_taps = 16383)
{
        const double stop = cutoff + transition;
        detail::check_design_args(atten_db, cutoff, stop);
        const double beta = kaiser_beta(atten_db);
        // The 3 dB point of a Kaiser sinc sits roughly 0.12 transition widths
        // below its -6 dB point; size the window from that, then tune fc.
        const double width = transition / 0.62;
        std::size_t n = kaiser_length(atten_db, width);
        if (n > max_taps)
        {
                detail::throw_too_long(n, max_taps);
        }
        while (true)
        {
                double lo = cutoff;
                double hi = stop;
                std::vector<double> h;
                for (int i = 0; i < 50; ++i)
                {
                        const double fc = (lo + hi) / 2;
                        h = windowed_sinc(n, fc, beta);
                        if (detail::three_db_point(h, 0, std::min(1.0, fc + width)) < cutoff)
                        {
                                lo = fc;
                        }
                        else
                        {
                                hi = fc;
                        }
                }
                h = windowed_sinc(n, (lo + hi) / 2, beta);
                if (max_magnitude_db(h, stop, 1.0) <= -atten_db)
                {
                        return FirStage{std::move(h), 1};
                }
                n += 2 * std::max<std::size_t>(1, n / 1000);
                if (n > max_taps)
                {
                        detail::throw_too_long(n, max_taps);
                }
        }
}
}
