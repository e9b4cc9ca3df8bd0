#pragma once

// Overlapping Allan deviation computed from time-error (phase) data.

#include "error.hpp"
#include "stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
struct AllanPoint
{
        double tau_s = 0;
        double adev = 0;
        std::size_t n_terms = 0;
};

struct AllanCurve
{
        std::vector<AllanPoint> points;
        /// One line per requested tau that could not be evaluated.
        std::vector<std::string> omitted;
};

/// Overlapping Allan deviation at averaging factor m for phase data x
/// sampled every tau0 seconds. Returns n_terms = 0 if 2m >= x.size().
inline AllanPoint overlapping_adev(std::span<const double> x, const double tau0_s, const std::size_t m)
{
        AllanPoint p;
        p.tau_s = static_cast<double>(m) * tau0_s;
        if (m == 0 || 2 * m >= x.size())
        {
                return p;
        }
        const std::size_t terms = x.size() - 2 * m;
        double acc = 0;
        for (std::size_t i = 0; i < terms; ++i)
        {
                const double d = x[i + 2 * m] - 2 * x[i + m] + x[i];
                acc += d * d;
        }
        p.n_terms = terms;
        p.adev = std::sqrt(acc / static_cast<double>(terms) / (2 * p.tau_s * p.tau_s));
        return p;
}

/// Averaging factors on a logarithmic grid, about per_decade per decade,
/// from 1 up to the largest m that still leaves one term.
inline std::vector<std::size_t> log_tau_factors(const std::size_t length, const int per_decade = 10)
{
        std::vector<std::size_t> ms;
        if (length < 3)
        {
                return ms;
        }
        const std::size_t max_m = (length - 1) / 2;
        for (int k = 0;; ++k)
        {
                const auto m = static_cast<std::size_t>(std::llround(std::pow(10.0, static_cast<double>(k) / per_decade)));
                if (m > max_m)
                {
                        break;
                }
                if (ms.empty() || m > ms.back())
                {
                        ms.push_back(m);
                }
        }
        return ms;
}

namespace detail
{
inline void require_uniform(const TimeErrorSeries& series)
{
        if (!series.times_s.empty())
        {
                throw_data("Allan deviation needs a uniformly sampled series");
        }
        if (!(series.rate_hz > 0) || !std::isfinite(series.rate_hz))
        {
                throw_data("series rate must be positive");
        }
}
}

/// Allan deviation at the requested averaging times. A tau that is not an
/// integer multiple of the sample interval, or that leaves no terms, is
/// listed in omitted instead. Taus are reported in increasing order.
inline AllanCurve allan_deviation(const TimeErrorSeries& series, std::vector<double> taus_s)
{
        detail::require_uniform(series);
        const double tau0 = 1 / series.rate_hz;
        std::sort(taus_s.begin(), taus_s.end());
        AllanCurve curve;
        for (const double tau : taus_s)
        {
                const double ratio = tau / tau0;
                const double m = std::round(ratio);
                if (!(tau > 0) || !std::isfinite(tau) || m < 1 || std::abs(ratio - m) > 1e-9 * std::max(1.0, m))
                {
                        curve.omitted.push_back("tau " + std::to_string(tau) + " s is not a positive multiple of "
                                                + std::to_string(tau0) + " s");
                        continue;
                }
                const auto mi = static_cast<std::size_t>(m);
                if (!curve.points.empty() && curve.points.back().tau_s == static_cast<double>(mi) * tau0)
                {
                        continue;
                }
                const AllanPoint p = overlapping_adev(series.values_s, tau0, mi);
                if (p.n_terms == 0)
                {
                        curve.omitted.push_back("tau " + std::to_string(tau) + " s needs more than "
                                                + std::to_string(series.values_s.size()) + " points");
                        continue;
                }
                curve.points.push_back(p);
        }
        return curve;
}

/// Allan deviation on the default logarithmic grid.
inline AllanCurve allan_deviation(const TimeErrorSeries& series)
{
        detail::require_uniform(series);
        std::vector<double> taus;
        for (const std::size_t m : log_tau_factors(series.values_s.size()))
        {
                taus.push_back(static_cast<double>(m) / series.rate_hz);
        }
        return allan_deviation(series, taus);
}
}
