#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace refsig::detail
{
/// Fractional part of k * ratio in [0, 1), computed with an error-free
/// product so that the phase of sample 2.5e9 is as accurate as sample 0.
inline double cycles_fraction(const std::int64_t k, const double ratio)
{
        const double kd = static_cast<double>(k);
        const double p = kd * ratio;
        const double e = std::fma(kd, ratio, -p);
        double f = (p - std::floor(p)) + e;
        f -= std::floor(f);
        return f;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
        constexpr double two_pi = 2 * std::numbers::pi;
        a = std::remainder(a, two_pi);
        if (a <= -std::numbers::pi)
        {
                a += two_pi;
        }
        return a;
}

/// Smallest q <= max_q with ratio * q integral (to 1e-12), or 0.
inline std::int64_t rational_period(const double ratio, const std::int64_t max_q = 4096)
{
        for (std::int64_t q = 1; q <= max_q; ++q)
        {
                const double p = ratio * static_cast<double>(q);
                if (std::abs(p - std::round(p)) < 1e-12)
                {
                        return q;
                }
        }
        return 0;
}
}
