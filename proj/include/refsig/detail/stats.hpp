#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace refsig::detail
{
inline double median(std::span<const double> v)
{
        if (v.empty())
        {
                return 0;
        }
        std::vector<double> tmp(v.begin(), v.end());
        const std::size_t mid = tmp.size() / 2;
        std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid), tmp.end());
        const double hi = tmp[mid];
        if (tmp.size() % 2 == 1)
        {
                return hi;
        }
        const double lo = *std::max_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(mid));
        return (lo + hi) / 2;
}

inline double mean(std::span<const double> v)
{
        double s = 0;
        for (const double x : v)
        {
                s += x;
        }
        return v.empty() ? 0 : s / static_cast<double>(v.size());
}

inline double rms(std::span<const double> v)
{
        double s = 0;
        for (const double x : v)
        {
                s += x * x;
        }
        return v.empty() ? 0 : std::sqrt(s / static_cast<double>(v.size()));
}
}
