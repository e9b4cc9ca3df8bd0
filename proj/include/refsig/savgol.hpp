#pragma once

#include "error.hpp"
#include "stream.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
struct SavGolSpec
{
        int window_len = 7201;
        int poly_order = 2;
        int deriv_order = 0;

        void validate() const
        {
                if (window_len < 1 || window_len % 2 == 0)
                {
                        detail::throw_argument("Savitzky-Golay window must be odd, got " + std::to_string(window_len));
                }
                if (poly_order < 0 || poly_order >= window_len || window_len < poly_order + 2)
                {
                        detail::throw_argument("Savitzky-Golay window must be at least poly_order + 2");
                }
                if (deriv_order < 0 || deriv_order > 1 || deriv_order > poly_order)
                {
                        detail::throw_argument("Savitzky-Golay derivative order must be 0 or 1 and <= poly_order");
                }
        }
};

/// Convolution kernel (applied as y[i] = sum_k h[k] x[i + k - half]) of the
/// least-squares polynomial fit, evaluated or differentiated at the window
/// centre, per unit sample spacing.
inline std::vector<double> savgol_kernel(const SavGolSpec& spec)
{
        spec.validate();
        const int half = spec.window_len / 2;
        const int cols = spec.poly_order + 1;
        // abscissae scaled to [-1, 1] keep the normal equations well conditioned
        const double scale = half == 0 ? 1.0 : static_cast<double>(half);
        Eigen::MatrixXd a(spec.window_len, cols);
        for (int i = 0; i < spec.window_len; ++i)
        {
                const double x = (i - half) / scale;
                double p = 1;
                for (int j = 0; j < cols; ++j)
                {
                        a(i, j) = p;
                        p *= x;
                }
        }
        // coefficient j of the fit is row j of the pseudo-inverse R^-1 Q^T
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(spec.window_len, cols);
        const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd pinv = r.triangularView<Eigen::Upper>().solve(q.transpose());
        std::vector<double> h(static_cast<std::size_t>(spec.window_len));
        const double factor = spec.deriv_order == 0 ? 1.0 : 1.0 / scale;
        for (int i = 0; i < spec.window_len; ++i)
        {
                h[static_cast<std::size_t>(i)] = pinv(spec.deriv_order, i) * factor;
        }
        return h;
}

/// Smoothed (deriv 0) or differentiated (deriv 1, divided by dt) series.
/// The output holds only fully supported points: it is window_len - 1
/// samples shorter than the input and starts at the first window centre.
inline std::vector<double> savgol(std::span<const double> x, const SavGolSpec& spec, const double dt_s = 1)
{
        spec.validate();
        if (spec.deriv_order == 1 && !(dt_s > 0))
        {
                detail::throw_argument("sample spacing must be positive");
        }
        const auto w = static_cast<std::size_t>(spec.window_len);
        if (x.size() < w)
        {
                detail::throw_data(
                        "series of " + std::to_string(x.size()) + " points is shorter than the window of "
                        + std::to_string(w));
        }
        std::vector<double> h = savgol_kernel(spec);
        if (spec.deriv_order == 1)
        {
                for (double& v : h)
                {
                        v /= dt_s;
                }
        }
        std::vector<double> y(x.size() - w + 1);
        for (std::size_t i = 0; i < y.size(); ++i)
        {
                double acc = 0;
                for (std::size_t k = 0; k < w; ++k)
                {
                        acc += h[k] * x[i + k];
                }
                y[i] = acc;
        }
        return y;
}

/// Savitzky-Golay filtering of a uniform time-error series; the result
/// keeps the time axis of the window centres.
inline TimeErrorSeries savgol(const TimeErrorSeries& series, const SavGolSpec& spec)
{
        if (!series.times_s.empty())
        {
                detail::throw_data("Savitzky-Golay filtering needs a uniformly sampled series");
        }
        TimeErrorSeries out;
        out.values_s = savgol(series.values_s, spec, 1 / series.rate_hz);
        out.rate_hz = series.rate_hz;
        out.kind = series.kind;
        out.start_time_s = series.start_time_s + (spec.window_len / 2) / series.rate_hz;
        return out;
}
}
