#pragma once

// Sub-sample edge timing: Schmitt trigger, spectral zero-padding
// interpolation of a short window, linear interpolation to the threshold.

#include "detail/stats.hpp"
#include "error.hpp"
#include "stream.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
enum class Polarity
{
        rising,
        falling,
};

struct TriggerSpec
{
        double low_threshold = 0.3;
        double high_threshold = 0.7;
        Polarity polarity = Polarity::rising;
        int window_before = 8;
        int window_after = 8;
        int interp_factor = 20;

        void validate() const
        {
                if (!std::isfinite(low_threshold) || !std::isfinite(high_threshold) || !(low_threshold < high_threshold))
                {
                        detail::throw_argument("trigger needs finite thresholds with low < high");
                }
                if (window_before < 1 || window_after < 1 || window_before + window_after < 4)
                {
                        detail::throw_argument("trigger window must span at least 4 samples on both sides combined");
                }
                if (interp_factor < 1)
                {
                        detail::throw_argument("interpolation factor must be >= 1");
                }
        }

        /// Threshold the refinement step interpolates to, in the rising frame.
        [[nodiscard]] double refine_threshold() const
        {
                return polarity == Polarity::rising ? high_threshold : 1 - low_threshold;
        }
};

/// Signal low and high levels used to normalise samples to [0, 1].
struct SignalLevels
{
        double low = 0;
        double high = 1;

        [[nodiscard]] double normalise(const double v) const
        {
                return (v - low) / (high - low);
        }
};

/// Medians of the samples below and above the midrange.
inline SignalLevels estimate_levels(std::span<const double> x)
{
        if (x.empty())
        {
                detail::throw_data("cannot estimate levels of an empty signal");
        }
        const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
        const double mid = (*mn + *mx) / 2;
        std::vector<double> lo;
        std::vector<double> hi;
        for (const double v : x)
        {
                (v < mid ? lo : hi).push_back(v);
        }
        SignalLevels l;
        l.low = lo.empty() ? *mn : detail::median(lo);
        l.high = hi.empty() ? *mx : detail::median(hi);
        return l;
}

/// Streaming hysteresis comparator. An event fires at the first sample at
/// or beyond the fire threshold after the trigger was armed by a sample at
/// or beyond the arm threshold on the other side.
class SchmittTrigger
{
public:
        SchmittTrigger(const TriggerSpec& spec, const SignalLevels& levels) : spec_(spec), levels_(levels)
        {
                spec_.validate();
                if (!(levels_.high > levels_.low))
                {
                        detail::throw_argument("signal high level must exceed the low level");
                }
        }

        /// Feeds samples; indices of fired events (counted from the first
        /// sample ever pushed) are appended to out.
        void push(std::span<const double> x, std::vector<std::int64_t>& out)
        {
                for (const double raw : x)
                {
                        double v = levels_.normalise(raw);
                        if (spec_.polarity == Polarity::falling)
                        {
                                v = 1 - v;
                        }
                        const double arm = spec_.polarity == Polarity::rising ? spec_.low_threshold : 1 - spec_.high_threshold;
                        const double fire = spec_.polarity == Polarity::rising ? spec_.high_threshold : 1 - spec_.low_threshold;
                        if (v <= arm)
                        {
                                armed_ = true;
                        }
                        else if (armed_ && v >= fire)
                        {
                                out.push_back(index_);
                                armed_ = false;
                        }
                        ++index_;
                }
        }

        [[nodiscard]] std::int64_t position() const
        {
                return index_;
        }

private:
        TriggerSpec spec_;
        SignalLevels levels_;
        bool armed_ = false;
        std::int64_t index_ = 0;
};

struct CoarseEdges
{
        std::vector<std::int64_t> indices;
        std::string diagnostic;
};

/// Coarse edge indices of samples already normalised by levels.
inline CoarseEdges schmitt_detect(std::span<const double> x, const TriggerSpec& spec, const SignalLevels& levels = {})
{
        SchmittTrigger trig(spec, levels);
        CoarseEdges res;
        trig.push(x, res.indices);
        if (res.indices.empty() && !x.empty())
        {
                const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
                const double lo = levels.normalise(*mn);
                const double hi = levels.normalise(*mx);
                if (spec.low_threshold < lo || spec.high_threshold > hi)
                {
                        res.diagnostic = "thresholds outside the normalised signal range [" + std::to_string(lo) + ", "
                                         + std::to_string(hi) + "]";
                }
                else
                {
                        res.diagnostic = "no complete threshold transition found";
                }
        }
        return res;
}

/// Trigonometric interpolation of a window by an integer factor: the
/// spectrum is zero-padded to factor times the length, with the Nyquist bin
/// of even lengths split between both halves. Dense sample k*factor
/// reproduces input sample k.
inline std::vector<double> spectral_interpolate(std::span<const double> window, const int factor)
{
        if (factor < 1)
        {
                detail::throw_argument("interpolation factor must be >= 1");
        }
        if (window.empty())
        {
                detail::throw_argument("interpolation window is empty");
        }
        const std::size_t n = window.size();
        if (factor == 1)
        {
                return {window.begin(), window.end()};
        }
        const auto f = static_cast<std::size_t>(factor);
        const std::size_t m = n * f;
        const double two_pi = 2 * std::numbers::pi;

        // forward DFT with exact integer angle reduction
        const std::size_t bins = n / 2 + 1;
        std::vector<std::complex<double>> spec(bins);
        for (std::size_t k = 0; k < bins; ++k)
        {
                std::complex<double> acc{};
                for (std::size_t i = 0; i < n; ++i)
                {
                        const double a = two_pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
                        acc += window[i] * std::polar(1.0, -a);
                }
                spec[k] = acc;
        }
        const bool even = n % 2 == 0;
        const std::size_t last = even ? n / 2 - 1 : (n - 1) / 2;

        std::vector<double> dense(m);
        for (std::size_t j = 0; j < m; ++j)
        {
                double acc = spec[0].real();
                for (std::size_t k = 1; k <= last; ++k)
                {
                        const double a = two_pi * static_cast<double>((k * j) % m) / static_cast<double>(m);
                        acc += 2 * (spec[k].real() * std::cos(a) - spec[k].imag() * std::sin(a));
                }
                if (even)
                {
                        const std::size_t k = n / 2;
                        const double a = two_pi * static_cast<double>((k * j) % m) / static_cast<double>(m);
                        acc += spec[k].real() * std::cos(a);
                }
                dense[j] = acc / static_cast<double>(n);
        }
        for (std::size_t i = 0; i < n; ++i)
        {
                dense[i * f] = window[i];  // identical up to rounding; pin exactly
        }
        return dense;
}

/// Position, in original sample units, of the first rising threshold
/// crossing in a dense window that starts at window_start. The crossing is
/// the first pair a < threshold <= b; ties resolve to the sample that
/// reaches the threshold.
inline double refine_edge(std::span<const double> dense, const double threshold, const int factor,
                          const double window_start)
{
        if (factor < 1)
        {
                detail::throw_argument("interpolation factor must be >= 1");
        }
        for (std::size_t i = 1; i < dense.size(); ++i)
        {
                const double a = dense[i - 1];
                const double b = dense[i];
                if (a < threshold && threshold <= b)
                {
                        const double pos = static_cast<double>(i - 1) + (threshold - a) / (b - a);
                        return window_start + pos / factor;
                }
        }
        detail::throw_numeric("no threshold crossing inside the refinement window");
}

/// Full edge estimator over one channel: coarse Schmitt detection on
/// globally normalised samples, then per event a window normalised by the
/// medians of its leading and trailing parts, spectrally interpolated and
/// searched for the threshold crossing.
inline EdgeEventSeries detect_edges(std::span<const double> x, const double sample_rate_hz, const TriggerSpec& spec,
                                    const double start_time_s = 0, const std::size_t channel = 0)
{
        spec.validate();
        if (!(sample_rate_hz > 0))
        {
                detail::throw_argument("sample rate must be positive");
        }
        EdgeEventSeries res;
        res.sample_rate_hz = sample_rate_hz;
        res.channel = channel;
        if (x.empty())
        {
                return res;
        }
        const SignalLevels global = estimate_levels(x);
        if (!(global.high > global.low))
        {
                return res;
        }
        const CoarseEdges coarse = schmitt_detect(x, spec, global);

        const auto wb = static_cast<std::int64_t>(spec.window_before);
        const auto wa = static_cast<std::int64_t>(spec.window_after);
        const auto len = static_cast<std::int64_t>(x.size());
        const double threshold = spec.refine_threshold();
        std::vector<double> seg(static_cast<std::size_t>(wb + wa));
        for (const std::int64_t c : coarse.indices)
        {
                if (c - wb < 0 || c + wa > len)
                {
                        ++res.dropped;
                        continue;
                }
                std::copy_n(x.begin() + (c - wb), seg.size(), seg.begin());
                if (spec.polarity == Polarity::falling)
                {
                        for (double& v : seg)
                        {
                                v = -v;
                        }
                }
                SignalLevels local;
                local.low = detail::median(std::span<const double>(seg).first(static_cast<std::size_t>(wb)));
                local.high = detail::median(std::span<const double>(seg).last(static_cast<std::size_t>(wa)));
                if (!(local.high > local.low))
                {
                        ++res.dropped;
                        continue;
                }
                std::vector<double> dense = spectral_interpolate(seg, spec.interp_factor);
                for (double& v : dense)
                {
                        v = local.normalise(v);
                }
                double frac = 0;
                try
                {
                        frac = refine_edge(dense, threshold, spec.interp_factor, static_cast<double>(c - wb));
                }
                catch (const numeric_error&)
                {
                        ++res.dropped;
                        continue;
                }
                if (!res.events.empty() && !(frac > res.events.back().fractional_index))
                {
                        ++res.dropped;
                        continue;
                }
                res.events.push_back({c, frac, start_time_s + frac / sample_rate_hz});
        }
        return res;
}

inline EdgeEventSeries detect_edges(const RealSampleStream& stream, const std::size_t channel, const TriggerSpec& spec)
{
        const std::vector<double> x = stream.channel(channel);
        return detect_edges(x, stream.sample_rate_hz, spec, stream.start_time_s, channel);
}
}
