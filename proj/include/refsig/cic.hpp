#pragma once

// CIC decimator with a two-stage half-band back end, emulating the
// fixed-point DDC found in SDR FPGAs.
//
// Fixed-point mode: inputs are rounded to word_bits-bit codes, integrators
// and combs run in accumulator_bits-wide two's-complement registers (whose
// modular wrap-around is exact as long as word_bits + N*log2(R*M) fits),
// the CIC result is truncated back to a word, each half-band rounds its
// output to a word and the final sample is rounded to output_bits, the
// width of the sample transport format.
//
// Float mode evaluates the same response as a cascade of moving sums.

#include "decimator.hpp"
#include "error.hpp"
#include "fir_design.hpp"
#include "stream.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace refsig
{
struct CicSpec
{
        int decimation = 4;  // R, CIC rate change
        int stages = 4;      // N
        int differential_delay = 1;  // M
        int word_bits = 24;
        int accumulator_bits = 64;
        int output_bits = 16;  // 0 keeps the word width
        int halfband_stages = 2;  // each decimates by 2
        double halfband_atten_db = 80;
        bool fixed_point = true;
        bool allow_scaling = true;

        void validate() const
        {
                if (decimation < 1 || stages < 1)
                {
                        detail::throw_argument("CIC needs R >= 1 and N >= 1");
                }
                if (differential_delay != 1 && differential_delay != 2)
                {
                        detail::throw_argument("CIC differential delay must be 1 or 2");
                }
                if (word_bits < 2 || word_bits > 32 || accumulator_bits < word_bits || accumulator_bits > 64)
                {
                        detail::throw_argument("CIC word/accumulator widths out of range");
                }
                if (output_bits < 0 || output_bits > 32 || halfband_stages < 0)
                {
                        detail::throw_argument("CIC output width or half-band count out of range");
                }
        }

        [[nodiscard]] int total_decimation() const
        {
                return decimation * (1 << halfband_stages);
        }

        /// Register growth N * log2(R * M), rounded up.
        [[nodiscard]] int bit_growth() const
        {
                return static_cast<int>(
                        std::ceil(stages * std::log2(static_cast<double>(decimation) * differential_delay) - 1e-12));
        }
};

/// CIC configuration whose overall rate change (CIC times half-bands)
/// equals n_decim.
inline CicSpec cic_spec_for(const int n_decim, const int halfband_stages = 2)
{
        const int hb = 1 << halfband_stages;
        if (n_decim < hb || n_decim % hb != 0)
        {
                detail::throw_argument(
                        "decimation " + std::to_string(n_decim) + " is not a multiple of the half-band factor "
                        + std::to_string(hb));
        }
        CicSpec spec;
        spec.decimation = n_decim / hb;
        spec.halfband_stages = halfband_stages;
        return spec;
}

/// Impulse response of the CIC core: N-fold convolution of a length R*M
/// boxcar, normalised to unit DC gain.
inline std::vector<double> cic_impulse_response(const CicSpec& spec)
{
        const auto len = static_cast<std::size_t>(spec.decimation * spec.differential_delay);
        std::vector<double> h{1.0};
        for (int s = 0; s < spec.stages; ++s)
        {
                std::vector<double> next(h.size() + len - 1, 0.0);
                for (std::size_t i = 0; i < h.size(); ++i)
                {
                        for (std::size_t j = 0; j < len; ++j)
                        {
                                next[i + j] += h[i];
                        }
                }
                h = std::move(next);
        }
        const double gain = std::pow(static_cast<double>(len), spec.stages);
        for (double& v : h)
        {
                v /= gain;
        }
        return h;
}

inline FirStage design_halfband(const double atten_db = 80)
{
        FirStage s{design_kaiser_lowpass(0.4, 0.6, atten_db), 2};
        return s;
}

namespace detail
{
inline double round_to_word(const double v, const int bits)
{
        const double scale = std::ldexp(1.0, bits - 1) - 1;
        return std::clamp(std::round(v * scale), -scale - 1, scale) / scale;
}

inline std::int64_t wrap_register(const std::uint64_t v, const int bits)
{
        if (bits >= 64)
        {
                return static_cast<std::int64_t>(v);
        }
        const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
        std::uint64_t r = v & mask;
        if (r & (std::uint64_t{1} << (bits - 1)))
        {
                r |= ~mask;
        }
        return static_cast<std::int64_t>(r);
}

/// Fixed-point CIC core on one real component; returns the decimated
/// sequence at every R-th input sample (index R-1, 2R-1, ...).
inline std::vector<double> cic_core_fixed(const std::vector<double>& x, const CicSpec& spec, const int shift)
{
        const int acc_bits = spec.accumulator_bits;
        const double in_scale = std::ldexp(1.0, spec.word_bits - 1) - 1;
        const auto R = static_cast<std::size_t>(spec.decimation);
        const auto M = static_cast<std::size_t>(spec.differential_delay);
        const auto N = static_cast<std::size_t>(spec.stages);

        std::vector<std::uint64_t> integ(N, 0);
        std::vector<std::deque<std::uint64_t>> comb(N, std::deque<std::uint64_t>(M, 0));
        std::vector<double> out;
        out.reserve(x.size() / R + 1);

        const double gain = std::pow(static_cast<double>(R * M), static_cast<double>(N));
        for (std::size_t n = 0; n < x.size(); ++n)
        {
                auto code = static_cast<std::int64_t>(std::clamp(std::round(x[n] * in_scale), -in_scale - 1, in_scale));
                code >>= shift;  // arithmetic shift truncates towards -inf like the hardware
                std::uint64_t v = static_cast<std::uint64_t>(code);
                for (std::size_t s = 0; s < N; ++s)
                {
                        integ[s] += v;
                        v = integ[s];
                }
                if ((n + 1) % R != 0)
                {
                        continue;
                }
                for (std::size_t s = 0; s < N; ++s)
                {
                        const std::uint64_t delayed = comb[s].front();
                        comb[s].pop_front();
                        comb[s].push_back(v);
                        v -= delayed;
                }
                const std::int64_t result = wrap_register(v, acc_bits);
                // undo the pre-shift and the register gain, then truncate to a word
                const double value = std::ldexp(static_cast<double>(result), shift) / gain / in_scale;
                const double word = std::ldexp(1.0, spec.word_bits - 1) - 1;
                out.push_back(std::floor(value * word) / word);
        }
        return out;
}

/// Float CIC core as N cascaded moving sums of length R*M.
inline std::vector<double> cic_core_float(const std::vector<double>& x, const CicSpec& spec)
{
        const auto L = static_cast<std::size_t>(spec.decimation * spec.differential_delay);
        const auto R = static_cast<std::size_t>(spec.decimation);
        std::vector<double> y = x;
        for (int s = 0; s < spec.stages; ++s)
        {
                std::vector<double> next(y.size());
                double acc = 0;
                for (std::size_t n = 0; n < y.size(); ++n)
                {
                        acc += y[n];
                        if (n >= L)
                        {
                                acc -= y[n - L];
                        }
                        next[n] = acc;
                }
                y = std::move(next);
        }
        const double gain = std::pow(static_cast<double>(L), spec.stages);
        std::vector<double> out;
        out.reserve(y.size() / R + 1);
        for (std::size_t n = R - 1; n < y.size(); n += R)
        {
                out.push_back(y[n] / gain);
        }
        return out;
}
}

/// Decimates by R with the CIC and by 2 per half-band stage. Outputs whose
/// CIC support reaches before the first input sample are discarded.
inline ComplexBaseband cic_decimate(const ComplexBaseband& in, const CicSpec& spec)
{
        spec.validate();
        int shift = 0;
        if (spec.fixed_point)
        {
                const int need = spec.word_bits + spec.bit_growth();
                if (need > spec.accumulator_bits)
                {
                        if (!spec.allow_scaling)
                        {
                                detail::throw_numeric(
                                        "CIC register overflow: " + std::to_string(need) + " bits needed, "
                                        + std::to_string(spec.accumulator_bits) + " available");
                        }
                        shift = need - spec.accumulator_bits;
                        if (shift >= spec.word_bits - 1)
                        {
                                detail::throw_numeric("CIC growth leaves no input bits after scaling");
                        }
                }
        }

        const auto R = static_cast<std::size_t>(spec.decimation);
        const std::size_t support = static_cast<std::size_t>(spec.stages)
                                            * (R * static_cast<std::size_t>(spec.differential_delay) - 1)
                                    + 1;
        // first decimated index n = jR + R - 1 with n >= support - 1
        std::size_t first = 0;
        while (first * R + R - 1 < support - 1)
        {
                ++first;
        }

        std::vector<double> re(in.iq.size());
        std::vector<double> im(in.iq.size());
        for (std::size_t i = 0; i < in.iq.size(); ++i)
        {
                re[i] = in.iq[i].real();
                im[i] = in.iq[i].imag();
        }
        const std::vector<double> yr = spec.fixed_point ? detail::cic_core_fixed(re, spec, shift)
                                                        : detail::cic_core_float(re, spec);
        const std::vector<double> yi = spec.fixed_point ? detail::cic_core_fixed(im, spec, shift)
                                                        : detail::cic_core_float(im, spec);
        if (yr.size() <= first)
        {
                detail::throw_data("input too short for the CIC warm-up");
        }

        ComplexBaseband out;
        out.origin = in.origin;
        out.sample_rate_hz = in.sample_rate_hz / static_cast<double>(R);
        const double centre = static_cast<double>(first * R + R - 1) - static_cast<double>(support - 1) / 2;
        out.start_time_s = in.start_time_s + centre / in.sample_rate_hz;
        out.iq.reserve(yr.size() - first);
        for (std::size_t j = first; j < yr.size(); ++j)
        {
                out.iq.emplace_back(yr[j], yi[j]);
        }

        const FirStage hb = design_halfband(spec.halfband_atten_db);
        for (int s = 0; s < spec.halfband_stages; ++s)
        {
                FirDecimator<std::complex<double>> dec(hb);
                std::vector<std::complex<double>> next;
                dec.push(out.iq, next);
                if (next.empty())
                {
                        detail::throw_data("input too short for the half-band warm-up");
                }
                out.start_time_s += dec.delay_samples() / out.sample_rate_hz;
                out.sample_rate_hz /= 2;
                if (spec.fixed_point)
                {
                        for (auto& v : next)
                        {
                                v = {detail::round_to_word(v.real(), spec.word_bits),
                                     detail::round_to_word(v.imag(), spec.word_bits)};
                        }
                }
                out.iq = std::move(next);
        }
        if (spec.fixed_point && spec.output_bits > 0)
        {
                for (auto& v : out.iq)
                {
                        v = {detail::round_to_word(v.real(), spec.output_bits),
                             detail::round_to_word(v.imag(), spec.output_bits)};
                }
        }
        return out;
}
}
