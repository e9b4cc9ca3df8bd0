#pragma once

#include "error.hpp"
#include "fir_design.hpp"
#include "stream.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
struct DecimatorSpec
{
        std::vector<FirStage> stages;
        int total_decimation = 1;
        double stopband_atten_db = 120;

        void validate() const
        {
                if (stages.empty())
                {
                        detail::throw_argument("decimator needs at least one stage");
                }
                long long product = 1;
                for (const FirStage& s : stages)
                {
                        s.validate();
                        product *= s.decimation;
                }
                if (product != total_decimation)
                {
                        detail::throw_argument(
                                "total decimation " + std::to_string(total_decimation)
                                + " differs from the product of stage factors " + std::to_string(product));
                }
        }
};

/// Multistage decimator for the given factors. Every stage but the last is
/// flat up to the final output Nyquist frequency and suppresses everything
/// that would alias onto it; the last stage has its -3 dB point at
/// cutoff_fraction of the output Nyquist and is atten_db down from the
/// output Nyquist on.
inline DecimatorSpec design_decimator(const std::vector<int>& factors, const double atten_db = 120,
                                      const double cutoff_fraction = 0.8)
{
        if (factors.empty())
        {
                detail::throw_argument("no decimation factors given");
        }
        if (!(cutoff_fraction > 0 && cutoff_fraction < 1))
        {
                detail::throw_argument("cutoff fraction must lie in (0, 1)");
        }
        long long total = 1;
        for (const int f : factors)
        {
                if (f < 1)
                {
                        detail::throw_argument("decimation factors must be >= 1");
                }
                total *= f;
        }

        DecimatorSpec spec;
        spec.total_decimation = static_cast<int>(total);
        spec.stopband_atten_db = atten_db;

        // cumulative decimation at the input of each stage
        long long before = 1;
        for (std::size_t i = 0; i < factors.size(); ++i)
        {
                const int f = factors[i];
                // output Nyquist of the whole chain, as a fraction of this
                // stage's input Nyquist
                const double final_nyquist = static_cast<double>(before) / static_cast<double>(total);
                FirStage stage;
                if (i + 1 == factors.size())
                {
                        stage = design_fir_lowpass(cutoff_fraction * final_nyquist, atten_db,
                                                   (1 - cutoff_fraction) * final_nyquist);
                }
                else
                {
                        const double stage_out = 2.0 / f; // output sample rate, Nyquist units
                        stage.taps = design_kaiser_lowpass(final_nyquist, stage_out - final_nyquist, atten_db);
                }
                stage.decimation = f;
                spec.stages.push_back(std::move(stage));
                before *= f;
        }
        return spec;
}

/// Splits n into factors of at most max_factor, largest first.
inline std::vector<int> factor_decimation(int n, const int max_factor = 10)
{
        if (n < 1)
        {
                detail::throw_argument("decimation must be >= 1");
        }
        std::vector<int> res;
        while (n > 1)
        {
                int f = std::min(n, max_factor);
                while (f > 1 && n % f != 0)
                {
                        --f;
                }
                if (f == 1)
                {
                        detail::throw_numeric(
                                "decimation " + std::to_string(n) + " has a prime factor above " + std::to_string(max_factor));
                }
                res.push_back(f);
                n /= f;
        }
        if (res.empty())
        {
                res.push_back(1);
        }
        return res;
}

/// Magnitude of the chain's response to a tone at f cycles/sample of the
/// input rate, following the tone through every stage's aliasing.
inline double chain_tone_gain(const DecimatorSpec& spec, const double f)
{
        double gain = 1;
        long long cumulative = 1;
        for (const FirStage& s : spec.stages)
        {
                double local = f * static_cast<double>(cumulative);
                local -= std::round(local);
                gain *= std::abs(amplitude_response(s.taps, 2 * local));
                cumulative *= s.decimation;
        }
        return gain;
}

/// Input samples needed before the first fully supported output.
inline std::size_t warmup_samples(const DecimatorSpec& spec)
{
        std::size_t total = 1;
        std::size_t cumulative = 1;
        for (const FirStage& s : spec.stages)
        {
                total += (s.taps.size() - 1) * cumulative;
                cumulative *= static_cast<std::size_t>(s.decimation);
        }
        return total;
}

/// Streaming decimating FIR. Only outputs whose whole support lies inside
/// the received input are produced; output k is centred on input sample
/// (taps - 1) / 2 + k * decimation.
template <typename T>
class FirDecimator
{
public:
        explicit FirDecimator(FirStage stage) : stage_(std::move(stage))
        {
                stage_.validate();
                next_ = stage_.taps.size() - 1;
        }

        void push(std::span<const T> in, std::vector<T>& out)
        {
                buffer_.insert(buffer_.end(), in.begin(), in.end());
                const std::size_t n = stage_.taps.size();
                const double* h = stage_.taps.data();
                const auto step = static_cast<std::size_t>(stage_.decimation);
                while (next_ < buffer_.size())
                {
                        const T* x = buffer_.data() + (next_ + 1 - n);
                        T acc{};
                        for (std::size_t k = 0; k < n; ++k)
                        {
                                acc += h[k] * x[k];
                        }
                        out.push_back(acc);
                        next_ += step;
                }
                const std::size_t keep_from = next_ + 1 - n;
                if (keep_from > 0)
                {
                        const std::size_t drop = std::min(keep_from, buffer_.size());
                        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(drop));
                        next_ -= drop;
                }
        }

        [[nodiscard]] double delay_samples() const
        {
                return static_cast<double>(stage_.taps.size() - 1) / 2;
        }

        [[nodiscard]] const FirStage& stage() const
        {
                return stage_;
        }

private:
        FirStage stage_;
        std::vector<T> buffer_;
        std::size_t next_ = 0;
};

/// Streaming multistage decimator.
template <typename T>
class DecimationChain
{
public:
        explicit DecimationChain(const DecimatorSpec& spec)
        {
                spec.validate();
                double cumulative = 1;
                for (const FirStage& s : spec.stages)
                {
                        delay_input_samples_ += cumulative * static_cast<double>(s.taps.size() - 1) / 2;
                        cumulative *= s.decimation;
                        stages_.emplace_back(s);
                }
                total_ = spec.total_decimation;
                scratch_.resize(stages_.size());
        }

        void push(std::span<const T> in, std::vector<T>& out)
        {
                std::span<const T> current = in;
                for (std::size_t i = 0; i < stages_.size(); ++i)
                {
                        std::vector<T>& dst = i + 1 == stages_.size() ? out : scratch_[i];
                        if (&dst != &out)
                        {
                                dst.clear();
                        }
                        stages_[i].push(current, dst);
                        current = std::span<const T>(dst);
                }
        }

        /// Offset, in input samples, of the first output's centre.
        [[nodiscard]] double delay_input_samples() const
        {
                return delay_input_samples_;
        }

        [[nodiscard]] int total_decimation() const
        {
                return total_;
        }

private:
        std::vector<FirDecimator<T>> stages_;
        std::vector<std::vector<T>> scratch_;
        double delay_input_samples_ = 0;
        int total_ = 1;
};

/// Batch decimation of a complex series.
inline ComplexBaseband fir_decimate(const ComplexBaseband& in, const DecimatorSpec& spec)
{
        spec.validate();
        const std::size_t warmup = warmup_samples(spec);
        if (in.iq.size() < warmup)
        {
                detail::throw_data(
                        "input of " + std::to_string(in.iq.size()) + " samples is shorter than the decimator warm-up of "
                        + std::to_string(warmup));
        }
        DecimationChain<std::complex<double>> chain(spec);
        ComplexBaseband out;
        chain.push(in.iq, out.iq);
        out.sample_rate_hz = in.sample_rate_hz / spec.total_decimation;
        out.start_time_s = in.start_time_s + chain.delay_input_samples() / in.sample_rate_hz;
        out.origin = in.origin;
        return out;
}

inline ComplexBaseband fir_decimate(std::span<const std::complex<double>> iq, const double sample_rate_hz,
                                    const DecimatorSpec& spec)
{
        ComplexBaseband in;
        in.sample_rate_hz = sample_rate_hz;
        in.iq.assign(iq.begin(), iq.end());
        return fir_decimate(in, spec);
}
}
