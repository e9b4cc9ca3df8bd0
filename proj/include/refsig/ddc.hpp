#pragma once

// Digital down-conversion: NCO mixing followed by multistage decimation.

#include "cic.hpp"
#include "decimator.hpp"
#include "detail/stats.hpp"
#include "error.hpp"
#include "nco.hpp"
#include "sigmodel.hpp"
#include "stream.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace refsig
{
/// Default chain: three stages of 10, 120 dB, -3 dB at 0.8 output Nyquist.
inline DecimatorSpec default_decimator()
{
        return design_decimator({10, 10, 10}, 120, 0.8);
}

/// Streaming down-converter for one real channel.
class SineDdc
{
public:
        SineDdc(const DdcConfig& cfg, const DecimatorSpec& spec, const double start_time_s = 0)
                : mixer_(cfg), chain_(spec)
        {
                out_.sample_rate_hz = cfg.sample_rate_hz / spec.total_decimation;
                out_.start_time_s = start_time_s + chain_.delay_input_samples() / cfg.sample_rate_hz;
        }

        void push(std::span<const double> samples)
        {
                mixed_.resize(samples.size());
                mixer_.mix(samples, mixed_);
                chain_.push(mixed_, out_.iq);
        }

        /// Output so far, with the beat rotation removed when f_t != f_r.
        [[nodiscard]] ComplexBaseband result() const;

        ComplexBaseband& raw()
        {
                return out_;
        }

private:
        NcoMixer mixer_;
        DecimationChain<std::complex<double>> chain_;
        std::vector<std::complex<double>> mixed_;
        ComplexBaseband out_;
};

/// Removes the residual rotation exp(-j*2*pi*f_b*t), f_b = f_t - f_r, left
/// when the NCO is not exactly at the carrier. The beat is referenced to
/// t = 0 on the input time axis.
inline void derotate_beat(ComplexBaseband& z, const double beat_freq_hz)
{
        if (beat_freq_hz == 0)
        {
                return;
        }
        for (std::size_t k = 0; k < z.iq.size(); ++k)
        {
                const double cycles = std::fmod(beat_freq_hz * z.time_of(k), 1.0);
                z.iq[k] *= std::polar(1.0, 2 * std::numbers::pi * cycles);
        }
}

inline ComplexBaseband SineDdc::result() const
{
        ComplexBaseband z = out_;
        derotate_beat(z, mixer_.config().beat_freq_hz);
        return z;
}

/// Mixes and decimates one channel of a stream.
inline ComplexBaseband ddc_channel(const RealSampleStream& stream, const std::size_t channel, DdcConfig cfg,
                                   const DecimatorSpec& spec)
{
        cfg.sample_rate_hz = stream.sample_rate_hz;
        const std::vector<double> x = stream.channel(channel);
        if (x.size() < warmup_samples(spec))
        {
                detail::throw_data(
                        "channel has " + std::to_string(x.size()) + " samples, decimator warm-up needs "
                        + std::to_string(warmup_samples(spec)));
        }
        SineDdc ddc(cfg, spec, stream.start_time_s);
        ddc.push(x);
        ComplexBaseband z = ddc.result();
        z.origin = "channel " + std::to_string(channel);
        return z;
}

/// Reported when the residual has zero variance.
inline constexpr double saturated_snr_db = 400.0;

/// SNR of zA / zB: |mean|^2 over variance, in dB.
inline double snr_of_residual(const ComplexBaseband& a, const ComplexBaseband& b)
{
        if (a.iq.size() != b.iq.size() || a.iq.empty())
        {
                detail::throw_data("residual SNR needs two non-empty series of equal length");
        }
        if (std::abs(a.sample_rate_hz - b.sample_rate_hz) > 1e-9 * std::max(a.sample_rate_hz, b.sample_rate_hz))
        {
                detail::throw_data("residual SNR needs equal sample rates");
        }
        std::vector<double> mags(b.iq.size());
        for (std::size_t i = 0; i < mags.size(); ++i)
        {
                mags[i] = std::abs(b.iq[i]);
        }
        const double floor = 1e-12 * detail::median(mags);
        std::vector<std::complex<double>> r(a.iq.size());
        std::complex<double> mean{};
        for (std::size_t i = 0; i < r.size(); ++i)
        {
                if (!(mags[i] > floor))
                {
                        detail::throw_numeric("divisor magnitude vanishes at sample " + std::to_string(i));
                }
                r[i] = a.iq[i] == b.iq[i] ? std::complex<double>(1, 0) : a.iq[i] / b.iq[i];
                mean += r[i];
        }
        mean /= static_cast<double>(r.size());
        double var = 0;
        for (const auto& v : r)
        {
                var += std::norm(v - mean);
        }
        var /= static_cast<double>(r.size());
        if (var == 0)
        {
                return saturated_snr_db;
        }
        return std::min(saturated_snr_db, 10 * std::log10(std::norm(mean) / var));
}

//
// CIC versus FIR comparison on split noisy signals
//

struct CicFirOptions
{
        double sample_rate_hz = 25e6;
        double carrier_hz = 10e6;
        double amplitude = 0.5;
        double snr_db = 60;
        int adc_bits = 14;
        std::size_t output_samples = 4000;
        std::uint64_t seed = 7;
};

struct CicFirRow
{
        int n_decim = 0;
        double snr_cic_db = 0;
        double snr_fir_db = 0;

        [[nodiscard]] double delta_db() const
        {
                return snr_fir_db - snr_cic_db;
        }
};

/// For every decimation factor, synthesises two splits of one carrier with
/// independent noise, digitises them, and measures the residual SNR after
/// the FIR chain and after the CIC emulation.
inline std::vector<CicFirRow> compare_cic_fir(const std::vector<int>& decims, const CicFirOptions& opt = {})
{
        std::vector<CicFirRow> rows;
        for (const int n : decims)
        {
                const DecimatorSpec fir = design_decimator(factor_decimation(n), 120, 0.8);
                const CicSpec cic = cic_spec_for(n);
                const std::size_t length = static_cast<std::size_t>(n) * opt.output_samples + warmup_samples(fir);

                const auto split = [&](const std::uint64_t seed)
                {
                        SineModel m;
                        m.carrier_freq_hz = opt.carrier_hz;
                        m.amplitude = opt.amplitude;
                        m.phase_error = ConstantPhase{0.3};
                        m.noise_snr_db = opt.snr_db;
                        m.seed = seed;
                        RealSampleStream s = synth_sine(m, opt.sample_rate_hz,
                                                        static_cast<double>(length) / opt.sample_rate_hz);
                        s = quantize(s, AdcSpec{opt.adc_bits, 1.0}).stream;
                        const double code_scale = std::ldexp(1.0, opt.adc_bits - 1) - 1;
                        for (double& v : s.samples)
                        {
                                v /= code_scale;
                        }
                        DdcConfig cfg;
                        cfg.nco_freq_hz = opt.carrier_hz;
                        cfg.sample_rate_hz = opt.sample_rate_hz;
                        ComplexBaseband mixed;
                        mixed.sample_rate_hz = opt.sample_rate_hz;
                        mixed.iq = nco_mix(s.samples, cfg);
                        return mixed;
                };
                const std::uint64_t base = opt.seed + 1000 * static_cast<std::uint64_t>(n);
                const ComplexBaseband a = split(base);
                const ComplexBaseband b = split(base + 1);

                CicFirRow row;
                row.n_decim = n;
                row.snr_fir_db = snr_of_residual(fir_decimate(a, fir), fir_decimate(b, fir));
                row.snr_cic_db = snr_of_residual(cic_decimate(a, cic), cic_decimate(b, cic));
                rows.push_back(row);
        }
        return rows;
}
}
