#include "oracles.hpp"

#include "refsig/ddc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace refsig;
using cd = std::complex<double>;

namespace
{
constexpr double pi = std::numbers::pi;

ComplexBaseband tone(const double f_cycles, const std::size_t n, const double amp = 1)
{
        ComplexBaseband z;
        z.sample_rate_hz = 25e6;
        z.iq.resize(n);
        for (std::size_t k = 0; k < n; ++k)
        {
                z.iq[k] = std::polar(amp, 2 * pi * detail::cycles_fraction(static_cast<std::int64_t>(k), f_cycles));
        }
        return z;
}

double mean_power(const std::vector<cd>& v, const std::size_t skip = 0)
{
        double p = 0;
        for (std::size_t i = skip; i < v.size(); ++i)
        {
                p += std::norm(v[i]);
        }
        return p / static_cast<double>(v.size() - skip);
}
}

TEST(Nco, PhaseAtSampleFive)
{
        DdcConfig cfg;
        cfg.sample_rate_hz = 100e6;
        NcoMixer m(cfg);
        EXPECT_NEAR(std::abs(m.phase(5)), pi, 1e-12);
        EXPECT_NEAR(std::abs(m.oscillator(5) - cd(-1, 0)), 0, 1e-15);
}

TEST(Nco, ZerosStayZero)
{
        const std::vector<double> x(1000, 0.0);
        for (const cd v : nco_mix(x, DdcConfig{}))
        {
                EXPECT_EQ(v, cd(0, 0));
        }
}

TEST(Nco, MatchedSineMixesToMinusJHalf)
{
        DdcConfig cfg;
        std::vector<double> x(5000);
        for (std::size_t n = 0; n < x.size(); ++n)
        {
                x[n] = std::sin(2 * pi * 0.4 * static_cast<double>(n));
        }
        const std::vector<cd> y = nco_mix(x, cfg);
        cd mean{};
        for (const cd v : y)
        {
                mean += v;
        }
        mean /= static_cast<double>(y.size());
        EXPECT_NEAR(mean.real(), 0, 1e-12);
        EXPECT_NEAR(mean.imag(), -0.5, 1e-12);
}

TEST(Nco, PhaseStaysWrappedForLongRuns)
{
        DdcConfig cfg;
        cfg.nco_freq_hz = 10.000123e6;
        NcoMixer m(cfg);
        for (const std::int64_t n : {0LL, 1LL, 2'500'000'000LL, 1'000'000'000'000LL})
        {
                const double p = m.phase(n);
                EXPECT_GT(p, -pi);
                EXPECT_LE(p, pi);
        }
        // exact fractional part of n * ratio with the ratio taken as the stored double
        const double ratio = 10.000123e6 / 25e6;
        int e = 0;
        const double mant = std::frexp(ratio, &e);
        const auto m53 = static_cast<__int128>(std::ldexp(mant, 53));
        const int frac_bits = 53 - e;
        const std::int64_t n = 2'500'000'003LL;
        const __int128 prod = m53 * n;
        const __int128 mask = (static_cast<__int128>(1) << frac_bits) - 1;
        const double frac = std::ldexp(static_cast<double>(prod & mask), -frac_bits);
        EXPECT_NEAR(m.phase(n), std::remainder(2 * pi * frac, 2 * pi), 1e-12);
}

TEST(Nco, RejectsFrequencyAboveNyquist)
{
        DdcConfig cfg;
        cfg.nco_freq_hz = 13e6;
        EXPECT_THROW(NcoMixer{cfg}, std::invalid_argument);
}

TEST(FirDesign, KaiserBeta)
{
        EXPECT_NEAR(kaiser_beta(120), 0.1102 * (120 - 8.7), 1e-12);
        EXPECT_NEAR(kaiser_beta(120), 12.26526, 1e-5);
}

TEST(FirDesign, MeetsStopbandAtNyquist)
{
        const FirStage s = design_fir_lowpass(0.8, 120, 0.2);
        EXPECT_LE(magnitude_db(s.taps, 1.0), -120);
        EXPECT_NEAR(amplitude_response(s.taps, 0), 1, 1e-12);
        EXPECT_NEAR(amplitude_response(s.taps, 0.8), std::numbers::sqrt2 / 2, 1e-6);
}

TEST(FirDesign, StopbandVerifiedByIndependentDtft)
{
        const FirStage s = design_fir_lowpass(0.3, 120, 0.1);
        const double bound = std::pow(10.0, -120.0 / 20);
        double worst = 0;
        for (double f = 0.4; f <= 1.0; f += 1e-5)
        {
                worst = std::max(worst, oracle::dtft_mag(s.taps, f / 2));
        }
        EXPECT_LE(worst, bound * 1.0000001);
        EXPECT_NEAR(oracle::dtft_mag(s.taps, 0), 1, 1e-12);
}

TEST(FirDesign, TapsExactlySymmetric)
{
        for (const double atten : {40.0, 80.0, 120.0, 160.0})
        {
                const FirStage s = design_fir_lowpass(0.2, atten, 0.1);
                const std::size_t n = s.taps.size();
                EXPECT_EQ(n % 2, 1u);
                for (std::size_t k = 0; k < n; ++k)
                {
                        ASSERT_EQ(s.taps[k], s.taps[n - 1 - k]);
                }
                EXPECT_NO_THROW(s.validate());
        }
}

TEST(FirDesign, InfeasibleReportsLength)
{
        try
        {
                design_fir_lowpass(0.5, 120, 1e-4, 1001);
                FAIL() << "expected numeric_error";
        }
        catch (const numeric_error& e)
        {
                EXPECT_NE(std::string(e.what()).find("needs at least"), std::string::npos);
        }
}

TEST(FirDesign, RejectsBadArguments)
{
        EXPECT_THROW(design_fir_lowpass(0, 120, 0.1), std::invalid_argument);
        EXPECT_THROW(design_fir_lowpass(0.5, 30, 0.1), std::invalid_argument);
        EXPECT_THROW(design_fir_lowpass(0.5, 170, 0.1), std::invalid_argument);
        EXPECT_THROW(design_fir_lowpass(0.9, 120, 0.2), std::invalid_argument);
}

TEST(FirStageValidate, RejectsAsymmetryAndGain)
{
        EXPECT_THROW((FirStage{{0.5, 0.6}, 1}.validate()), std::invalid_argument);
        EXPECT_THROW((FirStage{{0.5, 0.4, 0.5}, 1}.validate()), std::invalid_argument);
        EXPECT_THROW((FirStage{{1.0}, 0}.validate()), std::invalid_argument);
}

TEST(Decimator, DefaultChain)
{
        const DecimatorSpec spec = default_decimator();
        EXPECT_EQ(spec.total_decimation, 1000);
        ASSERT_EQ(spec.stages.size(), 3u);
        EXPECT_NEAR(20 * std::log10(chain_tone_gain(spec, 10e3 / 25e6)), -3.0103, 0.01);
        EXPECT_GT(chain_tone_gain(spec, 8e3 / 25e6), 0.99);
}

TEST(Decimator, ConstantInConstantOut)
{
        const DecimatorSpec spec = default_decimator();
        ComplexBaseband z;
        z.sample_rate_hz = 25e6;
        z.iq.assign(200'000, cd(0.3, -0.7));
        const ComplexBaseband y = fir_decimate(z, spec);
        EXPECT_DOUBLE_EQ(y.sample_rate_hz, 25e3);
        ASSERT_GT(y.iq.size(), 100u);
        for (const cd v : y.iq)
        {
                EXPECT_NEAR(std::abs(v - cd(0.3, -0.7)), 0, 1e-12);
        }
}

TEST(Decimator, ShortInputRejected)
{
        const DecimatorSpec spec = default_decimator();
        ComplexBaseband z;
        z.sample_rate_hz = 25e6;
        z.iq.assign(warmup_samples(spec) - 1, cd(1, 0));
        EXPECT_THROW(fir_decimate(z, spec), data_error);
        z.iq.push_back(cd(1, 0));
        EXPECT_EQ(fir_decimate(z, spec).iq.size(), 1u);
}

TEST(Decimator, ThreeDbBandwidthMeasured)
{
        const DecimatorSpec spec = default_decimator();
        const ComplexBaseband y = fir_decimate(tone(10e3 / 25e6, 400'000), spec);
        EXPECT_NEAR(10 * std::log10(mean_power(y.iq)), -3.01, 0.02);
}

TEST(Decimator, AliasedToneSuppressed)
{
        const DecimatorSpec spec = default_decimator();
        const double f_out = 25e3;
        // 0.9 of the output Nyquist inside the first alias band
        const ComplexBaseband y = fir_decimate(tone((f_out + 0.9 * f_out / 2) / 25e6, 400'000), spec);
        EXPECT_LE(10 * std::log10(mean_power(y.iq)), -120);
}

TEST(Decimator, Linear)
{
        const DecimatorSpec spec = design_decimator({10, 10});
        std::mt19937_64 rng(3);
        std::normal_distribution<double> n;
        ComplexBaseband x;
        ComplexBaseband y;
        ComplexBaseband s;
        x.sample_rate_hz = y.sample_rate_hz = s.sample_rate_hz = 1;
        const cd a(0.7, -1.3);
        const cd b(-2.1, 0.4);
        for (int i = 0; i < 20000; ++i)
        {
                x.iq.emplace_back(n(rng), n(rng));
                y.iq.emplace_back(n(rng), n(rng));
                s.iq.push_back(a * x.iq.back() + b * y.iq.back());
        }
        const auto ox = fir_decimate(x, spec).iq;
        const auto oy = fir_decimate(y, spec).iq;
        const auto os = fir_decimate(s, spec).iq;
        for (std::size_t i = 0; i < os.size(); ++i)
        {
                const cd expect = a * ox[i] + b * oy[i];
                EXPECT_LE(std::abs(os[i] - expect), 1e-9 * std::max(1.0, std::abs(expect)));
        }
}

TEST(Decimator, PreservesSlowPhaseRamp)
{
        const DecimatorSpec spec = default_decimator();
        const double eps = 2 * pi * 50.0 / 25e6;
        const ComplexBaseband y = fir_decimate(tone(50.0 / 25e6, 300'000), spec);
        const double delay = (y.start_time_s - 0) * 25e6;
        for (std::size_t k = 0; k < y.iq.size(); ++k)
        {
                const double expected = eps * (delay + 1000.0 * static_cast<double>(k));
                EXPECT_LE(std::abs(std::arg(y.iq[k] * std::polar(1.0, -expected))), 1e-6);
        }
}

TEST(Decimator, StreamingEqualsBatch)
{
        const DecimatorSpec spec = design_decimator({5, 4});
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n;
        ComplexBaseband x;
        x.sample_rate_hz = 1;
        for (int i = 0; i < 5000; ++i)
        {
                x.iq.emplace_back(n(rng), n(rng));
        }
        const auto batch = fir_decimate(x, spec).iq;
        DecimationChain<cd> chain(spec);
        std::vector<cd> out;
        std::size_t pos = 0;
        for (const std::size_t chunk : {1u, 7u, 333u, 1000u, 3659u})
        {
                chain.push(std::span<const cd>(x.iq).subspan(pos, chunk), out);
                pos += chunk;
        }
        ASSERT_EQ(out.size(), batch.size());
        for (std::size_t i = 0; i < out.size(); ++i)
        {
                EXPECT_EQ(out[i], batch[i]);
        }
}

TEST(Decimator, FactorMismatchRejected)
{
        DecimatorSpec spec = default_decimator();
        spec.total_decimation = 999;
        EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Decimator, FactorDecimation)
{
        EXPECT_EQ(factor_decimation(1000), (std::vector<int>{10, 10, 10}));
        EXPECT_EQ(factor_decimation(500), (std::vector<int>{10, 10, 5}));
        EXPECT_EQ(factor_decimation(20), (std::vector<int>{10, 2}));
        EXPECT_THROW(factor_decimation(13), numeric_error);
}

TEST(Cic, ConstantPassesFixedPoint)
{
        ComplexBaseband z;
        z.sample_rate_hz = 25e6;
        z.iq.assign(20000, cd(0.25, -0.5));
        const ComplexBaseband y = cic_decimate(z, cic_spec_for(100));
        EXPECT_DOUBLE_EQ(y.sample_rate_hz, 250e3);
        ASSERT_GT(y.iq.size(), 50u);
        for (std::size_t i = 40; i < y.iq.size(); ++i)
        {
                EXPECT_NEAR(std::abs(y.iq[i] - cd(0.25, -0.5)), 0, 1.0 / 32767 * 2);
        }
}

TEST(Cic, UnitSpecIsIdentity)
{
        CicSpec spec;
        spec.decimation = 1;
        spec.stages = 1;
        spec.halfband_stages = 0;
        spec.output_bits = 0;
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-0.9, 0.9);
        ComplexBaseband z;
        z.sample_rate_hz = 1;
        for (int i = 0; i < 1000; ++i)
        {
                z.iq.emplace_back(u(rng), u(rng));
        }
        const ComplexBaseband y = cic_decimate(z, spec);
        ASSERT_EQ(y.iq.size(), z.iq.size());
        const double lsb = 1.0 / (std::ldexp(1.0, 23) - 1);
        for (std::size_t i = 0; i < y.iq.size(); ++i)
        {
                EXPECT_LE(std::abs(y.iq[i] - z.iq[i]), 2 * lsb);
        }
}

TEST(Cic, FloatModeEqualsConvolution)
{
        CicSpec spec;
        spec.decimation = 7;
        spec.stages = 4;
        spec.differential_delay = 2;
        spec.halfband_stages = 0;
        spec.fixed_point = false;
        std::mt19937_64 rng(6);
        std::normal_distribution<double> n;
        ComplexBaseband z;
        z.sample_rate_hz = 7;
        std::vector<double> re;
        for (int i = 0; i < 3000; ++i)
        {
                re.push_back(n(rng));
                z.iq.emplace_back(re.back(), 0);
        }
        const std::vector<double> h = cic_impulse_response(spec);
        const std::vector<double> full = oracle::convolve(re, h);
        const ComplexBaseband y = cic_decimate(z, spec);
        // first output sits where the impulse response is fully inside the input
        const std::size_t first = h.size() - 1;
        std::size_t idx = first;
        while ((idx + 1) % 7 != 0)
        {
                ++idx;
        }
        for (std::size_t j = 0; j < y.iq.size(); ++j)
        {
                ASSERT_NEAR(y.iq[j].real(), full[idx + 7 * j], 1e-9);
        }
        EXPECT_NEAR(y.start_time_s, (static_cast<double>(idx) - (h.size() - 1) / 2.0) / 7, 1e-12);
}

TEST(Cic, OverflowWithoutScalingRejected)
{
        CicSpec spec = cic_spec_for(400);
        spec.accumulator_bits = 40;
        spec.allow_scaling = false;
        ComplexBaseband z;
        z.sample_rate_hz = 1;
        z.iq.assign(100000, cd(0.1, 0));
        EXPECT_THROW(cic_decimate(z, spec), numeric_error);
        spec.allow_scaling = true;
        const ComplexBaseband y = cic_decimate(z, spec);
        ASSERT_FALSE(y.iq.empty());
        EXPECT_NEAR(y.iq.back().real(), 0.1, 1e-3);
        spec.accumulator_bits = 24;
        spec.decimation = 1000;
        EXPECT_THROW(cic_decimate(z, spec), numeric_error);
}

TEST(Cic, BitGrowth)
{
        CicSpec s;
        s.decimation = 125;
        EXPECT_EQ(s.bit_growth(), 28);
        s.decimation = 4;
        EXPECT_EQ(s.bit_growth(), 8);
        EXPECT_THROW(cic_spec_for(30), std::invalid_argument);
}

TEST(Cic, RejectsBadSpec)
{
        CicSpec s;
        s.differential_delay = 3;
        EXPECT_THROW(s.validate(), std::invalid_argument);
        s = CicSpec{};
        s.stages = 0;
        EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Snr, IdenticalSignalsSaturate)
{
        const ComplexBaseband z = tone(0.01, 1000);
        EXPECT_EQ(snr_of_residual(z, z), saturated_snr_db);
}

TEST(Snr, VariancesAddUnderDivision)
{
        std::mt19937_64 rng(11);
        std::normal_distribution<double> n;
        const cd c = std::polar(0.8, 0.3);
        const double sigma = std::abs(c) * std::pow(10.0, -60.0 / 20) / std::numbers::sqrt2;  // per component
        ComplexBaseband a;
        ComplexBaseband b;
        a.sample_rate_hz = b.sample_rate_hz = 1;
        for (int i = 0; i < 200000; ++i)
        {
                a.iq.push_back(c + cd(sigma * n(rng), sigma * n(rng)));
                b.iq.push_back(c + cd(sigma * n(rng), sigma * n(rng)));
        }
        EXPECT_NEAR(snr_of_residual(a, b), 60 - 10 * std::log10(2.0), 0.1);
}

TEST(Snr, RejectsMismatchAndVanishingDivisor)
{
        ComplexBaseband a = tone(0.01, 100);
        ComplexBaseband b = tone(0.01, 99);
        EXPECT_THROW(snr_of_residual(a, b), data_error);
        b = a;
        b.iq[10] = 0;
        EXPECT_THROW(snr_of_residual(a, b), numeric_error);
}

TEST(Snr, FirSnrRisesWithDecimation)
{
        CicFirOptions opt;
        opt.output_samples = 2000;
        const std::vector<CicFirRow> rows = compare_cic_fir({20, 40, 80, 100, 200, 400, 500}, opt);
        for (std::size_t i = 1; i < rows.size(); ++i)
        {
                EXPECT_GT(rows[i].snr_fir_db, rows[i - 1].snr_fir_db) << rows[i].n_decim;
        }
        EXPECT_GT(rows.back().delta_db(), 0);
}

TEST(Ddc, BeatRotationRemoved)
{
        const double fs = 25e6;
        SineModel m;
        m.phase_error = ConstantPhase{0.4};
        const RealSampleStream x = synth_sine(m, fs, 4e-3);
        DdcConfig cfg;
        cfg.nco_freq_hz = 10e6 + 1e3;
        cfg.beat_freq_hz = 1e3;
        const ComplexBaseband z = ddc_channel(x, 0, cfg, default_decimator());
        const double p0 = std::arg(z.iq.front());
        for (const cd v : z.iq)
        {
                EXPECT_NEAR(std::arg(v * std::polar(1.0, -p0)), 0, 1e-6);
        }
        // phase of sin(theta + 0.4) mixed down is 0.4 - pi/2
        EXPECT_NEAR(p0, 0.4 - pi / 2, 1e-5);
}

TEST(Ddc, ShortChannelRejected)
{
        const RealSampleStream x = make_stream(std::vector<double>(1000, 0.1), 25e6);
        EXPECT_THROW(ddc_channel(x, 0, DdcConfig{}, default_decimator()), data_error);
}
