#include "refsig/analysis.hpp"
#include "refsig/baseline.hpp"
#include "refsig/sigmodel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace refsig;

namespace
{
constexpr double pi = std::numbers::pi;
constexpr double fs = 25e6;

std::vector<double> carrier(const double phase, const double duration = 2e-3)
{
        SineModel m;
        m.phase_error = ConstantPhase{phase};
        return synth_sine(m, fs, duration).samples;
}

// crossings of one polarity
std::vector<double> rising_times(const ZeroCrossings& z)
{
        std::vector<double> t;
        for (std::size_t i = 0; i < z.times_s.size(); ++i)
        {
                if (z.rising[i])
                {
                        t.push_back(z.times_s[i]);
                }
        }
        return t;
}
}

TEST(Dmtd, ConfigBeatFrequency)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        EXPECT_NEAR(cfg.beat_freq_hz, 10e3, 1e-6);
        EXPECT_NO_THROW(cfg.validate(fs));
        EXPECT_GE(amplitude_response(cfg.lowpass.taps, cfg.beat_freq_hz / (fs / 2)), std::numbers::sqrt2 / 2);
        EXPECT_THROW(make_dmtd_config(10e6, 10e6, fs), std::invalid_argument);
}

TEST(Dmtd, ConstantPhaseGivesUniformCrossings)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        const ZeroCrossings z = zero_crossings(dmtd_beat(carrier(0.4), cfg, fs));
        ASSERT_GT(z.times_s.size(), 30u);
        for (std::size_t i = 1; i < z.times_s.size(); ++i)
        {
                EXPECT_NEAR(z.times_s[i] - z.times_s[i - 1], 1 / (2 * cfg.beat_freq_hz), 1e-10);
                EXPECT_NE(z.rising[i], z.rising[i - 1]);
        }
}

TEST(Dmtd, PhaseStepShiftsCrossings)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        const double delta = 0.2;
        const auto t0 = rising_times(zero_crossings(dmtd_beat(carrier(0.0), cfg, fs)));
        const auto t1 = rising_times(zero_crossings(dmtd_beat(carrier(delta), cfg, fs)));
        ASSERT_GT(t0.size(), 10u);
        // a phase lead moves the beat crossings earlier
        for (std::size_t i = 1; i + 1 < std::min(t0.size(), t1.size()); ++i)
        {
                EXPECT_NEAR(t1[i] - t0[i], -delta / (2 * pi * cfg.beat_freq_hz), 1e-10);
        }
}

TEST(Dmtd, HeterodyneMagnification)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        const double delta_t = 5e-9;
        // x(t - delta_t) has phase -2 pi f_r delta_t
        const auto t0 = rising_times(zero_crossings(dmtd_beat(carrier(0.0), cfg, fs)));
        const auto t1 = rising_times(zero_crossings(dmtd_beat(carrier(-2 * pi * 10e6 * delta_t), cfg, fs)));
        const double gain = cfg.reference_freq_hz / cfg.beat_freq_hz;
        for (std::size_t i = 1; i + 1 < std::min(t0.size(), t1.size()); ++i)
        {
                EXPECT_NEAR(t1[i] - t0[i], delta_t * gain, 1e-10);
        }
}

TEST(Dmtd, BeatRejectsUnsuitableLowpass)
{
        DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        // boxcar whose first null sits on the 10 kHz beat
        cfg.lowpass.taps.assign(2501, 1.0 / 2501);
        const auto x = carrier(0);
        EXPECT_THROW(dmtd_beat(x, cfg, fs), std::invalid_argument);
        cfg = make_dmtd_config(10e6, 9.99e6, fs);
        cfg.transfer_freq_hz = 13e6;
        EXPECT_THROW(dmtd_beat(x, cfg, fs), std::invalid_argument);
}

TEST(ZeroCrossings, Examples)
{
        const std::vector<double> pair{-0.5, 0.5};
        const ZeroCrossings z = zero_crossings(pair, 1);
        ASSERT_EQ(z.times_s.size(), 1u);
        EXPECT_DOUBLE_EQ(z.times_s[0], 0.5);
        EXPECT_TRUE(z.rising[0]);
        const std::vector<double> pos(100, 0.3);
        const ZeroCrossings e = zero_crossings(pos, 1);
        EXPECT_TRUE(e.times_s.empty());
        EXPECT_FALSE(e.diagnostic.empty());
}

TEST(ZeroCrossings, SinusoidHalfPeriods)
{
        const double f = 10e3;
        std::vector<double> x(20000);
        for (std::size_t n = 0; n < x.size(); ++n)
        {
                x[n] = std::sin(2 * pi * f * static_cast<double>(n) / fs + 0.3);
        }
        const ZeroCrossings z = zero_crossings(x, fs);
        ASSERT_GT(z.times_s.size(), 10u);
        const double half = 1 / (2 * f);
        for (std::size_t i = 0; i < z.times_s.size(); ++i)
        {
                // analytic zeros at (k pi - 0.3) / (2 pi f)
                const double k = std::round((2 * pi * f * z.times_s[i] + 0.3) / pi);
                EXPECT_NEAR(z.times_s[i], (k * pi - 0.3) / (2 * pi * f), 1e-6 * half);
                if (i > 0)
                {
                        EXPECT_NEAR(z.times_s[i] - z.times_s[i - 1], half, 1e-6 * half);
                }
        }
}

TEST(Tic, Examples)
{
        const TicSpec spec;
        EXPECT_EQ(tic_count(1.0, 1.0, spec).counts, 0);
        const TicReading r = tic_count(0, 17e-9, spec);
        EXPECT_EQ(r.counts, 4);
        EXPECT_NEAR(r.interval_s, 16e-9, 1e-24);
        const TicReading k = tic_count(0.5, 0.5 + 100 * 4e-9, spec);
        EXPECT_EQ(k.counts, 100);
        EXPECT_NEAR(k.interval_s, 400e-9, 1e-22);
        EXPECT_THROW(tic_count(1, 0.5, spec), data_error);
        EXPECT_THROW(tic_count(0, 1, TicSpec{0, 0}), std::invalid_argument);
}

TEST(Tic, QuantizationErrorInRange)
{
        std::mt19937_64 rng(40);
        std::uniform_real_distribution<double> u(0, 1e-3);
        const TicSpec spec;
        for (int i = 0; i < 100000; ++i)
        {
                const double start = u(rng);
                const double stop = start + u(rng);
                const TicReading r = tic_count(start, stop, spec);
                const double err = (stop - start) - r.interval_s;
                ASSERT_GE(err, -1e-9 / spec.clock_freq_hz);
                ASSERT_LT(err, 1 / spec.clock_freq_hz);
        }
}

TEST(Dmtd, TimeErrorConversion)
{
        EXPECT_NEAR(dmtd_time_error(1e-6, 10e6, 10e3), 1e-9, 1e-24);
        EXPECT_EQ(dmtd_time_error(0, 10e6, 10e3), 0);
        EXPECT_THROW(dmtd_time_error(1e-6, 10e6, 0), std::invalid_argument);
}

TEST(Dmtd, ClosedLoopRecoversInjectedStep)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        for (const double delta : {0.05, -0.7, 2.0})
        {
                const auto a = carrier(delta);
                const auto b = carrier(0.0);
                const DmtdResult r = dmtd_measure(a, b, cfg, fs, TicSpec{1e18, 0});
                ASSERT_GT(r.series.values_s.size(), 20u);
                const double expected = delta / (2 * pi * 10e6);
                for (const double v : r.series.values_s)
                {
                        EXPECT_NEAR(v, expected, 1e-14) << delta;
                }
        }
}

TEST(Dmtd, TransferAboveReferenceKeepsSign)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 10.01e6, fs);
        const DmtdResult r = dmtd_measure(carrier(0.3), carrier(0.0), cfg, fs, TicSpec{1e18, 0});
        ASSERT_FALSE(r.series.values_s.empty());
        EXPECT_NEAR(summary_stats(r.series).mu_s, 0.3 / (2 * pi * 10e6), 1e-14);
}

TEST(Dmtd, AgreesWithSdrWithinTicBound)
{
        const DmtdConfig cfg = make_dmtd_config(10e6, 9.99e6, fs);
        const TicSpec tic;
        const double delta = 0.8;
        const DmtdResult r = dmtd_measure(carrier(delta), carrier(0.0), cfg, fs, tic);
        const double bound = 1 / (tic.clock_freq_hz * cfg.reference_freq_hz / cfg.beat_freq_hz);
        const double sdr = delta / (2 * pi * 10e6);
        for (const double v : r.series.values_s)
        {
                EXPECT_LE(std::abs(v - sdr), bound);
        }
}
