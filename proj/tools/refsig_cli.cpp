// Command-line front end for synthesis, down-conversion, edge timing and
// stability analysis.

#include "refsig/refsig.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace
{
using namespace refsig;

std::vector<std::string> split(const std::string& s, const char sep)
{
        std::vector<std::string> out;
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, sep))
        {
                out.push_back(cur);
        }
        return out;
}

double number(const std::string& s, const std::string& what)
{
        try
        {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size())
                {
                        throw std::invalid_argument(s);
                }
                return v;
        }
        catch (const std::exception&)
        {
                throw std::invalid_argument("cannot parse " + what + " \"" + s + "\"");
        }
}

std::vector<int> int_list(const std::string& s, const std::string& what)
{
        std::vector<int> out;
        for (const std::string& p : split(s, ','))
        {
                const double v = number(p, what);
                if (v != std::floor(v) || v < 1)
                {
                        throw std::invalid_argument(what + " must be positive integers");
                }
                out.push_back(static_cast<int>(v));
        }
        if (out.empty())
        {
                throw std::invalid_argument(what + " is empty");
        }
        return out;
}

std::vector<double> double_list(const std::string& s, const std::string& what)
{
        std::vector<double> out;
        for (const std::string& p : split(s, ','))
        {
                out.push_back(number(p, what));
        }
        return out;
}

/// zero | const:RAD | linear:RAD_PER_S | sin:RAD:HZ | white:RMS_RAD |
/// table:FILE (CSV with columns t_s,phase_rad at a uniform rate)
PhaseErrorModel parse_phase_error(const std::string& spec)
{
        const std::vector<std::string> p = split(spec, ':');
        if (p.empty() || p[0] == "zero")
        {
                return ZeroPhase{};
        }
        const auto need = [&](const std::size_t n)
        {
                if (p.size() != n)
                {
                        throw std::invalid_argument("phase error \"" + spec + "\" has the wrong number of fields");
                }
        };
        if (p[0] == "const")
        {
                need(2);
                return ConstantPhase{number(p[1], "phase")};
        }
        if (p[0] == "linear")
        {
                need(2);
                return LinearPhase{number(p[1], "phase rate")};
        }
        if (p[0] == "sin")
        {
                need(3);
                return SinusoidalPhase{number(p[1], "phase amplitude"), number(p[2], "phase frequency")};
        }
        if (p[0] == "white")
        {
                need(2);
                return WhitePhase{number(p[1], "phase rms")};
        }
        if (p[0] == "table")
        {
                if (p.size() < 2)
                {
                        throw std::invalid_argument("table phase error needs a file");
                }
                const std::string file = spec.substr(6);
                const io::CsvTable t = io::read_csv(file);
                const std::size_t ct = io::detail::column(t, "t_s");
                const std::size_t cp = io::detail::column(t, "phase_rad");
                if (t.rows.size() < 2)
                {
                        detail::throw_data("phase table needs at least two rows");
                }
                TablePhase tp;
                tp.start_time_s = t.rows.front()[ct];
                tp.rate_hz = static_cast<double>(t.rows.size() - 1) / (t.rows.back()[ct] - t.rows.front()[ct]);
                for (const auto& r : t.rows)
                {
                        tp.rad.push_back(r[cp]);
                }
                return tp;
        }
        throw std::invalid_argument("unknown phase error model \"" + p[0] + "\"");
}

RealSampleStream digitise(const RealSampleStream& s, const int bits, const double input_level)
{
        if (bits == 0)
        {
                return s;
        }
        const QuantizeResult q = quantize(s, AdcSpec{bits, input_level});
        if (q.clipped > 0)
        {
                std::cerr << "warning: " << q.clipped << " samples clipped\n";
        }
        return q.stream;
}

void write_text(const std::string& path, const std::string& text)
{
        if (path.empty() || path == "-")
        {
                std::cout << text;
                return;
        }
        io::detail::write_text(path, text);
}

std::string summary_text(const SummaryStats& s, const std::size_t n)
{
        std::string out = "n,sigma_s,mu_s,linear_drift\n";
        out += std::to_string(n) + "," + io::format_double(s.sigma_s) + "," + io::format_double(s.mu_s) + ","
               + io::format_double(s.linear_drift) + "\n";
        return out;
}

DecimatorSpec chain_from(const std::string& stages, const double atten)
{
        return design_decimator(int_list(stages, "stages"), atten, 0.8);
}

struct TriggerOpts
{
        double low = 0.3;
        double high = 0.7;
        int interp = 20;
        int window = 8;
        bool falling = false;

        void add(CLI::App* app)
        {
                app->add_option("--low", low, "Schmitt arm threshold (normalised)");
                app->add_option("--high", high, "Schmitt fire threshold (normalised)");
                app->add_option("--interp", interp, "spectral interpolation factor")->check(CLI::PositiveNumber);
                app->add_option("--window", window, "samples before and after the coarse edge")
                        ->check(CLI::PositiveNumber);
                app->add_flag("--falling", falling, "time falling instead of rising edges");
        }

        [[nodiscard]] TriggerSpec spec() const
        {
                TriggerSpec t;
                t.low_threshold = low;
                t.high_threshold = high;
                t.interp_factor = interp;
                t.window_before = window;
                t.window_after = window;
                t.polarity = falling ? Polarity::falling : Polarity::rising;
                return t;
        }
};

std::string baseband_csv(const ComplexBaseband& z)
{
        std::string out = "t_s,i,q\n";
        for (std::size_t k = 0; k < z.iq.size(); ++k)
        {
                out += io::format_double(z.time_of(k)) + "," + io::format_double(z.iq[k].real()) + ","
                       + io::format_double(z.iq[k].imag()) + "\n";
        }
        return out;
}

int run(int argc, char** argv)
{
        CLI::App app{"Reference signal comparison toolkit"};
        app.require_subcommand(1);

        // synth
        auto* synth = app.add_subcommand("synth", "synthesise a reference signal");
        synth->require_subcommand(1);
        double fs = 25e6;
        double fr = 10e6;
        double duration = 0;
        std::optional<double> snr;
        std::string phase_error = "zero";
        double amplitude = 0.5;
        int bits = 14;
        double input_level = 1.0;
        std::uint64_t seed = 1;
        std::string out;
        const auto common_synth = [&](CLI::App* c)
        {
                c->add_option("--fs", fs, "sample rate, Hz");
                c->add_option("--duration", duration, "signal length, s")->required();
                c->add_option("--snr", snr, "additive white noise SNR, dB");
                c->add_option("--amplitude", amplitude, "amplitude, fraction of full scale");
                c->add_option("--bits", bits, "ADC resolution; 0 writes float64 samples");
                c->add_option("--input-level", input_level, "ADC input level, fraction of full scale");
                c->add_option("--seed", seed, "noise seed");
                c->add_option("--out", out, "output sample file")->required();
        };
        auto* synth_sine_cmd = synth->add_subcommand("sine", "sine with a phase error model");
        common_synth(synth_sine_cmd);
        synth_sine_cmd->add_option("--fr", fr, "carrier frequency, Hz");
        synth_sine_cmd->add_option("--phase-error", phase_error,
                                   "zero | const:RAD | linear:RAD_PER_S | sin:RAD:HZ | white:RMS | table:CSV");

        double period = 1;
        double thigh = 0.25;
        double omega0 = 2 * std::numbers::pi * 5e6;
        double zeta = 0.6;
        std::string te_file;
        auto* synth_pulse_cmd = synth->add_subcommand("pulse", "pulse train with per-pulse time errors");
        common_synth(synth_pulse_cmd);
        synth_pulse_cmd->add_option("--period", period, "pulse period, s");
        synth_pulse_cmd->add_option("--thigh", thigh, "high time, s");
        synth_pulse_cmd->add_option("--omega0", omega0, "low-pass cutoff, rad/s");
        synth_pulse_cmd->add_option("--zeta", zeta, "low-pass damping");
        synth_pulse_cmd->add_option("--te-file", te_file, "CSV with column te_s, one row per pulse");

        // ddc
        auto* ddc = app.add_subcommand("ddc", "down-convert and decimate one channel");
        double ft = 10e6;
        double fb = 0;
        std::string stages = "10,10,10";
        double atten = 120;
        std::string in;
        std::size_t channel = 0;
        std::string taps_prefix;
        ddc->add_option("--ft", ft, "NCO frequency, Hz");
        ddc->add_option("--fb", fb, "beat frequency f_t - f_r to remove, Hz");
        ddc->add_option("--stages", stages, "decimation factors, e.g. 10,10,10");
        ddc->add_option("--atten-db", atten, "stopband attenuation, dB");
        ddc->add_option("--in", in, "input sample file")->required();
        ddc->add_option("--channel", channel, "channel index");
        ddc->add_option("--out", out, "output CSV (t_s,i,q)")->required();
        ddc->add_option("--taps-prefix", taps_prefix, "also write PREFIX_stageN.csv tap lists");

        // edges
        auto* edges = app.add_subcommand("edges", "time pulse edges");
        TriggerOpts trig;
        trig.add(edges);
        edges->add_option("--in", in, "input sample file")->required();
        edges->add_option("--channel", channel, "channel index");
        edges->add_option("--out", out, "output CSV")->required();

        // analyze
        auto* analyze = app.add_subcommand("analyze", "compare two channels");
        analyze->require_subcommand(1);
        std::string in_a;
        std::string in_b;
        bool to_1hz = false;
        std::string prefix = "out";
        auto* an_sine = analyze->add_subcommand("sine", "sine time error via complex division");
        an_sine->add_option("--in-a", in_a, "sample file of channel A")->required();
        an_sine->add_option("--in-b", in_b, "sample file of channel B")->required();
        an_sine->add_option("--fr", fr, "carrier frequency, Hz");
        an_sine->add_option("--ft", ft, "NCO frequency, Hz (default: --fr)");
        an_sine->add_option("--stages", stages, "decimation factors");
        an_sine->add_option("--atten-db", atten, "stopband attenuation, dB");
        an_sine->add_flag("--to-1hz", to_1hz, "reduce the time error to 1 S/s");
        an_sine->add_option("--out-prefix", prefix, "prefix of the output files");

        std::optional<double> max_offset;
        auto* an_pulse = analyze->add_subcommand("pulse", "pulse time error via edge pairing");
        TriggerOpts trig_p;
        trig_p.add(an_pulse);
        an_pulse->add_option("--in-a", in_a, "sample file of channel A")->required();
        an_pulse->add_option("--in-b", in_b, "sample file of channel B")->required();
        an_pulse->add_option("--max-offset", max_offset, "pairing window, s (default: half the edge spacing)");
        an_pulse->add_option("--out-prefix", prefix, "prefix of the output files");

        // adev / drift / savgol
        std::string taus;
        auto* adev = app.add_subcommand("adev", "overlapping Allan deviation of a t_s,dt_s CSV");
        adev->add_option("--in", in, "time-error CSV")->required();
        adev->add_option("--taus", taus, "comma-separated taus, s (default: log grid)");
        adev->add_option("--out", out, "output CSV (default: stdout)");

        auto* drift = app.add_subcommand("drift", "least-squares linear drift of a t_s,dt_s CSV");
        drift->add_option("--in", in, "time-error CSV")->required();

        SavGolSpec sg;
        std::optional<double> dt;
        auto* savgol_cmd = app.add_subcommand("savgol", "Savitzky-Golay smoothing or differentiation");
        savgol_cmd->add_option("--window", sg.window_len, "odd window length");
        savgol_cmd->add_option("--order", sg.poly_order, "polynomial order");
        savgol_cmd->add_option("--deriv", sg.deriv_order, "0 smooth, 1 differentiate");
        savgol_cmd->add_option("--dt", dt, "sample spacing, s (default: from the series)");
        savgol_cmd->add_option("--in", in, "time-error CSV")->required();
        savgol_cmd->add_option("--out", out, "output CSV (default: stdout)");

        // compare
        auto* compare = app.add_subcommand("compare", "filter comparisons");
        compare->require_subcommand(1);
        std::string decims = "20,40,80,100,200,400,500";
        CicFirOptions cmp;
        auto* cic_fir = compare->add_subcommand("cic-fir", "residual SNR after CIC and FIR decimation");
        cic_fir->add_option("--decims", decims, "decimation factors");
        cic_fir->add_option("--snr", cmp.snr_db, "per-channel SNR, dB");
        cic_fir->add_option("--samples", cmp.output_samples, "output samples per run");
        cic_fir->add_option("--seed", cmp.seed, "noise seed");
        cic_fir->add_option("--out", out, "output CSV (default: stdout)");

        // dmtd
        double ftic = 250e6;
        auto* dmtd = app.add_subcommand("dmtd", "DMTD baseline next to the SDR result");
        dmtd->add_option("--ft", ft, "transfer oscillator frequency, Hz")->required();
        dmtd->add_option("--fr", fr, "reference frequency, Hz");
        dmtd->add_option("--ftic", ftic, "TIC clock, Hz");
        dmtd->add_option("--in-a", in_a, "sample file of channel A")->required();
        dmtd->add_option("--in-b", in_b, "sample file of channel B")->required();
        dmtd->add_option("--out", out, "output CSV (default: stdout)");

        // ingest
        std::size_t channels = 1;
        auto* ingest = app.add_subcommand("ingest", "assemble framed samples, zero-padding lost frames");
        ingest->add_option("--in", in, "frame file")->required();
        ingest->add_option("--channels", channels, "channels per frame")->check(CLI::PositiveNumber);
        ingest->add_option("--fs", fs, "sample rate, Hz");
        ingest->add_option("--out", out, "output sample file")->required();

        try
        {
                app.parse(argc, argv);
        }
        catch (const CLI::ParseError& e)
        {
                const int rc = app.exit(e);
                return rc == 0 ? 0 : 1;
        }

        if (synth_sine_cmd->parsed())
        {
                SineModel m;
                m.carrier_freq_hz = fr;
                m.amplitude = amplitude;
                m.phase_error = parse_phase_error(phase_error);
                m.noise_snr_db = snr;
                m.seed = seed;
                const RealSampleStream s = digitise(synth_sine(m, fs, duration), bits, input_level);
                std::cout << io::write_samples(s, out) << " bytes\n";
        }
        else if (synth_pulse_cmd->parsed())
        {
                PulseModel m;
                m.period_s = period;
                m.high_s = thigh;
                m.cutoff_rad_per_s = omega0;
                m.damping = zeta;
                m.amplitude = amplitude;
                if (!te_file.empty())
                {
                        const io::CsvTable t = io::read_csv(te_file);
                        const std::size_t c = io::detail::column(t, "te_s");
                        for (const auto& r : t.rows)
                        {
                                m.time_errors_s.push_back(r[c]);
                        }
                }
                const RealSampleStream s = digitise(synth_pulse_train(m, fs, duration, snr, seed), bits, input_level);
                std::cout << io::write_samples(s, out) << " bytes\n";
        }
        else if (ddc->parsed())
        {
                const RealSampleStream s = io::read_samples(in);
                const DecimatorSpec spec = chain_from(stages, atten);
                DdcConfig cfg;
                cfg.nco_freq_hz = ft;
                cfg.beat_freq_hz = fb;
                const ComplexBaseband z = ddc_channel(s, channel, cfg, spec);
                write_text(out, baseband_csv(z));
                if (!taps_prefix.empty())
                {
                        for (std::size_t i = 0; i < spec.stages.size(); ++i)
                        {
                                io::export_taps_csv(spec.stages[i].taps,
                                                    taps_prefix + "_stage" + std::to_string(i + 1) + ".csv");
                        }
                }
                std::cout << z.iq.size() << " samples at " << z.sample_rate_hz << " S/s\n";
        }
        else if (edges->parsed())
        {
                const RealSampleStream s = io::read_samples(in);
                const EdgeEventSeries e = detect_edges(s, channel, trig.spec());
                if (e.events.empty())
                {
                        detail::throw_data("no edges found");
                }
                io::export_csv(e, out);
                std::cout << e.events.size() << " edges, " << e.dropped << " dropped\n";
        }
        else if (an_sine->parsed())
        {
                const RealSampleStream a = io::read_samples(in_a);
                const RealSampleStream b = io::read_samples(in_b);
                const DecimatorSpec spec = chain_from(stages, atten);
                DdcConfig cfg;
                cfg.nco_freq_hz = an_sine->count("--ft") ? ft : fr;
                cfg.beat_freq_hz = cfg.nco_freq_hz - fr;
                TimeErrorSeries series =
                        sine_time_error(ddc_channel(a, 0, cfg, spec), ddc_channel(b, 0, cfg, spec), fr);
                if (to_1hz)
                {
                        series = decimate_to_1hz(series);
                }
                io::export_csv(series, prefix + "_dt.csv");
                const std::string summary = summary_text(summary_stats(series), series.values_s.size());
                io::detail::write_text(prefix + "_summary.csv", summary);
                std::cout << summary;
        }
        else if (an_pulse->parsed())
        {
                const RealSampleStream a = io::read_samples(in_a);
                const RealSampleStream b = io::read_samples(in_b);
                const EdgeEventSeries ea = detect_edges(a, 0, trig_p.spec());
                const EdgeEventSeries eb = detect_edges(b, 0, trig_p.spec());
                const PairedEdges p = pair_edge_times(ea, eb, max_offset);
                io::export_csv(ea, prefix + "_edges_a.csv");
                io::export_csv(eb, prefix + "_edges_b.csv");
                io::export_csv(p.series, prefix + "_dt.csv");
                const std::string summary = summary_text(summary_stats(p.series), p.series.values_s.size());
                io::detail::write_text(prefix + "_summary.csv", summary);
                std::cout << summary << "unmatched_a," << p.unmatched_a << "\nunmatched_b," << p.unmatched_b << "\n";
        }
        else if (adev->parsed())
        {
                const TimeErrorSeries s = io::read_time_error_csv(in);
                const AllanCurve c = taus.empty() ? allan_deviation(s) : allan_deviation(s, double_list(taus, "taus"));
                for (const std::string& msg : c.omitted)
                {
                        std::cerr << "omitted: " << msg << "\n";
                }
                write_text(out, io::allan_csv(c));
        }
        else if (drift->parsed())
        {
                const DriftFit f = fit_linear_drift(io::read_time_error_csv(in));
                std::cout << "slope,intercept_s,residual_rms_s,slope_stderr\n"
                          << io::format_double(f.slope) << "," << io::format_double(f.intercept_s) << ","
                          << io::format_double(f.residual_rms_s) << "," << io::format_double(f.slope_stderr) << "\n";
        }
        else if (savgol_cmd->parsed())
        {
                TimeErrorSeries s = io::read_time_error_csv(in);
                if (dt)
                {
                        s.times_s.clear();
                        s.rate_hz = 1 / *dt;
                }
                write_text(out, io::time_error_csv(savgol(s, sg)));
        }
        else if (cic_fir->parsed())
        {
                const std::vector<CicFirRow> rows = compare_cic_fir(int_list(decims, "decims"), cmp);
                std::string text = "n_decim,snr_fir_db,snr_cic_db,delta_db\n";
                for (const CicFirRow& r : rows)
                {
                        text += std::to_string(r.n_decim) + "," + io::format_double(r.snr_fir_db) + ","
                                + io::format_double(r.snr_cic_db) + "," + io::format_double(r.delta_db()) + "\n";
                }
                write_text(out, text);
        }
        else if (dmtd->parsed())
        {
                const RealSampleStream a = io::read_samples(in_a);
                const RealSampleStream b = io::read_samples(in_b);
                const std::vector<double> xa = a.channel(0);
                const std::vector<double> xb = b.channel(0);
                const DmtdConfig cfg = make_dmtd_config(fr, ft, a.sample_rate_hz);
                TicSpec tic;
                tic.clock_freq_hz = ftic;
                const DmtdResult d = dmtd_measure(xa, xb, cfg, a.sample_rate_hz, tic, a.start_time_s);

                DdcConfig dc;
                dc.nco_freq_hz = fr;
                const DecimatorSpec spec = default_decimator();
                const TimeErrorSeries sdr = sine_time_error(ddc_channel(a, 0, dc, spec), ddc_channel(b, 0, dc, spec), fr);
                std::string text = "t_s,dt_dmtd_s,dt_sdr_s\n";
                for (std::size_t i = 0; i < d.series.values_s.size(); ++i)
                {
                        const double t = d.series.time_of(i);
                        const double pos = (t - sdr.start_time_s) * sdr.rate_hz;
                        std::string sdr_val;
                        if (pos >= 0 && pos <= static_cast<double>(sdr.values_s.size() - 1))
                        {
                                const auto k = std::min(static_cast<std::size_t>(pos), sdr.values_s.size() - 2);
                                const double f = pos - static_cast<double>(k);
                                sdr_val = io::format_double(sdr.values_s[k] + f * (sdr.values_s[k + 1] - sdr.values_s[k]));
                        }
                        text += io::format_double(t) + "," + io::format_double(d.series.values_s[i]) + "," + sdr_val
                                + "\n";
                }
                write_text(out, text);
        }
        else if (ingest->parsed())
        {
                const std::vector<unsigned char> bytes = io::read_file(in);
                const std::vector<io::StreamFrame> frames = io::decode_frames(bytes, channels);
                const io::IngestResult r = io::ingest_framed_stream(frames, channels, fs);
                io::write_samples(r.stream, out);
                std::cout << "frames," << frames.size() << "\npadded_samples," << r.report.padded_samples << "\n";
                for (const io::GapSpan& g : r.report.gaps)
                {
                        std::cout << "gap," << g.first_missing_sequence << "," << g.frame_count << "\n";
                }
        }
        return 0;
}
}

int main(int argc, char** argv)
{
        try
        {
                return run(argc, argv);
        }
        catch (const std::invalid_argument& e)
        {
                std::cerr << "usage error: " << e.what() << "\n";
                return 1;
        }
        catch (const refsig::numeric_error& e)
        {
                std::cerr << "numeric error: " << e.what() << "\n";
                return 3;
        }
        catch (const refsig::error& e)
        {
                std::cerr << "data error: " << e.what() << "\n";
                return 2;
        }
        catch (const std::exception& e)
        {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
        }
}
