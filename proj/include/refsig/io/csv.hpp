#pragma once

// CSV export and import. Numbers use the shortest decimal form that
// round-trips binary64 exactly.

#include "../allan.hpp"
#include "../error.hpp"
#include "../stream.hpp"
#include "sample_file.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace refsig::io
{
inline std::string format_double(const double v)
{
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return {buf, res.ptr};
}

inline double parse_double(std::string_view s, const std::size_t line)
{
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        {
                s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        {
                s.remove_suffix(1);
        }
        if (!s.empty() && s.front() == '+')
        {
                s.remove_prefix(1);
        }
        double v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        {
                refsig::detail::throw_data("line " + std::to_string(line) + ": cannot parse number \"" + std::string(s)
                                           + "\"");
        }
        return v;
}

namespace detail
{
inline std::size_t write_text(const std::filesystem::path& path, const std::string& text)
{
        write_file(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
        return text.size();
}

template <typename... Ts>
void row(std::string& out, const Ts&... cols)
{
        bool first = true;
        const auto put = [&](const auto& c)
        {
                if (!first)
                {
                        out += ',';
                }
                first = false;
                if constexpr (std::is_floating_point_v<std::decay_t<decltype(c)>>)
                {
                        out += format_double(c);
                }
                else
                {
                        out += std::to_string(c);
                }
        };
        (put(cols), ...);
        out += '\n';
}
}

inline std::string time_error_csv(const TimeErrorSeries& s)
{
        if (s.values_s.empty())
        {
                refsig::detail::throw_data("refusing to export an empty time-error series");
        }
        std::string out = "t_s,dt_s\n";
        for (std::size_t k = 0; k < s.values_s.size(); ++k)
        {
                detail::row(out, s.time_of(k), s.values_s[k]);
        }
        return out;
}

inline std::string allan_csv(const AllanCurve& c)
{
        if (c.points.empty())
        {
                refsig::detail::throw_data("refusing to export an empty Allan curve");
        }
        std::string out = "tau_s,adev,n_terms\n";
        for (const AllanPoint& p : c.points)
        {
                detail::row(out, p.tau_s, p.adev, p.n_terms);
        }
        return out;
}

inline std::string edges_csv(const EdgeEventSeries& e)
{
        if (e.events.empty())
        {
                refsig::detail::throw_data("refusing to export an empty edge series");
        }
        std::string out = "event_index,coarse_index,fractional_index,time_s\n";
        for (std::size_t i = 0; i < e.events.size(); ++i)
        {
                detail::row(out, i, e.events[i].coarse_index, e.events[i].fractional_index, e.events[i].time_s);
        }
        return out;
}

inline std::string taps_csv(std::span<const double> taps)
{
        if (taps.empty())
        {
                refsig::detail::throw_data("refusing to export an empty tap list");
        }
        std::string out = "index,tap\n";
        for (std::size_t i = 0; i < taps.size(); ++i)
        {
                detail::row(out, i, taps[i]);
        }
        return out;
}

/// Each exporter builds the whole text first, so nothing is created when
/// the input is rejected. Returns the number of bytes written.
inline std::size_t export_csv(const TimeErrorSeries& s, const std::filesystem::path& path)
{
        return detail::write_text(path, time_error_csv(s));
}

inline std::size_t export_csv(const AllanCurve& c, const std::filesystem::path& path)
{
        return detail::write_text(path, allan_csv(c));
}

inline std::size_t export_csv(const EdgeEventSeries& e, const std::filesystem::path& path)
{
        return detail::write_text(path, edges_csv(e));
}

inline std::size_t export_taps_csv(std::span<const double> taps, const std::filesystem::path& path)
{
        return detail::write_text(path, taps_csv(taps));
}

/// Rows of numeric columns under a header line, which is returned in
/// header.
struct CsvTable
{
        std::vector<std::string> header;
        std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
        std::vector<std::string> cols;
        std::string cur;
        for (const char ch : line)
        {
                if (ch == ',')
                {
                        cols.push_back(cur);
                        cur.clear();
                }
                else if (ch != '\r')
                {
                        cur += ch;
                }
        }
        cols.push_back(cur);
        return cols;
}

inline CsvTable parse_csv(const std::string& text)
{
        CsvTable t;
        std::istringstream in(text);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line))
        {
                ++n;
                if (line.empty() || line == "\r" || line.front() == '#')
                {
                        continue;
                }
                const std::vector<std::string> cols = split_csv_line(line);
                if (t.header.empty())
                {
                        t.header = cols;
                        continue;
                }
                if (cols.size() != t.header.size())
                {
                        refsig::detail::throw_data("line " + std::to_string(n) + ": expected "
                                                   + std::to_string(t.header.size()) + " columns, found "
                                                   + std::to_string(cols.size()));
                }
                std::vector<double> r;
                for (const std::string& c : cols)
                {
                        r.push_back(parse_double(c, n));
                }
                t.rows.push_back(std::move(r));
        }
        if (t.header.empty())
        {
                refsig::detail::throw_data("CSV input is empty");
        }
        return t;
}

inline CsvTable read_csv(const std::filesystem::path& path)
{
        const std::vector<unsigned char> bytes = read_file(path);
        return parse_csv(std::string(bytes.begin(), bytes.end()));
}

namespace detail
{
inline std::size_t column(const CsvTable& t, const std::string& name)
{
        for (std::size_t i = 0; i < t.header.size(); ++i)
        {
                if (t.header[i] == name)
                {
                        return i;
                }
        }
        refsig::detail::throw_data("CSV lacks column \"" + name + "\"");
}
}

/// Reads a "t_s,dt_s" table. Evenly spaced times (to 1e-9 of the step)
/// give a uniform series; anything else keeps the explicit time axis.
inline TimeErrorSeries time_error_from_csv(const CsvTable& t)
{
        const std::size_t ct = detail::column(t, "t_s");
        const std::size_t cv = detail::column(t, "dt_s");
        if (t.rows.empty())
        {
                refsig::detail::throw_data("time-error table has no rows");
        }
        TimeErrorSeries s;
        std::vector<double> times;
        for (const auto& r : t.rows)
        {
                times.push_back(r[ct]);
                s.values_s.push_back(r[cv]);
        }
        s.start_time_s = times.front();
        bool uniform = times.size() >= 2;
        const double step = uniform ? (times.back() - times.front()) / static_cast<double>(times.size() - 1) : 0;
        if (uniform && step > 0)
        {
                for (std::size_t k = 0; k < times.size(); ++k)
                {
                        if (std::abs(times[k] - (times.front() + static_cast<double>(k) * step)) > 1e-9 * step)
                        {
                                uniform = false;
                                break;
                        }
                }
        }
        else
        {
                uniform = false;
        }
        if (uniform)
        {
                s.rate_hz = 1 / step;
        }
        else
        {
                s.times_s = times;
        }
        return s;
}

inline TimeErrorSeries read_time_error_csv(const std::filesystem::path& path)
{
        return time_error_from_csv(read_csv(path));
}

inline EdgeEventSeries read_edges_csv(const std::filesystem::path& path)
{
        const CsvTable t = read_csv(path);
        const std::size_t cc = detail::column(t, "coarse_index");
        const std::size_t cf = detail::column(t, "fractional_index");
        const std::size_t ct = detail::column(t, "time_s");
        EdgeEventSeries e;
        for (const auto& r : t.rows)
        {
                e.events.push_back({static_cast<std::int64_t>(r[cc]), r[cf], r[ct]});
        }
        return e;
}
}
