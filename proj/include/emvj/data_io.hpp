#pragma once

// Daily price / rate series: CSV loading, date alignment, rate conversion,
// and rolling train/eval windows.

#include "emvj/errors.hpp"
#include "emvj/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace emvj {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; nullopt on anything else.
inline std::optional<Date> parse_date(std::string_view s)
{
    s = text::trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t from, std::size_t len) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = from; i < from + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    const auto y = digits(0, 4);
    const auto m = digits(5, 2);
    const auto d = digits(8, 2);
    if (!y || !m || !d) return std::nullopt;
    const Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) return std::nullopt;
    return date;
}

inline std::string format_date(const Date& d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

enum class SeriesRole { Generic, Price };

struct DatedSeries {
    std::vector<Date> dates;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return dates.size(); }
    [[nodiscard]] bool empty() const { return dates.empty(); }

    void validate(SeriesRole role = SeriesRole::Generic) const
    {
        if (dates.size() != values.size()) throw DataError("series: dates and values differ in length");
        for (std::size_t i = 0; i < dates.size(); ++i) {
            if (i > 0 && !(dates[i - 1] < dates[i]))
                throw DataError("series: dates not strictly increasing at " + format_date(dates[i]));
            if (!std::isfinite(values[i])) throw DataError("series: non-finite value at " + format_date(dates[i]));
            if (role == SeriesRole::Price && !(values[i] > 0.0))
                throw DataError("series: non-positive price at " + format_date(dates[i]));
        }
    }

    friend bool operator==(const DatedSeries&, const DatedSeries&) = default;
};

namespace detail {

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                                const std::string& source)
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(source + ": column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace detail

/// Reads a comma-separated file with a header row. Rows are sorted by date;
/// duplicate dates are rejected.
inline DatedSeries read_csv(std::istream& in, const std::string& date_column, const std::string& value_column,
                            const std::string& source = "csv", SeriesRole role = SeriesRole::Generic)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!text::trim(line).empty()) {
            header = text::split(line);
            break;
        }
    }
    if (header.empty()) throw DataError(source + ": empty file");
    const std::size_t di = detail::column_index(header, date_column, source);
    const std::size_t vi = detail::column_index(header, value_column, source);

    std::vector<std::pair<Date, double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(line);
        const auto where = source + ":" + std::to_string(line_no) + ": ";
        if (fields.size() != header.size())
            throw DataError(where + "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        const auto date = parse_date(fields[di]);
        if (!date) throw DataError(where + "malformed date '" + fields[di] + "'");
        const auto value = text::parse_number(fields[vi]);
        if (!value || !std::isfinite(*value)) throw DataError(where + "malformed value '" + fields[vi] + "'");
        rows.emplace_back(*date, *value);
    }
    if (rows.empty()) throw DataError(source + ": no data rows");
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    DatedSeries out;
    out.dates.reserve(rows.size());
    out.values.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first == rows[i - 1].first)
            throw DataError(source + ": duplicate date " + format_date(rows[i].first));
        out.dates.push_back(rows[i].first);
        out.values.push_back(rows[i].second);
    }
    out.validate(role);
    return out;
}

inline DatedSeries load_csv(const std::string& path, const std::string& date_column, const std::string& value_column,
                            SeriesRole role = SeriesRole::Generic)
{
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    return read_csv(in, date_column, value_column, path, role);
}

inline void write_csv(std::ostream& os, const DatedSeries& s, const std::string& date_column = "date",
                      const std::string& value_column = "value")
{
    os << date_column << ',' << value_column << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) os << format_date(s.dates[i]) << ',' << text::format_number(s.values[i]) << '\n';
}

/// Both series restricted to their common dates.
inline std::pair<DatedSeries, DatedSeries> align(const DatedSeries& a, const DatedSeries& b)
{
    std::pair<DatedSeries, DatedSeries> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a.dates[i] < b.dates[j]) {
            ++i;
        } else if (b.dates[j] < a.dates[i]) {
            ++j;
        } else {
            out.first.dates.push_back(a.dates[i]);
            out.first.values.push_back(a.values[i]);
            out.second.dates.push_back(b.dates[j]);
            out.second.values.push_back(b.values[j]);
            ++i;
            ++j;
        }
    }
    if (out.first.empty()) throw DataError("align: series have no dates in common");
    return out;
}

/// Values of `s` on `dates`, carrying the last observation forward. Dates
/// before the first observation take the first observed value.
inline DatedSeries reindex_carry_forward(const DatedSeries& s, const std::vector<Date>& dates)
{
    if (s.empty()) throw DataError("reindex: empty source series");
    DatedSeries out;
    out.dates = dates;
    out.values.reserve(dates.size());
    std::size_t j = 0;
    for (const Date& d : dates) {
        while (j + 1 < s.size() && !(d < s.dates[j + 1])) ++j;
        out.values.push_back(s.values[j]);
    }
    return out;
}

/// Annualized percentage quote to a daily simple rate: quote / 100 / divisor.
inline double tbill_to_daily_rate(double quote_percent, double divisor = 252.0)
{
    detail::require(std::isfinite(quote_percent) && quote_percent > -100.0, "tbill_to_daily_rate: quote must be > -100");
    detail::require(divisor > 0.0, "tbill_to_daily_rate: divisor must be > 0");
    return quote_percent / 100.0 / divisor;
}

struct DateRange {
    Date first;
    Date last;

    [[nodiscard]] bool contains(const Date& d) const { return !(d < first) && !(last < d); }
};

inline DateRange year_span(int first_year, int last_year)
{
    using namespace std::chrono;
    return {year{first_year} / January / 1, year{last_year} / December / 31};
}

/// Observations falling inside `range`.
inline DatedSeries slice(const DatedSeries& s, const DateRange& range)
{
    DatedSeries out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (range.contains(s.dates[i])) {
            out.dates.push_back(s.dates[i]);
            out.values.push_back(s.values[i]);
        }
    }
    return out;
}

struct WindowSpec {
    int train_years = 10;
    int eval_years = 1;
};

struct RollingWindow {
    int first_year = 0;
    DateRange train;
    DateRange eval;

    [[nodiscard]] int last_year() const { return static_cast<int>(eval.last.year()); }
    [[nodiscard]] std::string label() const
    {
        return std::to_string(first_year) + "-" + std::to_string(last_year());
    }
};

/// Windows advancing one year at a time over [first_year, last_year].
inline std::vector<RollingWindow> rolling_windows(int first_year, int last_year, const WindowSpec& spec)
{
    detail::require(spec.train_years >= 1 && spec.eval_years >= 1, "rolling_windows: periods must be >= 1 year");
    const int span = spec.train_years + spec.eval_years;
    detail::require(last_year - first_year + 1 >= span, "rolling_windows: insufficient span for one window");
    std::vector<RollingWindow> out;
    for (int start = first_year; start + span - 1 <= last_year; ++start) {
        const int train_end = start + spec.train_years - 1;
        out.push_back({start, year_span(start, train_end), year_span(train_end + 1, train_end + spec.eval_years)});
    }
    return out;
}

} // namespace emvj
