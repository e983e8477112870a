#include "adaptfolio/ingest.hpp"

#include "adaptfolio/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace adaptfolio::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

struct Row {
    Date date;
    std::size_t line;
    std::vector<double> values;
};

} // namespace

TimeSeriesFrame load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema,
                         const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ": empty file");
    }
    std::string_view header_line = line;
    if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
    const auto header_cells = split(header_line);
    if (header_cells.empty() || header_cells[0] != "date") {
        throw DataError(where(path, 1) + ": header must start with 'date'");
    }
    std::vector<std::string> names(header_cells.begin() + 1, header_cells.end());
    if (!schema.empty() && names != schema) {
        std::string expected = "date";
        for (const auto& s : schema) expected += "," + s;
        throw DataError(where(path, 1) + ": header does not match expected '" + expected + "'");
    }

    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != names.size() + 1) {
            throw DataError(where(path, line_no) + ": expected " + std::to_string(names.size() + 1) + " cells, got " +
                            std::to_string(cells.size()));
        }
        Row row;
        row.line = line_no;
        try {
            row.date = Date::parse(cells[0]);
        } catch (const std::invalid_argument&) {
            throw DataError(where(path, line_no) + ": malformed date '" + std::string(cells[0]) + "'");
        }
        row.values.reserve(names.size());
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto cell = cells[c];
            if (cell.empty()) {
                if (!options.allow_empty_cells) {
                    throw DataError(where(path, line_no) + ": empty cell in column '" + names[c - 1] + "'");
                }
                row.values.push_back(kMissing);
                continue;
            }
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
                throw DataError(where(path, line_no) + ": non-numeric cell '" + std::string(cell) + "' in column '" +
                                names[c - 1] + "'");
            }
            row.values.push_back(value);
        }
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            throw DataError(where(path, rows[i].line) + ": duplicate date " + rows[i].date.iso());
        }
    }

    std::vector<Date> dates;
    dates.reserve(rows.size());
    for (const auto& r : rows) dates.push_back(r.date);
    TimeSeriesFrame frame{TradingCalendar{std::move(dates)}};
    for (std::size_t c = 0; c < names.size(); ++c) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (const auto& r : rows) values.push_back(r.values[c]);
        frame.add_column(names[c], std::move(values));
    }
    return frame;
}

TimeSeriesFrame load_price_csv(const std::filesystem::path& path, const std::string& asset) {
    const auto raw = load_csv(path, {"close"});
    const auto close = raw.column("close");
    for (std::size_t i = 0; i < close.size(); ++i) {
        if (!(close[i] > 0.0)) {
            throw DomainError(path.string() + ": non-positive close on " + raw.calendar()[i].iso());
        }
    }
    TimeSeriesFrame frame{raw.calendar()};
    frame.add_column(asset, std::vector<double>(close.begin(), close.end()));
    return frame;
}

void write_frame_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "date";
    for (const auto& n : frame.names()) out << ',' << n;
    out << '\n';
    char buf[64];
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        out << frame.calendar()[r].iso();
        for (std::size_t c = 0; c < frame.names().size(); ++c) {
            out << ',';
            const double v = frame.column(c)[r];
            if (std::isnan(v)) continue;
            auto res = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

TimeSeriesFrame align_inner(std::span<const TimeSeriesFrame> frames) {
    if (frames.empty()) {
        throw DataError("nothing to align");
    }
    std::vector<Date> common = frames[0].calendar().dates();
    for (std::size_t f = 1; f < frames.size(); ++f) {
        const auto& other = frames[f].calendar().dates();
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(next));
        common = std::move(next);
    }
    if (common.empty()) {
        throw DataError("calendars have no date in common");
    }
    TimeSeriesFrame out{TradingCalendar{common}};
    for (const auto& frame : frames) {
        std::vector<std::size_t> rows;
        rows.reserve(common.size());
        for (const auto& d : common) rows.push_back(*frame.calendar().index_of(d));
        for (std::size_t c = 0; c < frame.names().size(); ++c) {
            const auto col = frame.column(c);
            std::vector<double> values;
            values.reserve(rows.size());
            for (auto r : rows) values.push_back(col[r]);
            out.add_column(frame.names()[c], std::move(values));
        }
    }
    return out;
}

std::vector<double> log_return(std::span<const double> prices, int k) {
    if (k < 1) {
        throw DomainError("return horizon must be >= 1");
    }
    for (double p : prices) {
        if (!(p > 0.0)) throw DomainError("log return of a non-positive price");
    }
    std::vector<double> out(prices.size(), kMissing);
    const auto step = static_cast<std::size_t>(k);
    for (std::size_t t = step; t < prices.size(); ++t) {
        out[t] = std::log(prices[t]) - std::log(prices[t - step]);
    }
    return out;
}

void CurveSnapshot::validate() const {
    if (maturities.size() != levels.size()) {
        throw DomainError("curve snapshot has mismatched maturities and levels");
    }
    if (maturities.size() < 2) {
        throw DomainError("curve snapshot needs at least two tenors");
    }
    for (std::size_t j = 1; j < maturities.size(); ++j) {
        if (!(maturities[j - 1] < maturities[j])) throw DomainError("curve maturities must strictly increase");
    }
}

double estimate_slope(const CurveSnapshot& snapshot) {
    snapshot.validate();
    const auto n = static_cast<double>(snapshot.maturities.size());
    const double m_bar = std::accumulate(snapshot.maturities.begin(), snapshot.maturities.end(), 0.0) / n;
    const double p_bar = std::accumulate(snapshot.levels.begin(), snapshot.levels.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t j = 0; j < snapshot.maturities.size(); ++j) {
        const double dm = snapshot.maturities[j] - m_bar;
        sxy += dm * (snapshot.levels[j] - p_bar);
        sxx += dm * dm;
    }
    if (!(sxx > 0.0)) {
        throw DomainError("zero maturity variance");
    }
    return sxy / sxx;
}

std::pair<double, double> short_long_split(const CurveSnapshot& snapshot, CurveKind kind) {
    snapshot.validate();
    const double threshold = short_end_threshold(kind);
    double short_sum = 0.0;
    double long_sum = 0.0;
    std::size_t short_n = 0;
    std::size_t long_n = 0;
    for (std::size_t j = 0; j < snapshot.maturities.size(); ++j) {
        if (snapshot.maturities[j] <= threshold) {
            short_sum += snapshot.levels[j];
            ++short_n;
        } else {
            long_sum += snapshot.levels[j];
            ++long_n;
        }
    }
    if (short_n == 0 || long_n == 0) {
        throw DomainError("curve has no tenor on one side of the short/long threshold");
    }
    return {short_sum / static_cast<double>(short_n), long_sum / static_cast<double>(long_n)};
}

double parse_maturity(const std::string& token) {
    if (token.size() < 2 || token[0] != 'm') {
        throw DataError("curve column '" + token + "' is not of the form m<months>");
    }
    double months = 0.0;
    const char* first = token.data() + 1;
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, months);
    if (ec != std::errc{} || ptr != last || months < 0.0) {
        throw DataError("curve column '" + token + "' has an invalid maturity");
    }
    return months;
}

TimeSeriesFrame curve_features(const TimeSeriesFrame& wide, CurveKind kind, bool forward_fill) {
    std::vector<double> maturities;
    for (const auto& name : wide.names()) maturities.push_back(parse_maturity(name));
    const std::size_t tenors = maturities.size();

    std::vector<std::vector<double>> cols(tenors);
    for (std::size_t j = 0; j < tenors; ++j) {
        auto c = wide.column(j);
        cols[j].assign(c.begin(), c.end());
        if (forward_fill) {
            for (std::size_t r = 1; r < cols[j].size(); ++r) {
                if (std::isnan(cols[j][r])) cols[j][r] = cols[j][r - 1];
            }
        }
    }

    // Tenor order in the file need not be sorted.
    std::vector<std::size_t> order(tenors);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return maturities[a] < maturities[b]; });

    std::vector<std::size_t> kept;
    std::vector<double> slope;
    std::vector<double> short_level;
    std::vector<double> long_level;
    for (std::size_t r = 0; r < wide.rows(); ++r) {
        CurveSnapshot snap;
        bool complete = true;
        for (auto j : order) {
            if (std::isnan(cols[j][r])) {
                complete = false;
                break;
            }
            snap.maturities.push_back(maturities[j]);
            snap.levels.push_back(cols[j][r]);
        }
        if (!complete) continue;
        kept.push_back(r);
        slope.push_back(estimate_slope(snap));
        auto [s, l] = short_long_split(snap, kind);
        short_level.push_back(s);
        long_level.push_back(l);
    }
    if (kept.empty()) {
        throw DataError(std::string("curve '") + std::string(to_string(kind)) + "' has no complete row");
    }
    std::vector<Date> dates;
    for (auto r : kept) dates.push_back(wide.calendar()[r]);
    TimeSeriesFrame out{TradingCalendar{std::move(dates)}};
    out.add_column(slope_column(kind), std::move(slope));
    out.add_column(short_column(kind), std::move(short_level));
    out.add_column(long_column(kind), std::move(long_level));
    return out;
}

TimeSeriesFrame load_curve_csv(const std::filesystem::path& path, CurveKind kind, bool forward_fill) {
    const auto wide = load_csv(path, {}, CsvOptions{.allow_empty_cells = true});
    try {
        return curve_features(wide, kind, forward_fill);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace adaptfolio::ingest
