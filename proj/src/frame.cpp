#include "adaptfolio/frame.hpp"

#include "adaptfolio/errors.hpp"

#include <algorithm>

namespace adaptfolio {

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw DataError("calendar dates must be strictly increasing (at " + dates_[i].iso() + ")");
        }
    }
}

std::optional<std::size_t> TradingCalendar::index_of(const Date& d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

std::size_t TradingCalendar::lower_bound(const Date& d) const {
    return static_cast<std::size_t>(std::lower_bound(dates_.begin(), dates_.end(), d) - dates_.begin());
}

std::optional<std::size_t> TradingCalendar::last_on_or_before(const Date& d) const {
    auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin()) - 1;
}

bool TimeSeriesFrame::has_column(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::span<const double> TimeSeriesFrame::column(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw DataError("frame has no column '" + name + "'");
    }
    return columns_[static_cast<std::size_t>(it - names_.begin())];
}

void TimeSeriesFrame::add_column(std::string name, std::vector<double> values) {
    if (has_column(name)) {
        throw DataError("duplicate column '" + name + "'");
    }
    if (values.size() != calendar_.size()) {
        throw DataError("column '" + name + "' has " + std::to_string(values.size()) + " values for " +
                        std::to_string(calendar_.size()) + " dates");
    }
    names_.push_back(std::move(name));
    columns_.push_back(std::move(values));
}

TimeSeriesFrame TimeSeriesFrame::select_rows(std::span<const std::size_t> rows) const {
    std::vector<Date> dates;
    dates.reserve(rows.size());
    for (auto r : rows) dates.push_back(calendar_[r]);
    TimeSeriesFrame out{TradingCalendar{std::move(dates)}};
    for (std::size_t c = 0; c < names_.size(); ++c) {
        std::vector<double> values;
        values.reserve(rows.size());
        for (auto r : rows) values.push_back(columns_[c][r]);
        out.add_column(names_[c], std::move(values));
    }
    return out;
}

TimeSeriesFrame TimeSeriesFrame::truncate(std::size_t end) const {
    end = std::min(end, rows());
    std::vector<std::size_t> rows(end);
    for (std::size_t i = 0; i < end; ++i) rows[i] = i;
    return select_rows(rows);
}

double SeriesView::operator[](std::size_t i) const {
    if (i > limit_) {
        throw LookAheadError("read of index " + std::to_string(i) + " at decision index " + std::to_string(limit_));
    }
    return data_[i];
}

std::span<const double> SeriesView::window(std::size_t end, std::size_t length) const {
    if (end > limit_) {
        throw LookAheadError("window ending at " + std::to_string(end) + " past decision index " +
                             std::to_string(limit_));
    }
    if (length == 0 || length > end + 1 || end >= data_.size()) {
        throw std::out_of_range("window outside series");
    }
    return data_.subspan(end + 1 - length, length);
}

SeriesView SeriesView::until(std::size_t limit) const {
    if (limit > limit_) {
        throw LookAheadError("cannot widen a point-in-time view");
    }
    return SeriesView{data_, limit};
}

} // namespace adaptfolio
