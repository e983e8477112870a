#pragma once

#include "adaptfolio/date.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptfolio {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Strictly increasing list of trading dates; position t is trading day t.
class TradingCalendar {
public:
    TradingCalendar() = default;
    /// Throws DataError when dates are not strictly increasing.
    explicit TradingCalendar(std::vector<Date> dates);

    [[nodiscard]] std::size_t size() const { return dates_.size(); }
    [[nodiscard]] bool empty() const { return dates_.empty(); }
    [[nodiscard]] const Date& operator[](std::size_t i) const { return dates_[i]; }
    [[nodiscard]] const std::vector<Date>& dates() const { return dates_; }
    [[nodiscard]] std::optional<std::size_t> index_of(const Date& d) const;
    /// First index whose date is >= d, or size() if none.
    [[nodiscard]] std::size_t lower_bound(const Date& d) const;
    /// Last index whose date is <= d, or nullopt if d precedes the calendar.
    [[nodiscard]] std::optional<std::size_t> last_on_or_before(const Date& d) const;

    bool operator==(const TradingCalendar&) const = default;

private:
    std::vector<Date> dates_;
};

/// Date-indexed set of aligned real-valued columns. NaN marks a missing value.
class TimeSeriesFrame {
public:
    TimeSeriesFrame() = default;
    explicit TimeSeriesFrame(TradingCalendar calendar) : calendar_(std::move(calendar)) {}

    [[nodiscard]] const TradingCalendar& calendar() const { return calendar_; }
    [[nodiscard]] std::size_t rows() const { return calendar_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] bool has_column(const std::string& name) const;
    /// Throws DataError if the column does not exist.
    [[nodiscard]] std::span<const double> column(const std::string& name) const;
    [[nodiscard]] std::span<const double> column(std::size_t index) const { return columns_[index]; }

    /// Throws DataError on a duplicate name or a length mismatch.
    void add_column(std::string name, std::vector<double> values);

    /// Rows restricted to the given calendar positions, in the given order.
    [[nodiscard]] TimeSeriesFrame select_rows(std::span<const std::size_t> rows) const;
    /// Rows [0, end).
    [[nodiscard]] TimeSeriesFrame truncate(std::size_t end) const;

private:
    TradingCalendar calendar_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

/// Read-only window onto a series that refuses to serve values dated after
/// its decision index. Every model fit and loss evaluation goes through one.
class SeriesView {
public:
    SeriesView() = default;
    SeriesView(std::span<const double> data, std::size_t limit) : data_(data), limit_(limit) {}

    /// Throws LookAheadError if i is past the decision index.
    [[nodiscard]] double operator[](std::size_t i) const;
    [[nodiscard]] std::size_t limit() const { return limit_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }
    /// Contiguous slice [end + 1 - length, end]; throws if end is past the limit.
    [[nodiscard]] std::span<const double> window(std::size_t end, std::size_t length) const;
    /// Same data with a tighter limit.
    [[nodiscard]] SeriesView until(std::size_t limit) const;

private:
    std::span<const double> data_;
    std::size_t limit_ = 0;
};

} // namespace adaptfolio
