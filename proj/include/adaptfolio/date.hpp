#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace adaptfolio {

/// Calendar date with day resolution, parsed from and printed as YYYY-MM-DD.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    /// Throws std::invalid_argument on anything that is not a valid ISO date.
    static Date parse(std::string_view iso);

    [[nodiscard]] std::string iso() const;
    [[nodiscard]] std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    [[nodiscard]] std::chrono::sys_days days() const { return days_; }
    [[nodiscard]] int year() const;
    /// Calendar quarter, 1..4.
    [[nodiscard]] int quarter() const;

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

} // namespace adaptfolio
