#include "adaptfolio/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace adaptfolio {

namespace {

template <typename T>
T parse_field(std::string_view text, std::string_view whole) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("invalid date '" + std::string(whole) + "'");
    }
    return value;
}

} // namespace

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date");
    }
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw std::invalid_argument("invalid date '" + std::string(iso) + "', expected YYYY-MM-DD");
    }
    const int y = parse_field<int>(iso.substr(0, 4), iso);
    const auto m = parse_field<unsigned>(iso.substr(5, 2), iso);
    const auto d = parse_field<unsigned>(iso.substr(8, 2), iso);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid date '" + std::string(iso) + "'");
    }
    return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
    const auto ymd = this->ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int Date::year() const { return static_cast<int>(ymd().year()); }

int Date::quarter() const { return static_cast<int>((static_cast<unsigned>(ymd().month()) - 1) / 3 + 1); }

} // namespace adaptfolio
