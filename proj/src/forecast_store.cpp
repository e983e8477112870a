#include "adaptfolio/forecast_store.hpp"

#include "adaptfolio/frame.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptfolio {

ForecastStore::ForecastStore(std::size_t candidates, std::size_t days, int max_horizon)
    : candidates_(candidates), days_(days), max_horizon_(max_horizon) {
    if (max_horizon < 1) throw std::invalid_argument("forecast store needs a horizon >= 1");
    const std::size_t n = candidates * days * static_cast<std::size_t>(max_horizon);
    values_.assign(n, kMissing);
    written_.assign(n, 0);
    origin_seen_.assign(days, 0);
}

std::size_t ForecastStore::offset(std::size_t candidate, std::size_t origin, int horizon) const {
    if (candidate >= candidates_ || origin >= days_ || horizon < 1 || horizon > max_horizon_) {
        throw std::out_of_range("forecast store key out of range (candidate " + std::to_string(candidate) +
                                ", origin " + std::to_string(origin) + ", horizon " + std::to_string(horizon) + ")");
    }
    return (candidate * days_ + origin) * static_cast<std::size_t>(max_horizon_) +
           static_cast<std::size_t>(horizon - 1);
}

void ForecastStore::append(std::size_t candidate, std::size_t origin, int horizon, std::optional<double> value) {
    const auto i = offset(candidate, origin, horizon);
    if (written_[i] != 0) {
        throw std::logic_error("forecast already stored for candidate " + std::to_string(candidate) + ", origin " +
                               std::to_string(origin) + ", horizon " + std::to_string(horizon));
    }
    written_[i] = 1;
    values_[i] = value.value_or(kMissing);
    origin_seen_[origin] = 1;
    ++entries_;
}

bool ForecastStore::contains(std::size_t candidate, std::size_t origin, int horizon) const {
    return written_[offset(candidate, origin, horizon)] != 0;
}

std::optional<double> ForecastStore::at(std::size_t candidate, std::size_t origin, int horizon) const {
    const double v = values_[offset(candidate, origin, horizon)];
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::optional<double> ForecastStore::for_target(std::size_t candidate, std::size_t target, int horizon) const {
    const auto h = static_cast<std::size_t>(horizon);
    if (target < h) return std::nullopt;
    return at(candidate, target - h, horizon);
}

std::vector<double> ForecastStore::target_vector(std::size_t candidate, std::size_t target, int k) const {
    std::vector<double> out(static_cast<std::size_t>(k), kMissing);
    for (int j = 1; j <= k; ++j) {
        if (auto v = for_target(candidate, target, j)) out[static_cast<std::size_t>(j - 1)] = *v;
    }
    return out;
}

bool ForecastStore::has_origin(std::size_t origin) const { return origin < days_ && origin_seen_[origin] != 0; }

} // namespace adaptfolio
