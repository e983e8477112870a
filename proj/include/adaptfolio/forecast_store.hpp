#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace adaptfolio {

/// Every forecast y-hat_{target|origin} of every candidate, for horizons
/// 1..max_horizon, on a fixed calendar of `days` trading days. Keys are
/// (candidate, origin, horizon) with target = origin + horizon. Append-only:
/// each key may be written once, either with a value or with a no-forecast
/// marker.
class ForecastStore {
public:
    ForecastStore() = default;
    ForecastStore(std::size_t candidates, std::size_t days, int max_horizon);

    [[nodiscard]] std::size_t candidates() const { return candidates_; }
    [[nodiscard]] std::size_t days() const { return days_; }
    [[nodiscard]] int max_horizon() const { return max_horizon_; }

    /// nullopt value stores the no-forecast marker. Throws std::logic_error if
    /// the key was already written, std::out_of_range on bad coordinates.
    void append(std::size_t candidate, std::size_t origin, int horizon, std::optional<double> value);

    [[nodiscard]] bool contains(std::size_t candidate, std::size_t origin, int horizon) const;
    /// nullopt for both "never written" and "written as marker".
    [[nodiscard]] std::optional<double> at(std::size_t candidate, std::size_t origin, int horizon) const;
    /// y-hat_{target|target-horizon}; nullopt when the origin would precede day 0.
    [[nodiscard]] std::optional<double> for_target(std::size_t candidate, std::size_t target, int horizon) const;
    /// (y-hat_{target|target-1}, ..., y-hat_{target|target-k}), missing entries as NaN.
    [[nodiscard]] std::vector<double> target_vector(std::size_t candidate, std::size_t target, int k) const;

    /// True once any entry has been written for this origin.
    [[nodiscard]] bool has_origin(std::size_t origin) const;
    [[nodiscard]] std::size_t entries() const { return entries_; }

private:
    [[nodiscard]] std::size_t offset(std::size_t candidate, std::size_t origin, int horizon) const;

    std::size_t candidates_ = 0;
    std::size_t days_ = 0;
    int max_horizon_ = 0;
    std::size_t entries_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> written_;
    std::vector<std::uint8_t> origin_seen_;
};

} // namespace adaptfolio
