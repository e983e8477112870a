#pragma once

#include "adaptfolio/forecast_store.hpp"
#include "adaptfolio/frame.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptfolio::loss {

enum class LossFamily { single, multi };

std::string_view to_string(LossFamily family);
LossFamily parse_family(std::string_view text);

/// Discounted p-power loss over the evaluation window.
struct LossConfig {
    LossFamily family = LossFamily::single;
    double lambda = 1.0;  ///< in (0, 1]
    double power = 2.0;   ///< in (0, inf)
    int window = 100;     ///< v
    int horizon = 1;      ///< k

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

/// A candidate is comparable at t only with at least v/2 evaluable terms.
[[nodiscard]] constexpr bool comparable(std::size_t evaluable_terms, int window) {
    return 2 * evaluable_terms >= static_cast<std::size_t>(window) && evaluable_terms > 0;
}

/// sum_{tau=t-v+1}^{t} lambda^{t-tau} |y-hat_{tau|tau-k} - y_tau|^p, skipping
/// terms with a missing forecast or actual. nullopt marks "incomparable".
std::optional<double> single_valued_loss(const ForecastStore& store, const SeriesView& actual,
                                         std::size_t candidate, std::size_t t, const LossConfig& cfg);

/// sum_{tau} lambda^{t-tau} || (y-hat_{tau|tau-1..tau-k}) - y_tau 1_k ||_p^p with
/// missing components skipped; a term counts as evaluable when at least one
/// component is present.
std::optional<double> multi_valued_loss(const ForecastStore& store, const SeriesView& actual,
                                        std::size_t candidate, std::size_t t, const LossConfig& cfg);

/// Dispatches on cfg.family.
std::optional<double> evaluate_loss(const ForecastStore& store, const SeriesView& actual,
                                    std::size_t candidate, std::size_t t, const LossConfig& cfg);

struct RankedCandidate {
    std::size_t candidate = 0;
    double loss = 0.0;
};

/// Ascending by loss, ties by candidate index (= spec order); incomparable
/// candidates are left out. Empty when nothing is comparable.
std::vector<RankedCandidate> rank_candidates(std::span<const std::optional<double>> losses);

std::vector<RankedCandidate> rank_candidates(const ForecastStore& store, const SeriesView& actual,
                                             std::size_t t, const LossConfig& cfg);

/// lambda^0 .. lambda^{window-1}.
std::vector<double> discount_powers(double lambda, int window);

/// Per-target local loss terms for one (family, p), extended incrementally as
/// the walk-forward clock advances. Window sums over it reproduce
/// single_valued_loss / multi_valued_loss exactly and are shared by every
/// lambda and every window length.
class LocalLossTable {
public:
    LocalLossTable(std::size_t candidates, std::size_t days, LossFamily family, double power, int horizon);

    [[nodiscard]] LossFamily family() const { return family_; }
    [[nodiscard]] double power() const { return power_; }
    /// One past the last target with computed terms.
    [[nodiscard]] std::size_t extent() const { return extent_; }

    /// Computes terms for every target <= actual.limit() not yet covered.
    void extend(const ForecastStore& store, const SeriesView& actual);

    /// Window sum ending at t over `window` targets using `discounts`
    /// (discount_powers(lambda, window)). Throws LookAheadError when t has not
    /// been reached by extend().
    [[nodiscard]] std::optional<double> loss(std::size_t candidate, std::size_t t,
                                             std::span<const double> discounts) const;

private:
    std::size_t candidates_;
    std::size_t days_;
    LossFamily family_;
    double power_;
    int horizon_;
    std::size_t extent_ = 0;
    std::vector<double> terms_;           // [candidate][target], 0 when missing
    std::vector<std::uint32_t> evaluable_; // prefix counts [candidate][target + 1]
};

} // namespace adaptfolio::loss
