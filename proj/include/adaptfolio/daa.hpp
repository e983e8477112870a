#pragma once

#include "adaptfolio/frame.hpp"
#include "adaptfolio/strategy.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptfolio::daa {

inline constexpr std::size_t kTrailingDays = 252;

enum class CapMode { capped, uncapped };
std::string_view to_string(CapMode mode);
CapMode parse_cap_mode(std::string_view text);

/// Quarter-evaluation days q_1 < ... < q_J (last trading day of Mar/Jun/Sep/Dec)
/// and the last day the final selection is held.
struct QuarterSchedule {
    std::vector<std::size_t> evaluations;
    std::size_t end = 0;
};

/// Quarter ends q with test_first - 1 <= q < test_last and q - history_start + 1 >=
/// 252 (enough P&L to score). The allocation runs over (q_1, test_last].
QuarterSchedule quarter_schedule(const TradingCalendar& calendar, std::size_t history_start,
                                 std::size_t test_first, std::size_t test_last);

/// Sharpe ratio over the 252 P&L values ending at q; nullopt when the window
/// reaches before the series or is degenerate.
std::optional<double> trailing_sharpe(std::span<const double> pnl, std::size_t q,
                                      std::size_t length = kTrailingDays);

/// Indices of the top n scores (undefined last, ties by index); only defined
/// scores are ever selected.
std::vector<std::size_t> select_uncapped(std::span<const std::optional<double>> scores, std::size_t n);

/// Top `per_asset` defined scores within each asset group; result[a] lists the
/// chosen indices for asset a.
std::vector<std::vector<std::size_t>> select_capped(std::span<const std::optional<double>> scores,
                                                    std::span<const std::size_t> asset_of,
                                                    std::size_t asset_count, std::size_t per_asset);

struct QuarterPlan {
    std::size_t quarter_end = 0;
    std::size_t hold_until = 0;  ///< last day whose P&L comes from this selection
    std::vector<std::optional<double>> scores;
    std::vector<std::size_t> selected;
    /// Uncapped: no defined score at all. Capped: assets that fell back to 0.5.
    bool benchmark_fallback = false;
    std::vector<std::string> benchmark_assets;
};

struct DaaResult {
    std::vector<QuarterPlan> plans;
    strategy::StrategyRecord composite;
    std::vector<std::string> assets;
};

/// Quarterly selection by trailing Sharpe ratio. Uncapped picks the top
/// K*|A| over the whole universe and averages them; capped picks the top K per
/// asset, averages within each asset and then across assets. Every record is
/// rescored each quarter. Throws ConfigError on calendar mismatches or
/// records whose asset is not in `assets`.
DaaResult run_daa(std::span<const strategy::StrategyRecord> records, const QuarterSchedule& schedule,
                  CapMode mode, std::span<const std::string> assets, int horizons,
                  const strategy::PriceBook& prices, strategy::StrategyId composite_id);

} // namespace adaptfolio::daa
