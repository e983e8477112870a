#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptfolio::strategy {

inline constexpr double kTradingDays = 252.0;

/// +1 / -1 / 0 by the strict sign of a forecast; NaN counts as 0.
int signal(double forecast);

/// 1/2 + 1/(2k) * sum(sign indicators), k = forecasts.size().
double holding_weight(std::span<const double> forecasts);

enum class KStar { three_k, six_k };
std::string_view to_string(KStar kstar);
KStar parse_kstar(std::string_view text);
int kstar_value(KStar kstar, int k);

struct CasWeights {
    double equity = 0.5;
    double vix = 0.0;
};

/// Equity weight 1/2 + (1/2k) * #up-signals, VIX weight #up-signals / k*.
CasWeights cas_weights(std::span<const double> forecasts, int k, int kstar);

/// Simple returns; out[0] is NaN.
std::vector<double> simple_returns(std::span<const double> prices);

/// pi_{t+1} = w_t * (P_{t+1} - P_t) / P_t; out[0] is NaN, NaN weights give NaN.
/// Throws DataError when lengths differ.
std::vector<double> pnl(std::span<const double> weights, std::span<const double> prices);

enum class MddMode { cumulative, literal };

struct Metrics {
    std::optional<double> sr;  ///< nullopt when the standard deviation vanishes
    double anr = 0.0;
    double mdd = 0.0;
    std::size_t n = 0;
};

double annualised_return(std::span<const double> pnl);
/// sqrt(252) * mean / sample sd (n - 1 divisor).
std::optional<double> sharpe_ratio(std::span<const double> pnl);
/// Cumulative mode: deepest W_t / max W - 1 on W_t = prod(1 + pi). Literal
/// mode: min_t (1 + pi_t) / max_{tau<=t}(1 + pi_tau) - 1.
double max_drawdown(std::span<const double> pnl, MddMode mode = MddMode::cumulative);
/// Throws std::invalid_argument for fewer than two observations.
Metrics metrics(std::span<const double> pnl, MddMode mode = MddMode::cumulative);

/// Orders two Sharpe ratios with undefined below every finite value.
bool sharpe_greater(const std::optional<double>& a, const std::optional<double>& b);

enum class LegRole { primary, hedge };

struct Leg {
    std::string asset;
    LegRole role = LegRole::primary;
    std::vector<double> weight;  ///< calendar-aligned, NaN before the record begins
};

struct StrategyId {
    std::string asset;
    int horizon = 0;
    std::string method;  ///< dms, ae, fixed, cas-3k, benchmark, daa-capped, ...
    std::string config;  ///< loss configuration label or model spec id

    [[nodiscard]] std::string str() const;
};

/// Holdings and P&L of one strategy on the shared calendar.
struct StrategyRecord {
    StrategyId id;
    std::size_t begin = 0;  ///< first day with a holding weight
    std::vector<Leg> legs;
    std::vector<double> pnl;  ///< pnl[t] from weights at t-1; NaN for t <= begin
    std::size_t missing_signals = 0;

    [[nodiscard]] std::size_t days() const { return pnl.size(); }
    /// Total weight of legs with the role on day t.
    [[nodiscard]] double exposure(LegRole role, std::size_t t) const;
    /// P&L for days first+1..last, i.e. the range's second day onwards.
    /// Throws std::out_of_range when first precedes begin or last is past the end.
    [[nodiscard]] std::span<const double> pnl_range(std::size_t first, std::size_t last) const;
};

using PriceBook = std::map<std::string, std::span<const double>, std::less<>>;

/// w_t from the k adapted forecasts made at t-k+1..t; NaN before begin. Missing
/// forecasts contribute 0 and are counted into `missing`.
std::vector<double> weights_from_forecasts(std::span<const double> forecasts_by_origin, int k,
                                           std::size_t begin, std::size_t* missing = nullptr);

/// Long-only record on `asset` driven by origin-indexed forecasts.
StrategyRecord long_only_record(StrategyId id, std::span<const double> forecasts_by_origin, int k,
                                std::size_t begin, std::span<const double> prices);

/// Cross-asset record: equity leg plus VIX hedge leg sized by k*.
StrategyRecord cas_record(StrategyId id, std::span<const double> forecasts_by_origin, int k, int kstar,
                          std::size_t begin, std::span<const double> equity_prices,
                          const std::string& vix_asset, std::span<const double> vix_prices);

enum class BenchmarkKind { constant_half_equal, always_hedged };

/// constant_half_equal: 0.5 on every asset, portfolio-averaged (0.5/n each).
/// always_hedged: 0.5 on assets[0] plus 1/6 on `hedge_asset`.
std::vector<Leg> benchmark_weights(BenchmarkKind kind, std::span<const std::string> assets, std::size_t days,
                                   std::size_t begin, const std::string& hedge_asset = "vix");

/// Record holding the benchmark legs; P&L is the mean of 0.5-weighted asset
/// returns (constant_half_equal) or the two-leg sum (always_hedged).
StrategyRecord benchmark_record(BenchmarkKind kind, std::span<const std::string> assets, const PriceBook& prices,
                                std::size_t begin, const std::string& hedge_asset = "vix");

/// Equal-weight portfolio of records: P&L is the mean of member P&L and each
/// asset's weight is the mean of member exposures to it.
StrategyRecord average_records(std::span<const StrategyRecord* const> members, StrategyId id);

} // namespace adaptfolio::strategy
