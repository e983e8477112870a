#pragma once

#include "adaptfolio/daa.hpp"
#include "adaptfolio/frame.hpp"
#include "adaptfolio/models.hpp"
#include "adaptfolio/selection.hpp"
#include "adaptfolio/strategy.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace adaptfolio::exports {

/// Shortest round-trip decimal text; empty for NaN.
std::string format_number(double value);

/// `date,weight,weight_vix,pnl,cum_wealth` for days [first, last]. The first
/// row carries no P&L and wealth 1.
void write_strategy_csv(const strategy::StrategyRecord& record, const TradingCalendar& calendar,
                        std::size_t first, std::size_t last, const std::filesystem::path& path);

/// `date,<asset>...,pnl` with per-asset composite exposures.
void write_asset_weights_csv(const strategy::StrategyRecord& record, const TradingCalendar& calendar,
                             std::size_t first, std::size_t last, const std::filesystem::path& path);

/// `{sr, anr, mdd, n_days, first_date, last_date}` for the P&L over (first, last].
std::string metrics_json(const strategy::StrategyRecord& record, const TradingCalendar& calendar,
                         std::size_t first, std::size_t last, strategy::MddMode mode);

/// `date,method,chosen_spec_or_topweight,model_class,window,forecast`.
void write_trace_csv(std::span<const selection::SelectionTrace> traces, std::span<const models::ModelSpec> specs,
                     const TradingCalendar& calendar, const std::filesystem::path& path);

/// AE weight mass per window size and per model class, one row per day.
void write_group_weights_csv(std::span<const selection::SelectionTrace> traces,
                             std::span<const models::ModelSpec> specs, const TradingCalendar& calendar,
                             const std::filesystem::path& path);

/// `date,spec_id,loss` for traces recorded with losses.
void write_loss_dump(std::span<const selection::SelectionTrace> traces, std::span<const models::ModelSpec> specs,
                     const TradingCalendar& calendar, const std::filesystem::path& path);

/// `quarter_end,strategy_id,asset,k,method,sr_trailing,selected`.
void write_allocation_csv(const daa::DaaResult& result, std::span<const strategy::StrategyRecord> universe,
                          const TradingCalendar& calendar, const std::filesystem::path& path);

} // namespace adaptfolio::exports
