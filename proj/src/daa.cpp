#include "adaptfolio/daa.hpp"

#include "adaptfolio/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adaptfolio::daa {

using strategy::LegRole;
using strategy::StrategyRecord;

std::string_view to_string(CapMode mode) { return mode == CapMode::capped ? "capped" : "uncapped"; }

CapMode parse_cap_mode(std::string_view text) {
    if (text == "capped") return CapMode::capped;
    if (text == "uncapped") return CapMode::uncapped;
    throw ConfigError("unknown cap mode '" + std::string(text) + "' (expected capped or uncapped)");
}

namespace {

bool is_quarter_end(const TradingCalendar& calendar, std::size_t i) {
    const auto ymd = calendar[i].ymd();
    const unsigned month = static_cast<unsigned>(ymd.month());
    if (month % 3 != 0) return false;
    if (i + 1 >= calendar.size()) return true;
    return calendar[i + 1].ymd().month() != ymd.month();
}

} // namespace

QuarterSchedule quarter_schedule(const TradingCalendar& calendar, std::size_t history_start, std::size_t test_first,
                                 std::size_t test_last) {
    if (test_last >= calendar.size() || test_first > test_last || test_first == 0) {
        throw ConfigError("test period outside the calendar");
    }
    QuarterSchedule out;
    out.end = test_last;
    for (std::size_t i = test_first - 1; i < test_last; ++i) {
        if (i < history_start || i - history_start + 1 < kTrailingDays) continue;
        if (is_quarter_end(calendar, i)) out.evaluations.push_back(i);
    }
    return out;
}

std::optional<double> trailing_sharpe(std::span<const double> pnl, std::size_t q, std::size_t length) {
    if (length < 2 || q >= pnl.size() || q + 1 < length) return std::nullopt;
    const auto window = pnl.subspan(q + 1 - length, length);
    if (std::any_of(window.begin(), window.end(), [](double x) { return std::isnan(x); })) return std::nullopt;
    return strategy::sharpe_ratio(window);
}

std::vector<std::size_t> select_uncapped(std::span<const std::optional<double>> scores, std::size_t n) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *scores[a] > *scores[b]; });
    if (order.size() > n) order.resize(n);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::vector<std::size_t>> select_capped(std::span<const std::optional<double>> scores,
                                                    std::span<const std::size_t> asset_of, std::size_t asset_count,
                                                    std::size_t per_asset) {
    if (asset_of.size() != scores.size()) throw std::invalid_argument("asset map does not match the scores");
    std::vector<std::vector<std::size_t>> out(asset_count);
    for (std::size_t a = 0; a < asset_count; ++a) {
        std::vector<std::optional<double>> masked(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (asset_of[i] == a) masked[i] = scores[i];
        }
        out[a] = select_uncapped(masked, per_asset);
    }
    return out;
}

namespace {

struct LegAccumulator {
    std::vector<strategy::Leg> legs;
    std::size_t days = 0;

    strategy::Leg& leg(const std::string& asset, LegRole role) {
        auto it = std::find_if(legs.begin(), legs.end(),
                               [&](const strategy::Leg& l) { return l.asset == asset && l.role == role; });
        if (it != legs.end()) return *it;
        legs.push_back({asset, role, std::vector<double>(days, kMissing)});
        return legs.back();
    }

    void add(const std::string& asset, LegRole role, std::size_t t, double w) {
        auto& l = leg(asset, role);
        l.weight[t] = (std::isnan(l.weight[t]) ? 0.0 : l.weight[t]) + w;
    }
};

} // namespace

DaaResult run_daa(std::span<const StrategyRecord> records, const QuarterSchedule& schedule, CapMode mode,
                  std::span<const std::string> assets, int horizons, const strategy::PriceBook& prices,
                  strategy::StrategyId composite_id) {
    if (records.empty()) throw ConfigError("allocation universe is empty");
    if (assets.empty()) throw ConfigError("allocation needs at least one asset");
    if (horizons < 1) throw ConfigError("allocation needs a positive horizon count");
    const std::size_t days = records.front().days();
    std::vector<std::size_t> asset_of(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].days() != days) throw ConfigError("strategy records have different calendars");
        auto it = std::find(assets.begin(), assets.end(), records[i].id.asset);
        if (it == assets.end()) throw ConfigError("strategy " + records[i].id.str() + " trades an unlisted asset");
        asset_of[i] = static_cast<std::size_t>(it - assets.begin());
    }
    if (schedule.end >= days) throw ConfigError("allocation schedule runs past the calendar");

    std::vector<std::vector<double>> asset_returns(assets.size());
    for (std::size_t a = 0; a < assets.size(); ++a) {
        auto it = prices.find(assets[a]);
        if (it == prices.end()) throw DataError("no prices for asset '" + assets[a] + "'");
        if (it->second.size() != days) throw ConfigError("prices for '" + assets[a] + "' are not aligned");
        asset_returns[a] = strategy::simple_returns(it->second);
    }

    DaaResult result;
    result.assets.assign(assets.begin(), assets.end());
    result.composite.id = std::move(composite_id);
    result.composite.pnl.assign(days, kMissing);
    LegAccumulator acc{{}, days};
    if (schedule.evaluations.empty()) {
        result.composite.begin = schedule.end;
        return result;
    }
    result.composite.begin = schedule.evaluations.front();

    const std::size_t k = static_cast<std::size_t>(horizons);
    for (std::size_t j = 0; j < schedule.evaluations.size(); ++j) {
        QuarterPlan plan;
        plan.quarter_end = schedule.evaluations[j];
        plan.hold_until = j + 1 < schedule.evaluations.size() ? schedule.evaluations[j + 1] : schedule.end;
        const std::size_t q = plan.quarter_end;
        plan.scores.reserve(records.size());
        for (const auto& r : records) plan.scores.push_back(trailing_sharpe(r.pnl, q));

        // groups[g] = members averaged together; group weights sum to 1.
        std::vector<std::vector<std::size_t>> groups;
        std::vector<std::size_t> fallback_assets;
        if (mode == CapMode::uncapped) {
            plan.selected = select_uncapped(plan.scores, k * assets.size());
            if (plan.selected.empty()) {
                plan.benchmark_fallback = true;
                for (std::size_t a = 0; a < assets.size(); ++a) fallback_assets.push_back(a);
            } else {
                groups.push_back(plan.selected);
            }
        } else {
            const auto per_asset = select_capped(plan.scores, asset_of, assets.size(), k);
            for (std::size_t a = 0; a < assets.size(); ++a) {
                if (per_asset[a].empty()) {
                    fallback_assets.push_back(a);
                } else {
                    groups.push_back(per_asset[a]);
                    plan.selected.insert(plan.selected.end(), per_asset[a].begin(), per_asset[a].end());
                }
            }
            std::sort(plan.selected.begin(), plan.selected.end());
            plan.benchmark_fallback = !fallback_assets.empty();
        }
        for (std::size_t a : fallback_assets) plan.benchmark_assets.push_back(assets[a]);

        // Uncapped benchmark fallback averages over all assets; capped counts
        // each fallback asset as its own group.
        const double units = mode == CapMode::uncapped ? 1.0
                                                       : static_cast<double>(groups.size() + fallback_assets.size());
        const double fallback_share =
            mode == CapMode::uncapped ? 1.0 / static_cast<double>(fallback_assets.size() == 0 ? 1 : fallback_assets.size())
                                      : 1.0 / units;

        for (std::size_t t = q + 1; t <= plan.hold_until; ++t) {
            double total = 0.0;
            for (const auto& g : groups) {
                double sum = 0.0;
                for (std::size_t i : g) sum += records[i].pnl[t];
                total += sum / static_cast<double>(g.size()) / units;
            }
            for (std::size_t a : fallback_assets) total += fallback_share * 0.5 * asset_returns[a][t];
            result.composite.pnl[t] = total;
        }
        for (std::size_t t = q; t < plan.hold_until; ++t) {
            for (const auto& g : groups) {
                const double share = 1.0 / static_cast<double>(g.size()) / units;
                for (std::size_t i : g) {
                    for (const auto& leg : records[i].legs) acc.add(leg.asset, leg.role, t, share * leg.weight[t]);
                }
            }
            for (std::size_t a : fallback_assets) acc.add(assets[a], LegRole::primary, t, fallback_share * 0.5);
        }
        result.plans.push_back(std::move(plan));
    }
    result.composite.legs = std::move(acc.legs);
    return result;
}

} // namespace adaptfolio::daa
