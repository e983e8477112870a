#include "adaptfolio/strategy.hpp"

#include "adaptfolio/errors.hpp"
#include "adaptfolio/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace adaptfolio::strategy {

int signal(double forecast) {
    if (forecast > 0.0) return 1;
    if (forecast < 0.0) return -1;
    return 0;
}

double holding_weight(std::span<const double> forecasts) {
    if (forecasts.empty()) throw std::invalid_argument("holding weight needs at least one signal");
    int net = 0;
    for (double f : forecasts) net += signal(f);
    return 0.5 + static_cast<double>(net) / (2.0 * static_cast<double>(forecasts.size()));
}

std::string_view to_string(KStar kstar) { return kstar == KStar::three_k ? "3k" : "6k"; }

KStar parse_kstar(std::string_view text) {
    if (text == "3k") return KStar::three_k;
    if (text == "6k") return KStar::six_k;
    throw ConfigError("unknown k* '" + std::string(text) + "' (expected 3k or 6k)");
}

int kstar_value(KStar kstar, int k) { return (kstar == KStar::three_k ? 3 : 6) * k; }

CasWeights cas_weights(std::span<const double> forecasts, int k, int kstar) {
    if (k < 1 || kstar < 1) throw std::invalid_argument("k and k* must be positive");
    int up = 0;
    for (double f : forecasts) up += f > 0.0 ? 1 : 0;
    return {0.5 + static_cast<double>(up) / (2.0 * k), static_cast<double>(up) / kstar};
}

std::vector<double> simple_returns(std::span<const double> prices) {
    std::vector<double> out(prices.size(), kMissing);
    for (std::size_t t = 1; t < prices.size(); ++t) out[t] = (prices[t] - prices[t - 1]) / prices[t - 1];
    return out;
}

std::vector<double> pnl(std::span<const double> weights, std::span<const double> prices) {
    if (weights.size() != prices.size()) {
        throw DataError("weights and prices are not aligned (" + std::to_string(weights.size()) + " vs " +
                        std::to_string(prices.size()) + ")");
    }
    std::vector<double> out(prices.size(), kMissing);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        out[t] = weights[t - 1] * ((prices[t] - prices[t - 1]) / prices[t - 1]);
    }
    return out;
}

double annualised_return(std::span<const double> pnl) {
    if (pnl.empty()) throw std::invalid_argument("empty P&L");
    return kTradingDays * (std::accumulate(pnl.begin(), pnl.end(), 0.0) / static_cast<double>(pnl.size()));
}

std::optional<double> sharpe_ratio(std::span<const double> pnl) {
    if (pnl.size() < 2) return std::nullopt;
    const double n = static_cast<double>(pnl.size());
    const double mean = std::accumulate(pnl.begin(), pnl.end(), 0.0) / n;
    double ss = 0.0;
    double scale = 0.0;
    for (double x : pnl) {
        ss += (x - mean) * (x - mean);
        scale = std::max(scale, std::abs(x));
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 1e-10 * scale) || !std::isfinite(sd)) return std::nullopt;
    return std::sqrt(kTradingDays) * mean / sd;
}

double max_drawdown(std::span<const double> pnl, MddMode mode) {
    double worst = 0.0;
    if (mode == MddMode::cumulative) {
        double wealth = 1.0;
        double peak = 1.0;
        for (double x : pnl) {
            wealth *= 1.0 + x;
            peak = std::max(peak, wealth);
            worst = std::min(worst, wealth / peak - 1.0);
        }
    } else {
        double peak = -std::numeric_limits<double>::infinity();
        for (double x : pnl) {
            peak = std::max(peak, 1.0 + x);
            worst = std::min(worst, (1.0 + x) / peak - 1.0);
        }
    }
    return worst;
}

Metrics metrics(std::span<const double> pnl, MddMode mode) {
    if (pnl.size() < 2) throw std::invalid_argument("metrics need at least two P&L observations");
    return {sharpe_ratio(pnl), annualised_return(pnl), max_drawdown(pnl, mode), pnl.size()};
}

bool sharpe_greater(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a) return false;
    if (!b) return true;
    return *a > *b;
}

std::string StrategyId::str() const {
    std::string out = asset;
    if (horizon > 0) out += "/k" + std::to_string(horizon);
    out += "/" + method;
    if (!config.empty()) out += "/" + config;
    return out;
}

double StrategyRecord::exposure(LegRole role, std::size_t t) const {
    double total = 0.0;
    for (const auto& leg : legs) {
        if (leg.role == role && t < leg.weight.size() && !std::isnan(leg.weight[t])) total += leg.weight[t];
    }
    return total;
}

std::span<const double> StrategyRecord::pnl_range(std::size_t first, std::size_t last) const {
    if (first < begin || last >= pnl.size() || last <= first) {
        throw std::out_of_range("P&L range [" + std::to_string(first) + ", " + std::to_string(last) +
                                "] outside record " + id.str());
    }
    return std::span<const double>(pnl).subspan(first + 1, last - first);
}

std::vector<double> weights_from_forecasts(std::span<const double> forecasts_by_origin, int k, std::size_t begin,
                                           std::size_t* missing) {
    const auto kk = static_cast<std::size_t>(k);
    if (begin + 1 < kk) throw std::invalid_argument("weights need k forecasts before the first day");
    std::vector<double> out(forecasts_by_origin.size(), kMissing);
    std::vector<double> signals(kk);
    std::size_t misses = 0;
    for (std::size_t t = begin; t < forecasts_by_origin.size(); ++t) {
        for (std::size_t j = 0; j < kk; ++j) {
            signals[j] = forecasts_by_origin[t - j];
            if (std::isnan(signals[j])) ++misses;
        }
        out[t] = holding_weight(signals);
    }
    if (missing != nullptr) *missing = misses;
    return out;
}

namespace {

std::vector<double> leg_pnl(const std::vector<double>& weights, std::span<const double> prices, std::size_t begin) {
    auto out = pnl(weights, prices);
    for (std::size_t t = 0; t <= begin && t < out.size(); ++t) out[t] = kMissing;
    return out;
}

} // namespace

StrategyRecord long_only_record(StrategyId id, std::span<const double> forecasts_by_origin, int k, std::size_t begin,
                                std::span<const double> prices) {
    StrategyRecord record;
    record.id = std::move(id);
    record.begin = begin;
    auto w = weights_from_forecasts(forecasts_by_origin, k, begin, &record.missing_signals);
    record.pnl = leg_pnl(w, prices, begin);
    record.legs.push_back({record.id.asset, LegRole::primary, std::move(w)});
    return record;
}

StrategyRecord cas_record(StrategyId id, std::span<const double> forecasts_by_origin, int k, int kstar,
                          std::size_t begin, std::span<const double> equity_prices, const std::string& vix_asset,
                          std::span<const double> vix_prices) {
    const auto kk = static_cast<std::size_t>(k);
    if (begin + 1 < kk) throw std::invalid_argument("weights need k forecasts before the first day");
    const std::size_t days = forecasts_by_origin.size();
    StrategyRecord record;
    record.id = std::move(id);
    record.begin = begin;
    std::vector<double> equity(days, kMissing);
    std::vector<double> hedge(days, kMissing);
    std::vector<double> signals(kk);
    for (std::size_t t = begin; t < days; ++t) {
        for (std::size_t j = 0; j < kk; ++j) {
            signals[j] = forecasts_by_origin[t - j];
            if (std::isnan(signals[j])) ++record.missing_signals;
        }
        const auto w = cas_weights(signals, k, kstar);
        equity[t] = w.equity;
        hedge[t] = w.vix;
    }
    const auto a = leg_pnl(equity, equity_prices, begin);
    const auto b = leg_pnl(hedge, vix_prices, begin);
    record.pnl.resize(days);
    for (std::size_t t = 0; t < days; ++t) record.pnl[t] = a[t] + b[t];
    record.legs.push_back({record.id.asset, LegRole::primary, std::move(equity)});
    record.legs.push_back({vix_asset, LegRole::hedge, std::move(hedge)});
    return record;
}

std::vector<Leg> benchmark_weights(BenchmarkKind kind, std::span<const std::string> assets, std::size_t days,
                                   std::size_t begin, const std::string& hedge_asset) {
    if (assets.empty()) throw std::invalid_argument("benchmark needs at least one asset");
    auto constant = [&](double w) {
        std::vector<double> out(days, kMissing);
        for (std::size_t t = begin; t < days; ++t) out[t] = w;
        return out;
    };
    std::vector<Leg> legs;
    if (kind == BenchmarkKind::constant_half_equal) {
        const double w = 0.5 / static_cast<double>(assets.size());
        for (const auto& a : assets) legs.push_back({a, LegRole::primary, constant(w)});
    } else {
        legs.push_back({assets.front(), LegRole::primary, constant(0.5)});
        legs.push_back({hedge_asset, LegRole::hedge, constant(1.0 / 6.0)});
    }
    return legs;
}

StrategyRecord benchmark_record(BenchmarkKind kind, std::span<const std::string> assets, const PriceBook& prices,
                                std::size_t begin, const std::string& hedge_asset) {
    auto find = [&](const std::string& a) {
        auto it = prices.find(a);
        if (it == prices.end()) throw DataError("no prices for asset '" + a + "'");
        return it->second;
    };
    const std::size_t days = find(assets.front()).size();
    StrategyRecord record;
    record.begin = begin;
    record.id = {kind == BenchmarkKind::constant_half_equal ? (assets.size() == 1 ? assets.front() : "portfolio")
                                                            : assets.front(),
                 0, kind == BenchmarkKind::constant_half_equal ? "benchmark" : "benchmark-hedged", ""};
    record.legs = benchmark_weights(kind, assets, days, begin, hedge_asset);
    record.pnl.assign(days, kMissing);
    if (kind == BenchmarkKind::constant_half_equal) {
        std::vector<std::vector<double>> per_asset;
        for (const auto& a : assets) {
            per_asset.push_back(leg_pnl(std::vector<double>(days, 0.5), find(a), begin));
        }
        for (std::size_t t = begin + 1; t < days; ++t) {
            double sum = 0.0;
            for (const auto& p : per_asset) sum += p[t];
            record.pnl[t] = sum / static_cast<double>(assets.size());
        }
    } else {
        const auto a = leg_pnl(record.legs[0].weight, find(assets.front()), begin);
        const auto b = leg_pnl(record.legs[1].weight, find(hedge_asset), begin);
        for (std::size_t t = begin + 1; t < days; ++t) record.pnl[t] = a[t] + b[t];
    }
    return record;
}

StrategyRecord average_records(std::span<const StrategyRecord* const> members, StrategyId id) {
    if (members.empty()) throw std::invalid_argument("cannot average an empty set of records");
    const std::size_t days = members.front()->days();
    StrategyRecord out;
    out.id = std::move(id);
    out.begin = 0;
    for (const auto* m : members) {
        if (m->days() != days) throw DataError("records to average have different calendars");
        out.begin = std::max(out.begin, m->begin);
        out.missing_signals += m->missing_signals;
    }
    const double n = static_cast<double>(members.size());
    out.pnl.assign(days, kMissing);
    for (std::size_t t = out.begin + 1; t < days; ++t) {
        double sum = 0.0;
        for (const auto* m : members) sum += m->pnl[t];
        out.pnl[t] = sum / n;
    }
    for (const auto* m : members) {
        for (const auto& leg : m->legs) {
            auto it = std::find_if(out.legs.begin(), out.legs.end(),
                                   [&](const Leg& l) { return l.asset == leg.asset && l.role == leg.role; });
            if (it == out.legs.end()) {
                out.legs.push_back({leg.asset, leg.role, std::vector<double>(days, kMissing)});
                for (std::size_t t = out.begin; t < days; ++t) out.legs.back().weight[t] = 0.0;
                it = out.legs.end() - 1;
            }
            for (std::size_t t = out.begin; t < days; ++t) it->weight[t] += leg.weight[t] / n;
        }
    }
    return out;
}

} // namespace adaptfolio::strategy
