#include "adaptfolio/selection.hpp"

#include "adaptfolio/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

namespace adaptfolio::selection {

namespace {

std::string short_number(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

SelectionTrace fallback_trace(std::size_t t, Method method, double fallback_forecast) {
    if (!std::isfinite(fallback_forecast)) {
        throw std::runtime_error("no comparable candidate and no fallback forecast at index " + std::to_string(t));
    }
    SelectionTrace trace;
    trace.t = t;
    trace.method = method;
    trace.forecast = fallback_forecast;
    trace.fallback = true;
    return trace;
}

std::optional<std::size_t> best_available(std::span<const loss::RankedCandidate> ranking, const ForecastStore& store,
                                          std::size_t t, int k) {
    for (const auto& r : ranking) {
        if (store.at(r.candidate, t, k)) return r.candidate;
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(Method method) {
    switch (method) {
    case Method::dms: return "dms";
    case Method::ae: return "ae";
    case Method::fixed: return "fixed";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "dms") return Method::dms;
    if (text == "ae") return Method::ae;
    if (text == "fixed") return Method::fixed;
    throw ConfigError("unknown method '" + std::string(text) + "' (expected dms, ae or fixed)");
}

std::string SelectionConfig::label() const {
    return std::string(to_string(method)) + "/" + std::string(loss::to_string(family)) + "/l" + short_number(lambda) +
           "/p" + short_number(power);
}

SelectionTrace select_dms(std::span<const loss::RankedCandidate> ranking, const ForecastStore& store, std::size_t t,
                          int k, double fallback_forecast) {
    const auto winner = best_available(ranking, store, t, k);
    if (!winner) return fallback_trace(t, Method::dms, fallback_forecast);
    SelectionTrace trace;
    trace.t = t;
    trace.method = Method::dms;
    trace.chosen = *winner;
    trace.forecast = *store.at(*winner, t, k);
    return trace;
}

SelectionTrace select_ae(const RankingProvider& rankings, const ForecastStore& store, std::size_t t, int k, int v0,
                         double fallback_forecast) {
    if (v0 < 1) throw ConfigError("v0 must be >= 1");
    std::map<std::size_t, int> counts;
    int failed = 0;
    for (int back = v0 - 1; back >= 0; --back) {
        const auto offset = static_cast<std::size_t>(back);
        if (offset > t) {
            ++failed;
            continue;
        }
        const auto winner = best_available(rankings(t - offset), store, t, k);
        if (winner) {
            ++counts[*winner];
        } else {
            ++failed;
        }
    }
    const int successes = v0 - failed;
    if (successes == 0) {
        auto trace = fallback_trace(t, Method::ae, fallback_forecast);
        trace.failed_subproblems = failed;
        return trace;
    }
    SelectionTrace trace;
    trace.t = t;
    trace.method = Method::ae;
    trace.failed_subproblems = failed;
    int top = 0;
    double forecast = 0.0;
    for (const auto& [candidate, count] : counts) {
        const double weight = static_cast<double>(count) / static_cast<double>(successes);
        trace.weights.emplace_back(candidate, weight);
        forecast += weight * *store.at(candidate, t, k);
        if (count > top) {
            top = count;
            trace.chosen = candidate;
        }
    }
    trace.forecast = forecast;
    return trace;
}

SelectionTrace dms_step(const ForecastStore& store, const SeriesView& actual, std::size_t t,
                        const loss::LossConfig& cfg, double fallback_forecast) {
    std::vector<std::optional<double>> losses(store.candidates());
    for (std::size_t m = 0; m < store.candidates(); ++m) losses[m] = loss::evaluate_loss(store, actual, m, t, cfg);
    const auto ranking = loss::rank_candidates(losses);
    auto trace = select_dms(ranking, store, t, cfg.horizon, fallback_forecast);
    trace.losses.resize(losses.size());
    for (std::size_t m = 0; m < losses.size(); ++m) trace.losses[m] = losses[m].value_or(kMissing);
    return trace;
}

SelectionTrace ae_step(const ForecastStore& store, const SeriesView& actual, std::size_t t,
                       const loss::LossConfig& cfg, int v0, int v1, double fallback_forecast) {
    auto sub = cfg;
    sub.window = v1;
    std::map<std::size_t, std::vector<loss::RankedCandidate>> cache;
    const RankingProvider provider = [&](std::size_t tau) -> const std::vector<loss::RankedCandidate>& {
        auto it = cache.find(tau);
        if (it == cache.end()) {
            it = cache.emplace(tau, loss::rank_candidates(store, actual, tau, sub)).first;
        }
        return it->second;
    };
    auto trace = select_ae(provider, store, t, cfg.horizon, v0, fallback_forecast);
    trace.losses.resize(store.candidates());
    for (std::size_t m = 0; m < store.candidates(); ++m) {
        trace.losses[m] = loss::evaluate_loss(store, actual, m, t, sub).value_or(kMissing);
    }
    return trace;
}

std::size_t burn_in_index(int max_window, int v, int max_horizon) {
    return static_cast<std::size_t>(max_window) + static_cast<std::size_t>(v) + static_cast<std::size_t>(max_horizon);
}

double fallback_forecast(const models::ModelInputs& inputs, std::span<const models::ModelSpec> specs, std::size_t t,
                         int horizon) {
    int window = 0;
    for (const auto& s : specs) window = std::max(window, s.window);
    if (window == 0) window = 252;
    const models::ModelSpec spec{models::ModelClass::autoregressive, CurveKind::vix, 0, window};
    const models::InputsView view(inputs, t);
    const auto fitted = models::fit_model(spec, view, horizon);
    return models::forecast(fitted, view, horizon).value_or(kMissing);
}

WalkForwardResult walk_forward(const models::ModelInputs& inputs, std::span<const models::ModelSpec> specs,
                               std::span<const SelectionConfig> configs, const WalkForwardOptions& options) {
    const int k = options.horizon;
    if (k < 1) throw ConfigError("horizon must be >= 1");
    if (specs.empty()) throw ConfigError("empty model space");
    if (options.v < 1 || options.v0 < 1 || options.v1 < 1) throw ConfigError("v, v0 and v1 must be >= 1");
    if (options.first > options.last || options.last >= inputs.size()) {
        throw ConfigError("walk-forward range [" + std::to_string(options.first) + ", " + std::to_string(options.last) +
                          "] outside the data");
    }
    int max_window = 0;
    for (const auto& s : specs) max_window = std::max(max_window, s.window);
    const auto burn_in = burn_in_index(max_window, options.v, k);
    if (options.first < burn_in) {
        throw ConfigError("walk-forward starts at index " + std::to_string(options.first) + " before burn-in index " +
                          std::to_string(burn_in));
    }
    for (const auto& c : configs) {
        if (c.method == Method::fixed) throw ConfigError("fixed models are not a selection method");
        loss::LossConfig{c.family, c.lambda, c.power, options.v, k}.validate();
    }

    WalkForwardResult result;
    result.store = ForecastStore(specs.size(), inputs.size(), k);
    const auto lookback = static_cast<std::size_t>(options.v + k);
    result.sweep_start = options.first > lookback ? options.first - lookback : 0;
    result.traces.resize(configs.size());
    for (auto& tr : result.traces) tr.reserve(options.last - options.first + 1);

    // One loss table per distinct (family, p).
    std::vector<loss::LocalLossTable> tables;
    std::vector<std::size_t> table_of(configs.size());
    for (std::size_t c = 0; c < configs.size(); ++c) {
        auto it = std::find_if(tables.begin(), tables.end(), [&](const loss::LocalLossTable& tb) {
            return tb.family() == configs[c].family && tb.power() == configs[c].power;
        });
        if (it == tables.end()) {
            tables.emplace_back(specs.size(), inputs.size(), configs[c].family, configs[c].power, k);
            it = tables.end() - 1;
        }
        table_of[c] = static_cast<std::size_t>(it - tables.begin());
    }
    std::vector<std::vector<double>> discounts(configs.size());
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const int window = configs[c].method == Method::ae ? options.v1 : options.v;
        discounts[c] = loss::discount_powers(configs[c].lambda, window);
    }
    std::vector<std::map<std::size_t, std::vector<loss::RankedCandidate>>> ae_rankings(configs.size());

    std::vector<std::optional<double>> losses(specs.size());
    for (std::size_t t = result.sweep_start; t <= options.last; ++t) {
        for (const auto& e : models::run_model_sweep(inputs, specs, t, k)) {
            result.store.append(e.spec_index, t, e.horizon, e.value);
        }
        const SeriesView actual(inputs.target, t);
        for (auto& table : tables) table.extend(result.store, actual);
        if (t < options.first) continue;

        const double fallback = fallback_forecast(inputs, specs, t, k);
        for (std::size_t c = 0; c < configs.size(); ++c) {
            const auto& table = tables[table_of[c]];
            const auto& disc = discounts[c];
            auto rank_at = [&](std::size_t tau) {
                for (std::size_t m = 0; m < specs.size(); ++m) losses[m] = table.loss(m, tau, disc);
                return loss::rank_candidates(losses);
            };
            SelectionTrace trace;
            if (configs[c].method == Method::dms) {
                const auto ranking = rank_at(t);
                trace = select_dms(ranking, result.store, t, k, fallback);
            } else {
                auto& cache = ae_rankings[c];
                const RankingProvider provider = [&](std::size_t tau) -> const std::vector<loss::RankedCandidate>& {
                    auto it = cache.find(tau);
                    if (it == cache.end()) it = cache.emplace(tau, rank_at(tau)).first;
                    return it->second;
                };
                trace = select_ae(provider, result.store, t, k, options.v0, fallback);
                const auto keep_from = t + 2 > static_cast<std::size_t>(options.v0)
                                           ? t + 2 - static_cast<std::size_t>(options.v0)
                                           : 0;
                cache.erase(cache.begin(), cache.lower_bound(keep_from));
                if (options.record_losses) {
                    for (std::size_t m = 0; m < specs.size(); ++m) losses[m] = table.loss(m, t, disc);
                }
            }
            if (options.record_losses) {
                trace.losses.resize(specs.size());
                for (std::size_t m = 0; m < specs.size(); ++m) trace.losses[m] = losses[m].value_or(kMissing);
            }
            result.traces[c].push_back(std::move(trace));
        }
    }
    return result;
}

std::vector<double> forecast_series(std::span<const SelectionTrace> traces, std::size_t days) {
    std::vector<double> out(days, kMissing);
    for (const auto& tr : traces) {
        if (tr.t < days) out[tr.t] = tr.forecast;
    }
    return out;
}

std::vector<double> candidate_series(const ForecastStore& store, std::size_t candidate, int k) {
    std::vector<double> out(store.days(), kMissing);
    for (std::size_t o = 0; o < store.days(); ++o) {
        if (auto v = store.at(candidate, o, k)) out[o] = *v;
    }
    return out;
}

} // namespace adaptfolio::selection
