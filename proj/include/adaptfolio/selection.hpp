#pragma once

#include "adaptfolio/forecast_store.hpp"
#include "adaptfolio/loss.hpp"
#include "adaptfolio/models.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adaptfolio::selection {

enum class Method { dms, ae, fixed };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

/// Everything needed to reconstruct one selection decision at day t.
struct SelectionTrace {
    std::size_t t = 0;
    Method method = Method::dms;
    /// DMS winner, or the candidate with the largest AE weight (lowest index on ties).
    std::optional<std::size_t> chosen;
    /// AE weights delta_t as (candidate, weight), ascending by candidate; empty for DMS.
    std::vector<std::pair<std::size_t, double>> weights;
    /// Per-candidate loss at t (NaN = incomparable); filled only when recorded.
    std::vector<double> losses;
    double forecast = 0.0;
    bool fallback = false;
    /// AE sub-windows in which no candidate was comparable.
    int failed_subproblems = 0;
};

/// DMS decision from a ranking at t: the best-ranked candidate that has a
/// forecast y-hat_{t+k|t}; the fallback forecast when there is none.
SelectionTrace select_dms(std::span<const loss::RankedCandidate> ranking, const ForecastStore& store,
                          std::size_t t, int k, double fallback_forecast);

/// Ranking over the v1-window ending at tau.
using RankingProvider = std::function<const std::vector<loss::RankedCandidate>&(std::size_t tau)>;

/// AE decision: for each tau in t-v0+1..t the best-ranked candidate with a
/// forecast at t receives 1/v0; sub-windows without a comparable candidate are
/// dropped and the remaining weights renormalised. Forecast = <delta_t, y-hat^M>.
SelectionTrace select_ae(const RankingProvider& rankings, const ForecastStore& store, std::size_t t, int k,
                         int v0, double fallback_forecast);

/// Algorithm-level entry points working straight off the store.
SelectionTrace dms_step(const ForecastStore& store, const SeriesView& actual, std::size_t t,
                        const loss::LossConfig& cfg, double fallback_forecast);
/// cfg.window is ignored; sub-window losses use v1.
SelectionTrace ae_step(const ForecastStore& store, const SeriesView& actual, std::size_t t,
                       const loss::LossConfig& cfg, int v0, int v1, double fallback_forecast);

/// One (method, family, lambda, p) run configuration.
struct SelectionConfig {
    Method method = Method::dms;
    loss::LossFamily family = loss::LossFamily::single;
    double lambda = 1.0;
    double power = 2.0;

    [[nodiscard]] std::string label() const;
};

struct WalkForwardOptions {
    int horizon = 1;       ///< k; forecasts y-hat_{t+j|t} are stored for j = 1..k
    int v = 100;
    int v0 = 50;
    int v1 = 50;
    std::size_t first = 0; ///< first decision day
    std::size_t last = 0;  ///< last decision day (inclusive)
    bool record_losses = false;
};

/// First admissible decision day: max window + v + K.
std::size_t burn_in_index(int max_window, int v, int max_horizon);

struct WalkForwardResult {
    ForecastStore store;
    std::size_t sweep_start = 0;
    /// traces[c][i] is the decision of configuration c on day first + i.
    std::vector<std::vector<SelectionTrace>> traces;
};

/// Runs every configuration in lockstep over [first, last]. Each step sweeps
/// the model zoo at t, appends the forecasts, extends the loss tables with the
/// targets dated t, and then decides. Throws ConfigError when first precedes
/// the burn-in or a configuration is invalid.
WalkForwardResult walk_forward(const models::ModelInputs& inputs, std::span<const models::ModelSpec> specs,
                               std::span<const SelectionConfig> configs, const WalkForwardOptions& options);

/// Forecast of the fallback model (AR(0) on the largest window) at t.
double fallback_forecast(const models::ModelInputs& inputs, std::span<const models::ModelSpec> specs,
                         std::size_t t, int horizon);

/// Origin-indexed adapted forecasts y-hat_{t+k|t}; NaN outside the traced days.
std::vector<double> forecast_series(std::span<const SelectionTrace> traces, std::size_t days);

/// Origin-indexed forecasts of one candidate at horizon k straight from the store.
std::vector<double> candidate_series(const ForecastStore& store, std::size_t candidate, int k);

} // namespace adaptfolio::selection
