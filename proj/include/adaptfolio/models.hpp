#pragma once

#include "adaptfolio/frame.hpp"
#include "adaptfolio/types.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adaptfolio::models {

/// Class 1: AR(p) on returns. Class 2: returns on a lagged curve slope.
/// Class 3: returns on lagged short and long curve levels.
enum class ModelClass { autoregressive = 1, slope_regression = 2, short_long_regression = 3 };

/// One (functional form, estimation technique) pair. Specs are totally ordered
/// by (class, curve, lag, window); that order breaks every tie downstream.
struct ModelSpec {
    ModelClass model_class = ModelClass::autoregressive;
    CurveKind curve = CurveKind::vix;  ///< unused for AR
    int lag = 0;                       ///< AR order p; 0 for regressions
    int window = 22;

    [[nodiscard]] std::string id() const;
    [[nodiscard]] int class_number() const { return static_cast<int>(model_class); }
    auto operator<=>(const ModelSpec&) const = default;
};

/// Enumerates AR(0..max_lag) and, for every curve, classes 2 and 3, each at
/// every window, sorted by the total order.
std::vector<ModelSpec> enumerate_specs(std::span<const int> windows, int max_lag,
                                       std::span<const CurveKind> curves);

/// Parses the text produced by ModelSpec::id().
ModelSpec parse_spec_id(const std::string& id);

enum class FitStatus {
    ok,
    degenerate_window,    ///< zero sample variance with p >= 1
    singular_design,      ///< normal equations ill-conditioned
    insufficient_history,
    missing_data,
};

std::string_view to_string(FitStatus status);

struct FittedModel {
    ModelSpec spec;
    double intercept = 0.0;
    std::vector<double> coefficients;  ///< phi_1..phi_p, beta, or (beta_short, beta_long)
    std::size_t fit_index = 0;
    FitStatus status = FitStatus::ok;

    [[nodiscard]] bool usable() const { return status == FitStatus::ok; }
};

/// Condition number above which OLS normal equations count as singular.
inline constexpr double kMaxConditionNumber = 1e10;

/// Yule-Walker AR(p) using biased (1/w) autocovariances; the intercept makes
/// the model mean equal the window mean. Requires window.size() > p.
FittedModel fit_ar_yule_walker(std::span<const double> window, int p);

/// Sample autocovariances gamma_0..gamma_p with divisor w.
std::vector<double> autocovariances(std::span<const double> window, int p);

/// OLS of response on an intercept plus the regressor columns.
FittedModel fit_ols(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& response);

/// Point-in-time inputs for one asset and return horizon k.
struct ModelInputs {
    struct Curve {
        CurveKind kind = CurveKind::vix;
        std::vector<double> slope;
        std::vector<double> short_level;
        std::vector<double> long_level;
    };

    std::vector<double> target;  ///< y_t = r_{(t-k):t}
    std::vector<Curve> curves;
    int return_horizon = 1;      ///< k

    [[nodiscard]] std::size_t size() const { return target.size(); }
    [[nodiscard]] const Curve* curve(CurveKind kind) const;
};

/// Builds inputs from a frame holding the asset's price column and the derived
/// curve columns of every kind in `curves`.
ModelInputs make_inputs(const TimeSeriesFrame& frame, const std::string& asset, int k,
                        std::span<const CurveKind> curves);

/// The same inputs seen from decision index t: nothing after t is readable.
class InputsView {
public:
    InputsView(const ModelInputs& inputs, std::size_t t);

    [[nodiscard]] std::size_t decision_index() const { return t_; }
    [[nodiscard]] const SeriesView& target() const { return target_; }
    [[nodiscard]] SeriesView regressor(CurveKind kind, int which) const;  // 0 slope, 1 short, 2 long
    [[nodiscard]] bool has_curve(CurveKind kind) const;

private:
    const ModelInputs* inputs_;
    std::size_t t_;
    SeriesView target_;
};

/// Fits `spec` on data through t. Regressions are fitted at lag `horizon`
/// (pairs (x_{tau-horizon}, y_tau) for tau in the window ending at t); AR
/// fits ignore the horizon.
FittedModel fit_model(const ModelSpec& spec, const InputsView& view, int horizon);

/// y-hat_{t+horizon|t}; nullopt is the no-forecast marker. AR forecasts
/// iterate the fitted recursion, plugging earlier forecasts in for unknown y.
std::optional<double> forecast(const FittedModel& model, const InputsView& view, int horizon);

/// Iterated AR forecasts for steps 1..steps given the most recent values
/// (history.back() is y_t).
std::vector<double> ar_forecast_path(const FittedModel& model, std::span<const double> history, int steps);

struct SweepEntry {
    std::size_t spec_index = 0;
    int horizon = 1;
    std::optional<double> value;
};

/// Forecasts of every spec for every horizon 1..max_horizon at decision index
/// t, ordered by (spec, horizon). Per-spec failures become markers.
std::vector<SweepEntry> run_model_sweep(const ModelInputs& inputs, std::span<const ModelSpec> specs,
                                        std::size_t t, int max_horizon);

} // namespace adaptfolio::models
