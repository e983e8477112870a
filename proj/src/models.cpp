#include "adaptfolio/models.hpp"

#include "adaptfolio/errors.hpp"
#include "adaptfolio/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>

namespace adaptfolio::models {

namespace {

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// gamma_0..gamma_max_lag around `mean`, divisor w.
std::vector<double> autocovariances_about(std::span<const double> window, double mean, int max_lag) {
    const std::size_t w = window.size();
    std::vector<double> gamma(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int h = 0; h <= max_lag; ++h) {
        const auto lag = static_cast<std::size_t>(h);
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < w; ++i) {
            acc += (window[i] - mean) * (window[i + lag] - mean);
        }
        gamma[lag] = acc / static_cast<double>(w);
    }
    return gamma;
}

FittedModel ar_from_moments(double mean, std::span<const double> gamma, int p) {
    FittedModel model;
    model.spec.model_class = ModelClass::autoregressive;
    model.spec.lag = p;
    if (p == 0) {
        model.intercept = mean;
        return model;
    }
    const double gamma0 = gamma[0];
    if (!(gamma0 > 1e-12 * mean * mean) || gamma0 == 0.0) {
        model.status = FitStatus::degenerate_window;
        return model;
    }
    SmallMatrix toeplitz(p, p);
    SmallVector rhs(p);
    for (int i = 0; i < p; ++i) {
        rhs(i) = gamma[static_cast<std::size_t>(i) + 1];
        for (int j = 0; j < p; ++j) toeplitz(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
    }
    Eigen::LDLT<SmallMatrix> ldlt(toeplitz);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        model.status = FitStatus::degenerate_window;
        return model;
    }
    SmallVector phi = ldlt.solve(rhs);
    if (!phi.allFinite() || (toeplitz * phi - rhs).norm() > 1e-10 * std::max(rhs.norm(), gamma0)) {
        model.status = FitStatus::degenerate_window;
        return model;
    }
    model.coefficients.assign(phi.data(), phi.data() + p);
    model.intercept = mean * (1.0 - phi.sum());
    return model;
}

// OLS with intercept on contiguous columns; the condition check uses the
// uncentered normal matrix, the solve uses centered cross-products.
FittedModel ols_columns(std::span<const double> y, std::span<const std::span<const double>> xs) {
    FittedModel model;
    const std::size_t n = y.size();
    const auto m = static_cast<int>(xs.size());
    if (n <= xs.size() + 1) {
        model.status = FitStatus::insufficient_history;
        return model;
    }
    if (!all_finite(y) || !std::all_of(xs.begin(), xs.end(), [](auto c) { return all_finite(c); })) {
        model.status = FitStatus::missing_data;
        return model;
    }
    const double y_bar = mean_of(y);
    SmallVector x_bar(m);
    for (int j = 0; j < m; ++j) x_bar(j) = mean_of(xs[static_cast<std::size_t>(j)]);

    SmallMatrix normal(m + 1, m + 1);
    normal.setZero();
    SmallMatrix centered(m, m);
    centered.setZero();
    SmallVector cross(m);
    cross.setZero();
    normal(0, 0) = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < m; ++a) {
            const double xa = xs[static_cast<std::size_t>(a)][i];
            const double da = xa - x_bar(a);
            normal(0, a + 1) += xa;
            cross(a) += da * (y[i] - y_bar);
            for (int b = a; b < m; ++b) {
                const double xb = xs[static_cast<std::size_t>(b)][i];
                normal(a + 1, b + 1) += xa * xb;
                centered(a, b) += da * (xb - x_bar(b));
            }
        }
    }
    for (int a = 0; a <= m; ++a) {
        for (int b = 0; b < a; ++b) normal(a, b) = normal(b, a);
    }
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < a; ++b) centered(a, b) = centered(b, a);
    }

    Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(normal, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (eig.info() != Eigen::Success || !(lo > 0.0) || hi / lo > kMaxConditionNumber) {
        model.status = FitStatus::singular_design;
        return model;
    }
    Eigen::LDLT<SmallMatrix> ldlt(centered);
    SmallVector beta = ldlt.solve(cross);
    if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
        model.status = FitStatus::singular_design;
        return model;
    }
    model.coefficients.assign(beta.data(), beta.data() + m);
    model.intercept = y_bar - x_bar.dot(beta);
    return model;
}

std::string_view class_tag(ModelClass c) {
    switch (c) {
    case ModelClass::autoregressive: return "AR";
    case ModelClass::slope_regression: return "SLOPE";
    case ModelClass::short_long_regression: return "SHORTLONG";
    }
    return "?";
}

} // namespace

std::string ModelSpec::id() const {
    std::string out;
    if (model_class == ModelClass::autoregressive) {
        out = "AR(" + std::to_string(lag) + ")";
    } else {
        out = std::string(class_tag(model_class)) + "[" + std::string(to_string(curve)) + "]";
    }
    return out + "/w" + std::to_string(window);
}

ModelSpec parse_spec_id(const std::string& id) {
    static const std::regex ar(R"(AR\((\d+)\)/w(\d+))");
    static const std::regex reg(R"((SLOPE|SHORTLONG)\[(vix|yield)\]/w(\d+))");
    std::smatch m;
    ModelSpec spec;
    if (std::regex_match(id, m, ar)) {
        spec.lag = std::stoi(m[1]);
        spec.window = std::stoi(m[2]);
        return spec;
    }
    if (std::regex_match(id, m, reg)) {
        spec.model_class = m[1] == "SLOPE" ? ModelClass::slope_regression : ModelClass::short_long_regression;
        spec.curve = parse_curve_kind(m[2].str());
        spec.window = std::stoi(m[3]);
        return spec;
    }
    throw ConfigError("unrecognised model spec id '" + id + "'");
}

std::vector<ModelSpec> enumerate_specs(std::span<const int> windows, int max_lag, std::span<const CurveKind> curves) {
    std::vector<ModelSpec> specs;
    for (int w : windows) {
        for (int p = 0; p <= max_lag; ++p) {
            specs.push_back({ModelClass::autoregressive, CurveKind::vix, p, w});
        }
        for (auto kind : curves) {
            specs.push_back({ModelClass::slope_regression, kind, 0, w});
            specs.push_back({ModelClass::short_long_regression, kind, 0, w});
        }
    }
    std::sort(specs.begin(), specs.end());
    specs.erase(std::unique(specs.begin(), specs.end()), specs.end());
    return specs;
}

std::string_view to_string(FitStatus status) {
    switch (status) {
    case FitStatus::ok: return "ok";
    case FitStatus::degenerate_window: return "degenerate_window";
    case FitStatus::singular_design: return "singular_design";
    case FitStatus::insufficient_history: return "insufficient_history";
    case FitStatus::missing_data: return "missing_data";
    }
    return "?";
}

std::vector<double> autocovariances(std::span<const double> window, int p) {
    if (window.empty()) throw std::invalid_argument("empty window");
    return autocovariances_about(window, mean_of(window), p);
}

FittedModel fit_ar_yule_walker(std::span<const double> window, int p) {
    if (p < 0) throw std::invalid_argument("negative AR order");
    if (window.size() <= static_cast<std::size_t>(p) || window.empty()) {
        FittedModel model;
        model.spec.lag = p;
        model.status = FitStatus::insufficient_history;
        return model;
    }
    if (!all_finite(window)) {
        FittedModel model;
        model.spec.lag = p;
        model.status = FitStatus::missing_data;
        return model;
    }
    const double mean = mean_of(window);
    auto model = ar_from_moments(mean, autocovariances_about(window, mean, p), p);
    model.spec.window = static_cast<int>(window.size());
    return model;
}

FittedModel fit_ols(const Eigen::MatrixXd& regressors, const Eigen::VectorXd& response) {
    if (regressors.rows() != response.size()) {
        throw std::invalid_argument("regressor and response lengths differ");
    }
    std::vector<std::span<const double>> cols;
    for (Eigen::Index j = 0; j < regressors.cols(); ++j) {
        cols.emplace_back(regressors.col(j).data(), static_cast<std::size_t>(regressors.rows()));
    }
    return ols_columns(std::span<const double>(response.data(), static_cast<std::size_t>(response.size())), cols);
}

const ModelInputs::Curve* ModelInputs::curve(CurveKind kind) const {
    for (const auto& c : curves) {
        if (c.kind == kind) return &c;
    }
    return nullptr;
}

ModelInputs make_inputs(const TimeSeriesFrame& frame, const std::string& asset, int k,
                        std::span<const CurveKind> curves) {
    ModelInputs inputs;
    inputs.return_horizon = k;
    inputs.target = ingest::log_return(frame.column(asset), k);
    for (auto kind : curves) {
        ModelInputs::Curve c;
        c.kind = kind;
        auto copy = [&](const std::string& name) {
            auto col = frame.column(name);
            return std::vector<double>(col.begin(), col.end());
        };
        c.slope = copy(slope_column(kind));
        c.short_level = copy(short_column(kind));
        c.long_level = copy(long_column(kind));
        inputs.curves.push_back(std::move(c));
    }
    return inputs;
}

InputsView::InputsView(const ModelInputs& inputs, std::size_t t)
    : inputs_(&inputs), t_(t), target_(inputs.target, t) {
    if (t >= inputs.size()) {
        throw std::out_of_range("decision index past the end of the inputs");
    }
}

bool InputsView::has_curve(CurveKind kind) const { return inputs_->curve(kind) != nullptr; }

SeriesView InputsView::regressor(CurveKind kind, int which) const {
    const auto* c = inputs_->curve(kind);
    if (c == nullptr) {
        throw DataError(std::string("no curve '") + std::string(to_string(kind)) + "' in model inputs");
    }
    const auto& series = which == 0 ? c->slope : (which == 1 ? c->short_level : c->long_level);
    return SeriesView{series, t_};
}

FittedModel fit_model(const ModelSpec& spec, const InputsView& view, int horizon) {
    const std::size_t t = view.decision_index();
    const auto w = static_cast<std::size_t>(spec.window);
    FittedModel model;
    if (spec.model_class == ModelClass::autoregressive) {
        if (t + 1 < w) {
            model.status = FitStatus::insufficient_history;
        } else {
            model = fit_ar_yule_walker(view.target().window(t, w), spec.lag);
        }
    } else {
        const auto lag = static_cast<std::size_t>(horizon);
        if (t + 1 < w + lag) {
            model.status = FitStatus::insufficient_history;
        } else {
            const auto y = view.target().window(t, w);
            std::vector<std::span<const double>> xs;
            if (spec.model_class == ModelClass::slope_regression) {
                xs.push_back(view.regressor(spec.curve, 0).window(t - lag, w));
            } else {
                xs.push_back(view.regressor(spec.curve, 1).window(t - lag, w));
                xs.push_back(view.regressor(spec.curve, 2).window(t - lag, w));
            }
            model = ols_columns(y, xs);
        }
    }
    model.spec = spec;
    model.fit_index = t;
    return model;
}

std::vector<double> ar_forecast_path(const FittedModel& model, std::span<const double> history, int steps) {
    const auto p = model.coefficients.size();
    if (history.size() < p) throw std::invalid_argument("AR history shorter than its order");
    std::vector<double> path(history.end() - static_cast<std::ptrdiff_t>(p), history.end());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        double next = model.intercept;
        for (std::size_t j = 0; j < p; ++j) {
            next += model.coefficients[j] * path[path.size() - 1 - j];
        }
        out.push_back(next);
        path.push_back(next);
    }
    return out;
}

std::optional<double> forecast(const FittedModel& model, const InputsView& view, int horizon) {
    if (!model.usable() || horizon < 1) return std::nullopt;
    const std::size_t t = view.decision_index();
    double value = 0.0;
    switch (model.spec.model_class) {
    case ModelClass::autoregressive: {
        const auto p = model.coefficients.size();
        if (t + 1 < p) return std::nullopt;
        std::span<const double> history;
        if (p > 0) {
            history = view.target().window(t, p);
            if (!all_finite(history)) return std::nullopt;
        }
        value = ar_forecast_path(model, history, horizon).back();
        break;
    }
    case ModelClass::slope_regression: {
        const double s = view.regressor(model.spec.curve, 0)[t];
        if (!std::isfinite(s)) return std::nullopt;
        value = model.intercept + model.coefficients.at(0) * s;
        break;
    }
    case ModelClass::short_long_regression: {
        const double s = view.regressor(model.spec.curve, 1)[t];
        const double l = view.regressor(model.spec.curve, 2)[t];
        if (!std::isfinite(s) || !std::isfinite(l)) return std::nullopt;
        value = model.intercept + model.coefficients.at(0) * s + model.coefficients.at(1) * l;
        break;
    }
    }
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::vector<SweepEntry> run_model_sweep(const ModelInputs& inputs, std::span<const ModelSpec> specs, std::size_t t,
                                        int max_horizon) {
    std::vector<SweepEntry> out;
    out.reserve(specs.size() * static_cast<std::size_t>(max_horizon));
    const InputsView view(inputs, t);

    // AR fits share autocovariances per window.
    struct Moments {
        bool ok = false;
        double mean = 0.0;
        std::vector<double> gamma;
    };
    std::map<int, Moments> moments;
    int max_lag = 0;
    for (const auto& s : specs) {
        if (s.model_class == ModelClass::autoregressive) max_lag = std::max(max_lag, s.lag);
    }

    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        if (spec.model_class == ModelClass::autoregressive) {
            const auto w = static_cast<std::size_t>(spec.window);
            auto [it, inserted] = moments.try_emplace(spec.window);
            if (inserted && t + 1 >= w) {
                const auto window = view.target().window(t, w);
                if (all_finite(window)) {
                    it->second.ok = true;
                    it->second.mean = mean_of(window);
                    it->second.gamma = autocovariances_about(window, it->second.mean, max_lag);
                }
            }
            std::optional<FittedModel> fitted;
            if (it->second.ok && w > static_cast<std::size_t>(spec.lag)) {
                fitted = ar_from_moments(it->second.mean, it->second.gamma, spec.lag);
                fitted->spec = spec;
                fitted->fit_index = t;
            }
            std::vector<double> path;
            if (fitted && fitted->usable()) {
                const auto p = static_cast<std::size_t>(spec.lag);
                std::span<const double> history;
                if (p > 0) history = view.target().window(t, p);
                if (all_finite(history)) path = ar_forecast_path(*fitted, history, max_horizon);
            }
            for (int h = 1; h <= max_horizon; ++h) {
                SweepEntry e{i, h, std::nullopt};
                if (!path.empty() && std::isfinite(path[static_cast<std::size_t>(h - 1)])) {
                    e.value = path[static_cast<std::size_t>(h - 1)];
                }
                out.push_back(e);
            }
        } else {
            for (int h = 1; h <= max_horizon; ++h) {
                const auto fitted = fit_model(spec, view, h);
                out.push_back({i, h, forecast(fitted, view, h)});
            }
        }
    }
    return out;
}

} // namespace adaptfolio::models
