#include "adaptfolio/loss.hpp"

#include "adaptfolio/errors.hpp"

#include <algorithm>
#include <cmath>

namespace adaptfolio::loss {

namespace {

struct WindowSum {
    double value = 0.0;
    std::size_t evaluable = 0;
};

// Local term for target tau; nullopt when nothing is evaluable.
std::optional<double> local_term(const ForecastStore& store, double actual, std::size_t candidate, std::size_t tau,
                                 LossFamily family, double power, int k) {
    if (std::isnan(actual)) return std::nullopt;
    if (family == LossFamily::single) {
        const auto f = store.for_target(candidate, tau, k);
        if (!f) return std::nullopt;
        return std::pow(std::abs(*f - actual), power);
    }
    double acc = 0.0;
    bool any = false;
    for (int j = 1; j <= k; ++j) {
        const auto f = store.for_target(candidate, tau, j);
        if (!f) continue;
        acc += std::pow(std::abs(*f - actual), power);
        any = true;
    }
    if (!any) return std::nullopt;
    return acc;
}

std::optional<double> windowed_loss(const ForecastStore& store, const SeriesView& actual, std::size_t candidate,
                                    std::size_t t, const LossConfig& cfg, LossFamily family) {
    cfg.validate();
    if (t > actual.limit()) {
        throw LookAheadError("loss evaluated past the decision index");
    }
    const auto v = static_cast<std::size_t>(cfg.window);
    const std::size_t start = t + 1 >= v ? t + 1 - v : 0;
    WindowSum sum;
    for (std::size_t tau = start; tau <= t; ++tau) {
        const auto term = local_term(store, actual[tau], candidate, tau, family, cfg.power, cfg.horizon);
        if (!term) continue;
        sum.value += std::pow(cfg.lambda, static_cast<double>(t - tau)) * *term;
        ++sum.evaluable;
    }
    if (!comparable(sum.evaluable, cfg.window)) return std::nullopt;
    return sum.value;
}

} // namespace

std::string_view to_string(LossFamily family) { return family == LossFamily::single ? "single" : "multi"; }

LossFamily parse_family(std::string_view text) {
    if (text == "single") return LossFamily::single;
    if (text == "multi") return LossFamily::multi;
    throw ConfigError("unknown loss family '" + std::string(text) + "' (expected single or multi)");
}

void LossConfig::validate() const {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
    if (!(power > 0.0) || !std::isfinite(power)) throw ConfigError("p must be positive and finite");
    if (window < 1) throw ConfigError("loss window v must be >= 1");
    if (horizon < 1) throw ConfigError("horizon k must be >= 1");
}

std::optional<double> single_valued_loss(const ForecastStore& store, const SeriesView& actual, std::size_t candidate,
                                         std::size_t t, const LossConfig& cfg) {
    return windowed_loss(store, actual, candidate, t, cfg, LossFamily::single);
}

std::optional<double> multi_valued_loss(const ForecastStore& store, const SeriesView& actual, std::size_t candidate,
                                        std::size_t t, const LossConfig& cfg) {
    return windowed_loss(store, actual, candidate, t, cfg, LossFamily::multi);
}

std::optional<double> evaluate_loss(const ForecastStore& store, const SeriesView& actual, std::size_t candidate,
                                    std::size_t t, const LossConfig& cfg) {
    return windowed_loss(store, actual, candidate, t, cfg, cfg.family);
}

std::vector<RankedCandidate> rank_candidates(std::span<const std::optional<double>> losses) {
    std::vector<RankedCandidate> ranked;
    ranked.reserve(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (losses[i] && !std::isnan(*losses[i])) ranked.push_back({i, *losses[i]});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedCandidate& a, const RankedCandidate& b) { return a.loss < b.loss; });
    return ranked;
}

std::vector<RankedCandidate> rank_candidates(const ForecastStore& store, const SeriesView& actual, std::size_t t,
                                             const LossConfig& cfg) {
    std::vector<std::optional<double>> losses(store.candidates());
    for (std::size_t m = 0; m < store.candidates(); ++m) losses[m] = evaluate_loss(store, actual, m, t, cfg);
    return rank_candidates(losses);
}

std::vector<double> discount_powers(double lambda, int window) {
    std::vector<double> out(static_cast<std::size_t>(std::max(window, 0)));
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = std::pow(lambda, static_cast<double>(s));
    return out;
}

LocalLossTable::LocalLossTable(std::size_t candidates, std::size_t days, LossFamily family, double power, int horizon)
    : candidates_(candidates), days_(days), family_(family), power_(power), horizon_(horizon),
      terms_(candidates * days, 0.0), evaluable_(candidates * (days + 1), 0) {}

void LocalLossTable::extend(const ForecastStore& store, const SeriesView& actual) {
    const std::size_t until = std::min(actual.limit() + 1, days_);
    for (std::size_t tau = extent_; tau < until; ++tau) {
        const double y = actual[tau];
        for (std::size_t m = 0; m < candidates_; ++m) {
            const auto term = local_term(store, y, m, tau, family_, power_, horizon_);
            terms_[m * days_ + tau] = term.value_or(0.0);
            const auto base = m * (days_ + 1);
            evaluable_[base + tau + 1] = evaluable_[base + tau] + (term ? 1U : 0U);
        }
    }
    extent_ = std::max(extent_, until);
}

std::optional<double> LocalLossTable::loss(std::size_t candidate, std::size_t t,
                                           std::span<const double> discounts) const {
    if (t >= extent_) {
        throw LookAheadError("loss table has not reached index " + std::to_string(t));
    }
    const std::size_t v = discounts.size();
    const std::size_t start = t + 1 >= v ? t + 1 - v : 0;
    const auto base = candidate * (days_ + 1);
    const std::size_t evaluable = evaluable_[base + t + 1] - evaluable_[base + start];
    if (!comparable(evaluable, static_cast<int>(v))) return std::nullopt;
    const double* terms = terms_.data() + candidate * days_;
    double sum = 0.0;
    for (std::size_t tau = start; tau <= t; ++tau) {
        sum += discounts[t - tau] * terms[tau];
    }
    return sum;
}

} // namespace adaptfolio::loss
