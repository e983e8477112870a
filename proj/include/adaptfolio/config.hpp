#pragma once

#include "adaptfolio/daa.hpp"
#include "adaptfolio/date.hpp"
#include "adaptfolio/loss.hpp"
#include "adaptfolio/selection.hpp"
#include "adaptfolio/strategy.hpp"
#include "adaptfolio/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace adaptfolio {

enum class RunMode { ex_post, ex_ante };

std::string_view to_string(RunMode mode);

/// Full description of one experiment. Defaults: K = 5, v = 100, v0 = v1 = 50,
/// five windows, AR lags 0..5, nine lambdas, three powers.
struct ExperimentConfig {
    // [data], [prices], [curves]
    std::optional<std::filesystem::path> frame;
    std::vector<std::pair<std::string, std::filesystem::path>> prices;
    std::vector<std::pair<CurveKind, std::filesystem::path>> curves;
    bool curve_forward_fill = false;

    // [model]
    int horizons = 5;
    std::vector<int> windows{22, 44, 63, 126, 252};
    int max_lag = 5;
    /// Curves used by classes 2 and 3; defaults to every loaded curve.
    std::vector<CurveKind> model_curves;

    // [loss]
    std::vector<loss::LossFamily> families{loss::LossFamily::single, loss::LossFamily::multi};
    std::vector<double> lambdas{0.8, 0.85, 0.9, 0.95, 0.96, 0.97, 0.98, 0.99, 1.0};
    std::vector<double> powers{1.0, 1.5, 2.0};
    int v = 100;
    int v0 = 50;
    int v1 = 50;

    // [run]
    std::vector<std::string> assets;
    std::vector<selection::Method> methods{selection::Method::dms, selection::Method::ae,
                                           selection::Method::fixed};
    RunMode mode = RunMode::ex_post;
    Date validation_start;
    Date validation_end;
    Date test_start;
    Date test_end;
    strategy::MddMode mdd = strategy::MddMode::cumulative;
    bool dump_losses = false;

    // [daa]
    std::vector<daa::CapMode> caps{daa::CapMode::capped, daa::CapMode::uncapped};
    std::vector<std::string> daa_assets;

    // [cas]
    bool cas_enabled = false;
    std::vector<std::string> cas_assets;
    std::vector<strategy::KStar> kstars{strategy::KStar::three_k, strategy::KStar::six_k};
    std::string vix_asset = "vix";

    // [output]
    std::filesystem::path output_dir = "out";

    /// Adaptive-method subset of `methods`.
    [[nodiscard]] std::vector<selection::Method> adaptive_methods() const;
    [[nodiscard]] bool runs_fixed() const;
    /// Every (method, family, lambda, p) in grid order: method, family, lambda, p.
    [[nodiscard]] std::vector<selection::SelectionConfig> selection_grid() const;
    /// Assets that need forecasts for the chosen mode.
    [[nodiscard]] std::vector<std::string> traded_assets() const;

    /// Throws ConfigError on violated invariants (v = v0 + v1, ranges, ...).
    void validate() const;
    /// Canonical key=value rendering used for hashing.
    [[nodiscard]] std::string canonical() const;
};

/// Parses the INI text. Relative paths resolve against `base_dir`. Unknown
/// sections or keys are errors.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

/// Reads and parses a config file; throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace adaptfolio
