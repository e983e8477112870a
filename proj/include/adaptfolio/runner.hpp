#pragma once

#include "adaptfolio/config.hpp"
#include "adaptfolio/daa.hpp"
#include "adaptfolio/frame.hpp"
#include "adaptfolio/models.hpp"
#include "adaptfolio/selection.hpp"
#include "adaptfolio/strategy.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adaptfolio::runner {

/// Aligned input frame plus SHA-256 digests of the files behind it.
struct LoadedData {
    TimeSeriesFrame frame;
    std::vector<std::pair<std::string, std::string>> digests;
};

LoadedData load_data(const ExperimentConfig& config);

/// Index of the record with the highest Sharpe ratio over [first, last]; ties
/// go to the lower index. nullopt when no record has a defined ratio.
std::optional<std::size_t> validate_select(std::span<const strategy::StrategyRecord> records, std::size_t first,
                                           std::size_t last);

/// Validation choice for one adaptive method within a group.
struct MethodChoice {
    selection::Method method = selection::Method::dms;
    std::size_t config = 0;  ///< index into GroupOutput::configs / adaptive
    std::optional<double> validation_sr;
    bool defaulted = false;
    std::vector<selection::SelectionTrace> traces;
};

/// Forecasts, strategies and validation choice for one (asset, horizon).
struct GroupOutput {
    std::string asset;
    int horizon = 1;
    std::vector<selection::SelectionConfig> configs;
    std::vector<std::vector<double>> forecasts;      ///< per config, origin-indexed
    std::vector<strategy::StrategyRecord> adaptive;  ///< one per config
    std::vector<strategy::StrategyRecord> fixed;     ///< one per model spec
    std::vector<MethodChoice> choices;               ///< ex post only
    std::optional<std::size_t> selected_fixed;
    std::optional<double> fixed_validation_sr;
};

struct CasOutput {
    std::string asset;
    strategy::KStar kstar = strategy::KStar::six_k;
    std::vector<strategy::StrategyRecord> universe;
    daa::DaaResult result;
};

/// Everything an experiment computes, before anything is written.
struct PipelineResult {
    TradingCalendar calendar;
    std::vector<CurveKind> curves;
    std::vector<models::ModelSpec> specs;
    std::size_t burn_in = 0;
    std::size_t first_decision = 0;
    std::size_t first_weight = 0;
    std::size_t validation_first = 0;
    std::size_t validation_last = 0;
    std::size_t test_first = 0;
    std::size_t test_last = 0;
    std::vector<GroupOutput> groups;
    /// First reported day of allocation-based records (DAA and CAS).
    std::size_t allocation_first = 0;

    // ex post
    std::vector<strategy::StrategyRecord> portfolios;  ///< adaptive, fixed, benchmark, then per asset

    // ex ante
    std::vector<std::pair<daa::CapMode, daa::DaaResult>> daa;
    std::vector<strategy::StrategyRecord> daa_universe;
    std::optional<strategy::StrategyRecord> daa_benchmark;

    // cross-asset
    std::vector<CasOutput> cas;
    std::vector<strategy::StrategyRecord> cas_baselines;  ///< per asset: DAA without VIX, long only, always hedged
};

/// Runs the whole experiment in memory on an already aligned frame.
PipelineResult run_pipeline(const ExperimentConfig& config, const TimeSeriesFrame& frame);

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> data_digests;
    std::string first_tradable_date;
    std::size_t burn_in_index = 0;
    std::vector<std::pair<std::string, std::string>> outputs;  ///< relative file, sha256

    [[nodiscard]] std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

/// Loads data, runs the pipeline and writes every export plus manifest.json
/// under config.output_dir. Stage failures are rethrown with the stage name.
RunManifest run_experiment(const ExperimentConfig& config, const std::string& command = "run");

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

} // namespace adaptfolio::runner
