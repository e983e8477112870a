#include "adaptfolio/errors.hpp"
#include "adaptfolio/ingest.hpp"
#include "adaptfolio/runner.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

using namespace adaptfolio;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    fs::path dir;
    TimeSeriesFrame frame;
    ExperimentConfig config;
};

Fixture make_fixture(const std::string& name, std::size_t days = 420) {
    Fixture f;
    f.dir = testsupport::fresh_dir(name);
    testsupport::MarketOptions opt;
    opt.days = days;
    f.frame = testsupport::synthetic_market(opt);
    ingest::write_frame_csv(f.frame, f.dir / "frame.csv");
    f.config = testsupport::small_config(f.frame, f.dir / "frame.csv", f.dir / "out");
    return f;
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

strategy::StrategyRecord record_with(std::vector<double> pnl) {
    strategy::StrategyRecord r;
    r.begin = 0;
    r.pnl = std::move(pnl);
    return r;
}

} // namespace

TEST_CASE("validation pick") {
    const double nan = kMissing;
    std::vector<strategy::StrategyRecord> one{record_with({nan, 0.01, 0.02, -0.01})};
    CHECK(runner::validate_select(one, 0, 3) == 0u);
    std::vector<strategy::StrategyRecord> two{record_with({nan, 0.01, 0.03, -0.01, 0.0}),
                                              record_with({nan, 0.02, 0.03, 0.01, 0.02})};
    CHECK(runner::validate_select(two, 0, 4) == 1u);
    std::vector<strategy::StrategyRecord> tie{two[1], two[1]};
    CHECK(runner::validate_select(tie, 0, 4) == 0u);
    std::vector<strategy::StrategyRecord> flat{record_with({nan, 0, 0, 0})};
    CHECK_FALSE(runner::validate_select(flat, 0, 3).has_value());
}

TEST_CASE("ex post pipeline in memory") {
    auto f = make_fixture("runner-pipeline");
    const auto r = runner::run_pipeline(f.config, f.frame);
    CHECK(r.burn_in == 44 + 20 + 2);
    CHECK(r.first_weight == r.burn_in + 1);
    CHECK(r.test_first == 221);
    CHECK(r.test_last == 419);
    REQUIRE(r.groups.size() == 2);
    for (const auto& g : r.groups) {
        CHECK(g.configs.size() == 2u * 2u * 2u * 2u);
        CHECK(g.adaptive.size() == g.configs.size());
        CHECK(g.fixed.size() == r.specs.size());
        CHECK(g.choices.size() == 2);
        for (const auto& ch : g.choices) {
            CHECK(ch.traces.size() == 420 - r.first_decision);
            CHECK(g.configs[ch.config].method == ch.method);
        }
        for (const auto& rec : g.adaptive) {
            CHECK(rec.begin == r.first_weight);
            for (std::size_t t = r.first_weight + 1; t < 420; ++t) CHECK_FALSE(std::isnan(rec.pnl[t]));
        }
        REQUIRE(g.selected_fixed.has_value());
    }
    std::vector<std::string> ids;
    for (const auto& p : r.portfolios) ids.push_back(p.id.str());
    CHECK(std::find(ids.begin(), ids.end(), "portfolio/dms") != ids.end());
    CHECK(std::find(ids.begin(), ids.end(), "portfolio/ae") != ids.end());
    CHECK(std::find(ids.begin(), ids.end(), "portfolio/fixed") != ids.end());
    CHECK(std::find(ids.begin(), ids.end(), "portfolio/benchmark") != ids.end());
}

TEST_CASE("validation choices maximise the validation Sharpe ratio") {
    auto f = make_fixture("runner-choice");
    const auto r = runner::run_pipeline(f.config, f.frame);
    for (const auto& g : r.groups) {
        for (const auto& ch : g.choices) {
            if (ch.defaulted) continue;
            for (std::size_t i = 0; i < g.adaptive.size(); ++i) {
                if (g.configs[i].method != ch.method) continue;
                const auto sr = strategy::sharpe_ratio(g.adaptive[i].pnl_range(r.validation_first, r.validation_last));
                CHECK_FALSE(strategy::sharpe_greater(sr, ch.validation_sr));
            }
        }
    }
}

TEST_CASE("fixed-only runs produce no selection traces") {
    auto f = make_fixture("runner-fixed");
    f.config.methods = {selection::Method::fixed};
    const auto r = runner::run_pipeline(f.config, f.frame);
    for (const auto& g : r.groups) {
        CHECK(g.choices.empty());
        CHECK(g.adaptive.empty());
        CHECK(g.selected_fixed.has_value());
    }
}

TEST_CASE("experiment writes a reproducible output tree") {
    auto f = make_fixture("runner-export");
    f.config.dump_losses = true;
    const auto m1 = runner::run_experiment(f.config, "backtest");
    const fs::path root = f.dir / "out" / "backtest";
    CHECK(fs::exists(root / "manifest.json"));
    CHECK(fs::exists(root / "metrics.json"));
    CHECK(fs::exists(root / "selection.json"));
    CHECK(fs::exists(root / "strategies/spx_k1_dms.csv"));
    CHECK(fs::exists(root / "strategies/spx_k2_ae.csv"));
    CHECK(fs::exists(root / "strategies/spx_k2_fixed.csv"));
    CHECK(fs::exists(root / "traces/spx_k1_ae.csv"));
    CHECK(fs::exists(root / "interpretation/spx_k1_dms.csv"));
    CHECK(fs::exists(root / "losses/spx_k1_dms.csv"));
    CHECK(fs::exists(root / "portfolios/portfolio_dms.csv"));
    CHECK(fs::exists(root / "portfolios/portfolio_dms_assets.csv"));

    const auto strategy_csv = testsupport::read_file(root / "strategies/spx_k1_dms.csv");
    CHECK(count_lines(strategy_csv) == 1 + (419 - 221 + 1));

    CHECK(m1.burn_in_index == 66);
    CHECK(m1.first_tradable_date == f.frame.calendar()[67].iso());
    CHECK(m1.data_digests.size() == 1);
    CHECK(m1.data_digests[0].second == runner::sha256_file(f.dir / "frame.csv"));
    for (const auto& [file, digest] : m1.outputs) CHECK(runner::sha256_file(root / file) == digest);

    const auto text1 = testsupport::read_file(root / "manifest.json");
    const auto parsed = runner::RunManifest::from_json(text1);
    CHECK(parsed.to_json() == text1);
    CHECK_THROWS_AS(runner::RunManifest::from_json("{\"command\": 3}"), DataError);

    const auto metrics = nlohmann::json::parse(testsupport::read_file(root / "metrics.json"));
    CHECK(metrics.contains("portfolio/dms"));
    CHECK(metrics["portfolio/dms"]["n_days"] == 419 - 221);

    const auto m2 = runner::run_experiment(f.config, "backtest");
    CHECK(testsupport::read_file(root / "manifest.json") == text1);
    CHECK(m2.outputs == m1.outputs);
}

TEST_CASE("ex ante allocation run") {
    auto f = make_fixture("runner-ex-ante", 620);
    f.config.mode = RunMode::ex_ante;
    f.config.methods = {selection::Method::dms, selection::Method::ae};
    f.config.cas_enabled = true;
    f.config.cas_assets = {"spx"};
    const auto r = runner::run_pipeline(f.config, f.frame);
    REQUIRE(r.daa.size() == 2);
    CHECK(r.daa_universe.size() == 2u * 16u);
    for (const auto& [cap, res] : r.daa) {
        REQUIRE_FALSE(res.plans.empty());
        const auto q1 = res.plans.front().quarter_end;
        CHECK(q1 + 1 >= r.first_weight + 1 + 252);
        CHECK(r.allocation_first == std::max(r.test_first, q1));
        for (const auto& plan : res.plans) CHECK(plan.selected.size() <= 2u);
    }
    CHECK(r.daa_benchmark.has_value());
    REQUIRE(r.cas.size() == 2);
    for (const auto& c : r.cas) {
        for (const auto& u : c.universe) {
            REQUIRE(u.legs.size() == 2);
            CHECK(u.legs[1].asset == "vix");
        }
    }
    CHECK(r.cas_baselines.size() == 3);

    const auto m = runner::run_experiment(f.config, "daa");
    const fs::path root = f.dir / "out" / "daa";
    CHECK(fs::exists(root / "daa/capped/composite.csv"));
    CHECK(fs::exists(root / "daa/uncapped/allocation.csv"));
    CHECK(fs::exists(root / "cas/spx/6k/composite.csv"));
    CHECK(m.outputs.size() > 5);
}

TEST_CASE("configuration problems surface as configuration errors") {
    auto f = make_fixture("runner-errors");
    auto c = f.config;
    c.test_start = f.frame.calendar()[50];
    c.validation_start = f.frame.calendar()[10];
    c.validation_end = f.frame.calendar()[40];
    CHECK_THROWS_AS(runner::run_pipeline(c, f.frame), ConfigError);
    c = f.config;
    c.windows = {22, 400};
    CHECK_THROWS_AS(runner::run_pipeline(c, f.frame), ConfigError);
    c = f.config;
    c.frame = f.dir / "absent.csv";
    CHECK_THROWS_AS(runner::run_experiment(c), DataError);
}
