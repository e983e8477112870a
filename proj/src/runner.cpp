#include "adaptfolio/runner.hpp"

#include "adaptfolio/errors.hpp"
#include "adaptfolio/export.hpp"
#include "adaptfolio/ingest.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace adaptfolio::runner {

using selection::Method;
using strategy::StrategyId;
using strategy::StrategyRecord;

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(stage + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(stage + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(stage + ": " + e.what());
    }
}

void check_prices(const TimeSeriesFrame& frame, const std::string& asset) {
    const auto col = frame.column(asset);
    for (std::size_t t = 0; t < col.size(); ++t) {
        if (!(col[t] > 0.0) || !std::isfinite(col[t])) {
            throw DataError("price of '" + asset + "' on " + frame.calendar()[t].iso() + " is not positive");
        }
    }
}

} // namespace

LoadedData load_data(const ExperimentConfig& config) {
    LoadedData data;
    if (config.frame) {
        data.frame = ingest::load_csv(*config.frame, {}, {.allow_empty_cells = true});
        data.digests.emplace_back("frame", sha256_file(*config.frame));
    } else {
        std::vector<TimeSeriesFrame> parts;
        for (const auto& [asset, path] : config.prices) {
            parts.push_back(ingest::load_price_csv(path, asset));
            data.digests.emplace_back("prices." + asset, sha256_file(path));
        }
        for (const auto& [kind, path] : config.curves) {
            parts.push_back(ingest::load_curve_csv(path, kind, config.curve_forward_fill));
            data.digests.emplace_back("curves." + std::string(to_string(kind)), sha256_file(path));
        }
        data.frame = ingest::align_inner(parts);
    }
    auto needed = config.traded_assets();
    if (config.cas_enabled) needed.push_back(config.vix_asset);
    for (const auto& a : needed) check_prices(data.frame, a);
    return data;
}

std::optional<std::size_t> validate_select(std::span<const StrategyRecord> records, std::size_t first,
                                           std::size_t last) {
    std::optional<std::size_t> best;
    std::optional<double> best_sr;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto sr = strategy::sharpe_ratio(records[i].pnl_range(first, last));
        if (sr && (!best || strategy::sharpe_greater(sr, best_sr))) {
            best = i;
            best_sr = sr;
        }
    }
    return best;
}

namespace {

std::string config_tag(const selection::SelectionConfig& c) {
    const auto label = c.label();
    return label.substr(label.find('/') + 1);
}

std::vector<CurveKind> effective_curves(const ExperimentConfig& config, const TimeSeriesFrame& frame) {
    if (!config.model_curves.empty()) return config.model_curves;
    std::vector<CurveKind> out;
    for (auto kind : {CurveKind::vix, CurveKind::yield}) {
        if (frame.has_column(slope_column(kind))) out.push_back(kind);
    }
    return out;
}

struct GroupTask {
    std::string asset;
    int horizon;
};

// Runs fn(i) for i in [0, n) on a small pool; the first failure by index is rethrown.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace

PipelineResult run_pipeline(const ExperimentConfig& config, const TimeSeriesFrame& frame) {
    config.validate();
    PipelineResult out;
    out.calendar = frame.calendar();
    const auto& cal = out.calendar;
    const std::size_t days = cal.size();
    out.curves = effective_curves(config, frame);
    out.specs = models::enumerate_specs(config.windows, config.max_lag, out.curves);
    const int K = config.horizons;
    out.burn_in = selection::burn_in_index(*std::max_element(config.windows.begin(), config.windows.end()), config.v, K);
    out.first_decision = out.burn_in;
    out.first_weight = out.first_decision + static_cast<std::size_t>(K) - 1;
    if (out.first_weight + 2 >= days) {
        throw ConfigError("data has " + std::to_string(days) + " days but the burn-in alone needs " +
                          std::to_string(out.first_weight + 3));
    }
    const std::string first_tradable = cal[out.first_weight].iso();

    out.test_first = cal.lower_bound(config.test_start);
    const auto test_last = cal.last_on_or_before(config.test_end);
    if (out.test_first >= days || !test_last || *test_last <= out.test_first) {
        throw ConfigError("testing range " + config.test_start.iso() + ".." + config.test_end.iso() +
                          " holds fewer than two trading days");
    }
    out.test_last = *test_last;
    if (out.test_first <= out.first_weight) {
        throw ConfigError("test_start " + config.test_start.iso() + " is not after the first tradable date " +
                          first_tradable);
    }
    if (config.mode == RunMode::ex_post) {
        out.validation_first = cal.lower_bound(config.validation_start);
        const auto vl = cal.last_on_or_before(config.validation_end);
        if (out.validation_first < out.first_weight) {
            throw ConfigError("validation_start " + config.validation_start.iso() +
                              " precedes the first tradable date " + first_tradable);
        }
        if (!vl || *vl <= out.validation_first + 1) {
            throw ConfigError("validation range holds fewer than three trading days");
        }
        out.validation_last = *vl;
    }

    const auto grid = config.selection_grid();
    const auto assets = config.traded_assets();
    std::vector<GroupTask> tasks;
    for (const auto& a : assets) {
        for (int k = 1; k <= K; ++k) tasks.push_back({a, k});
    }
    out.groups.resize(tasks.size());

    parallel_for(tasks.size(), [&](std::size_t g) {
        const auto& task = tasks[g];
        const std::string stage = "walk-forward " + task.asset + "/k" + std::to_string(task.horizon);
        in_stage(stage, [&] {
            const auto inputs = models::make_inputs(frame, task.asset, task.horizon, out.curves);
            selection::WalkForwardOptions opts;
            opts.horizon = task.horizon;
            opts.v = config.v;
            opts.v0 = config.v0;
            opts.v1 = config.v1;
            opts.first = out.first_decision;
            opts.last = out.test_last;
            opts.record_losses = config.dump_losses && config.mode == RunMode::ex_post;
            auto wf = selection::walk_forward(inputs, out.specs, grid, opts);
            const auto prices = frame.column(task.asset);

            GroupOutput& group = out.groups[g];
            group.asset = task.asset;
            group.horizon = task.horizon;
            group.configs = grid;
            for (std::size_t c = 0; c < grid.size(); ++c) {
                group.forecasts.push_back(selection::forecast_series(wf.traces[c], days));
                group.adaptive.push_back(strategy::long_only_record(
                    {task.asset, task.horizon, std::string(selection::to_string(grid[c].method)), config_tag(grid[c])},
                    group.forecasts.back(), task.horizon, out.first_weight, prices));
            }
            if (config.runs_fixed()) {
                for (std::size_t s = 0; s < out.specs.size(); ++s) {
                    const auto series = selection::candidate_series(wf.store, s, task.horizon);
                    group.fixed.push_back(strategy::long_only_record({task.asset, task.horizon, "fixed", out.specs[s].id()},
                                                                     series, task.horizon, out.first_weight, prices));
                }
            }
            if (config.mode != RunMode::ex_post) return;

            const auto vf = out.validation_first;
            const auto vl = out.validation_last;
            for (auto m : config.adaptive_methods()) {
                std::vector<std::size_t> members;
                for (std::size_t c = 0; c < grid.size(); ++c) {
                    if (grid[c].method == m) members.push_back(c);
                }
                std::vector<StrategyRecord> subset;
                for (auto c : members) subset.push_back(group.adaptive[c]);
                MethodChoice choice;
                choice.method = m;
                if (auto best = validate_select(subset, vf, vl)) {
                    choice.config = members[*best];
                } else {
                    choice.defaulted = true;
                    choice.config = members.front();
                    for (auto c : members) {
                        if (grid[c].family == loss::LossFamily::single && grid[c].lambda == 1.0 && grid[c].power == 2.0) {
                            choice.config = c;
                            break;
                        }
                    }
                }
                choice.validation_sr = strategy::sharpe_ratio(group.adaptive[choice.config].pnl_range(vf, vl));
                choice.traces = std::move(wf.traces[choice.config]);
                group.choices.push_back(std::move(choice));
            }
            if (!group.fixed.empty()) {
                group.selected_fixed = validate_select(group.fixed, vf, vl).value_or(0);
                group.fixed_validation_sr =
                    strategy::sharpe_ratio(group.fixed[*group.selected_fixed].pnl_range(vf, vl));
            }
        });
    });

    strategy::PriceBook book;
    for (const auto& a : assets) book.emplace(a, frame.column(a));
    if (config.cas_enabled) book.emplace(config.vix_asset, frame.column(config.vix_asset));

    if (config.mode == RunMode::ex_post) {
        in_stage("portfolios", [&] {
            auto average = [&](const std::string& asset, const std::string& method,
                               const std::vector<const StrategyRecord*>& members) {
                if (!members.empty()) out.portfolios.push_back(strategy::average_records(members, {asset, 0, method, ""}));
            };
            std::vector<std::string> labels;
            for (auto m : config.adaptive_methods()) labels.emplace_back(selection::to_string(m));
            if (config.runs_fixed()) labels.emplace_back("fixed");
            for (const auto& label : labels) {
                auto pick = [&](const GroupOutput& g) -> const StrategyRecord* {
                    if (label == "fixed") return &g.fixed[*g.selected_fixed];
                    for (const auto& ch : g.choices) {
                        if (selection::to_string(ch.method) == label) return &g.adaptive[ch.config];
                    }
                    return nullptr;
                };
                std::vector<const StrategyRecord*> all;
                for (const auto& g : out.groups) {
                    if (std::find(config.assets.begin(), config.assets.end(), g.asset) != config.assets.end()) {
                        all.push_back(pick(g));
                    }
                }
                average("portfolio", label, all);
                for (const auto& a : config.assets) {
                    std::vector<const StrategyRecord*> per_asset;
                    for (const auto& g : out.groups) {
                        if (g.asset == a) per_asset.push_back(pick(g));
                    }
                    average(a, label, per_asset);
                }
            }
            out.portfolios.push_back(strategy::benchmark_record(strategy::BenchmarkKind::constant_half_equal,
                                                                config.assets, book, out.first_weight));
            out.portfolios.back().id.asset = "portfolio";
            for (const auto& a : config.assets) {
                const std::vector<std::string> one{a};
                out.portfolios.push_back(strategy::benchmark_record(strategy::BenchmarkKind::constant_half_equal, one,
                                                                    book, out.first_weight));
            }
        });
    }

    const bool allocate = config.mode == RunMode::ex_ante && !config.caps.empty();
    if (!allocate && !config.cas_enabled) return out;

    const auto schedule = daa::quarter_schedule(cal, out.first_weight + 1, out.test_first, out.test_last);
    if (schedule.evaluations.empty()) {
        throw ConfigError("no quarter end in the testing range has " + std::to_string(daa::kTrailingDays) +
                          " days of strategy history (first tradable date " + first_tradable + ")");
    }
    out.allocation_first = std::max(out.test_first, schedule.evaluations.front());

    if (allocate) {
        in_stage("allocation", [&] {
            for (const auto& g : out.groups) {
                if (std::find(config.daa_assets.begin(), config.daa_assets.end(), g.asset) == config.daa_assets.end()) {
                    continue;
                }
                out.daa_universe.insert(out.daa_universe.end(), g.adaptive.begin(), g.adaptive.end());
            }
            for (auto cap : config.caps) {
                out.daa.emplace_back(cap, daa::run_daa(out.daa_universe, schedule, cap, config.daa_assets, K, book,
                                                       {"portfolio", 0, "daa-" + std::string(daa::to_string(cap)), ""}));
            }
            out.daa_benchmark = strategy::benchmark_record(strategy::BenchmarkKind::constant_half_equal,
                                                           config.daa_assets, book, out.first_weight);
            out.daa_benchmark->id.asset = "portfolio";
        });
    }

    if (config.cas_enabled) {
        in_stage("cross-asset", [&] {
            const auto vix = frame.column(config.vix_asset);
            for (const auto& a : config.cas_assets) {
                const std::vector<std::string> one{a};
                std::vector<StrategyRecord> long_only;
                for (const auto& g : out.groups) {
                    if (g.asset == a) long_only.insert(long_only.end(), g.adaptive.begin(), g.adaptive.end());
                }
                for (auto ks : config.kstars) {
                    CasOutput cas;
                    cas.asset = a;
                    cas.kstar = ks;
                    const std::string method = "cas-" + std::string(strategy::to_string(ks));
                    for (const auto& g : out.groups) {
                        if (g.asset != a) continue;
                        for (std::size_t c = 0; c < g.configs.size(); ++c) {
                            cas.universe.push_back(strategy::cas_record(
                                {a, g.horizon, method + "/" + std::string(selection::to_string(g.configs[c].method)),
                                 config_tag(g.configs[c])},
                                g.forecasts[c], g.horizon, strategy::kstar_value(ks, g.horizon), out.first_weight,
                                frame.column(a), config.vix_asset, vix));
                        }
                    }
                    cas.result = daa::run_daa(cas.universe, schedule, daa::CapMode::uncapped, one, K, book,
                                              {a, 0, method, ""});
                    out.cas.push_back(std::move(cas));
                }
                auto plain = daa::run_daa(long_only, schedule, daa::CapMode::uncapped, one, K, book,
                                          {a, 0, "daa-long-only", ""});
                out.cas_baselines.push_back(std::move(plain.composite));
                out.cas_baselines.push_back(strategy::benchmark_record(strategy::BenchmarkKind::constant_half_equal, one,
                                                                       book, out.first_weight));
                out.cas_baselines.push_back(strategy::benchmark_record(strategy::BenchmarkKind::always_hedged, one, book,
                                                                       out.first_weight, config.vix_asset));
            }
        });
    }
    return out;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["data_digests"] = nlohmann::ordered_json::object();
    for (const auto& [name, digest] : data_digests) j["data_digests"][name] = digest;
    j["first_tradable_date"] = first_tradable_date;
    j["burn_in_index"] = burn_in_index;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [file, digest] : outputs) j["outputs"].push_back({{"file", file}, {"sha256", digest}});
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    RunManifest m;
    try {
        const auto j = nlohmann::ordered_json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        for (const auto& [name, digest] : j.at("data_digests").items()) {
            m.data_digests.emplace_back(name, digest.get<std::string>());
        }
        m.first_tradable_date = j.at("first_tradable_date").get<std::string>();
        m.burn_in_index = j.at("burn_in_index").get<std::size_t>();
        for (const auto& o : j.at("outputs")) {
            m.outputs.emplace_back(o.at("file").get<std::string>(), o.at("sha256").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

namespace {

std::string file_stem(const StrategyId& id) {
    std::string s = id.str();
    std::string out;
    for (char c : s) {
        if (c == '/') out += '_';
        else if (c == '(' || c == '[') out += '-';
        else if (c != ')' && c != ']') out += c;
    }
    return out;
}

class ExportWriter {
public:
    ExportWriter(std::filesystem::path root, const PipelineResult& result, strategy::MddMode mdd)
        : root_(std::move(root)), result_(result), mdd_(mdd) {}

    std::filesystem::path path(const std::string& rel) {
        files_.push_back(rel);
        return root_ / rel;
    }

    void strategy(const StrategyRecord& record, const std::string& rel, std::size_t first, std::size_t last) {
        exports::write_strategy_csv(record, result_.calendar, first, last, path(rel));
        metric(record.id.str(), record, first, last);
    }

    void metric(const std::string& key, const StrategyRecord& record, std::size_t first, std::size_t last) {
        metrics_[key] =
            nlohmann::ordered_json::parse(exports::metrics_json(record, result_.calendar, first, last, mdd_));
    }

    void add_json(const std::string& key, nlohmann::ordered_json value) { extra_[key] = std::move(value); }

    std::vector<std::pair<std::string, std::string>> finish() {
        {
            std::ofstream f(path("metrics.json"), std::ios::binary | std::ios::trunc);
            f << metrics_.dump(2) << "\n";
        }
        if (!extra_.empty()) {
            std::ofstream f(path("selection.json"), std::ios::binary | std::ios::trunc);
            f << extra_.dump(2) << "\n";
        }
        std::sort(files_.begin(), files_.end());
        files_.erase(std::unique(files_.begin(), files_.end()), files_.end());
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& f : files_) out.emplace_back(f, sha256_file(root_ / f));
        return out;
    }

private:
    std::filesystem::path root_;
    const PipelineResult& result_;
    strategy::MddMode mdd_;
    std::vector<std::string> files_;
    nlohmann::ordered_json metrics_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
};

void export_ex_post(ExportWriter& w, const ExperimentConfig& config, const PipelineResult& r) {
    const auto tf = r.test_first;
    const auto tl = r.test_last;
    nlohmann::ordered_json choices = nlohmann::ordered_json::array();
    for (const auto& g : r.groups) {
        const std::string group = g.asset + "_k" + std::to_string(g.horizon);
        for (const auto& ch : g.choices) {
            const auto& rec = g.adaptive[ch.config];
            const std::string m(selection::to_string(ch.method));
            w.strategy(rec, "strategies/" + group + "_" + m + ".csv", tf, tl);
            exports::write_trace_csv(ch.traces, r.specs, r.calendar, w.path("traces/" + group + "_" + m + ".csv"));
            exports::write_group_weights_csv(ch.traces, r.specs, r.calendar,
                                             w.path("interpretation/" + group + "_" + m + ".csv"));
            if (config.dump_losses) {
                exports::write_loss_dump(ch.traces, r.specs, r.calendar, w.path("losses/" + group + "_" + m + ".csv"));
            }
            choices.push_back({{"asset", g.asset},
                               {"k", g.horizon},
                               {"method", m},
                               {"config", g.configs[ch.config].label()},
                               {"validation_sr", ch.validation_sr ? nlohmann::ordered_json(*ch.validation_sr)
                                                                  : nlohmann::ordered_json(nullptr)},
                               {"defaulted", ch.defaulted}});
        }
        if (g.selected_fixed) {
            const auto& rec = g.fixed[*g.selected_fixed];
            w.strategy(rec, "strategies/" + group + "_fixed.csv", tf, tl);
            choices.push_back({{"asset", g.asset},
                               {"k", g.horizon},
                               {"method", "fixed"},
                               {"config", rec.id.config},
                               {"validation_sr", g.fixed_validation_sr ? nlohmann::ordered_json(*g.fixed_validation_sr)
                                                                       : nlohmann::ordered_json(nullptr)},
                               {"defaulted", false}});
        }
    }
    for (const auto& p : r.portfolios) {
        w.strategy(p, "portfolios/" + file_stem(p.id) + ".csv", tf, tl);
        if (p.id.asset == "portfolio") {
            exports::write_asset_weights_csv(p, r.calendar, tf, tl,
                                             w.path("portfolios/" + file_stem(p.id) + "_assets.csv"));
        }
    }
    w.add_json("choices", std::move(choices));
}

void export_allocations(ExportWriter& w, const PipelineResult& r) {
    const auto af = r.allocation_first;
    const auto tl = r.test_last;
    for (const auto& [cap, result] : r.daa) {
        const std::string dir = "daa/" + std::string(daa::to_string(cap)) + "/";
        w.strategy(result.composite, dir + "composite.csv", af, tl);
        exports::write_asset_weights_csv(result.composite, r.calendar, af, tl, w.path(dir + "asset_weights.csv"));
        exports::write_allocation_csv(result, r.daa_universe, r.calendar, w.path(dir + "allocation.csv"));
    }
    if (r.daa_benchmark) w.strategy(*r.daa_benchmark, "daa/benchmark.csv", af, tl);
    for (const auto& cas : r.cas) {
        const std::string dir = "cas/" + cas.asset + "/" + std::string(strategy::to_string(cas.kstar)) + "/";
        w.strategy(cas.result.composite, dir + "composite.csv", af, tl);
        exports::write_allocation_csv(cas.result, cas.universe, r.calendar, w.path(dir + "allocation.csv"));
    }
    for (const auto& b : r.cas_baselines) {
        w.strategy(b, "cas/" + b.id.asset + "/" + b.id.method + ".csv", af, tl);
    }
}

} // namespace

RunManifest run_experiment(const ExperimentConfig& config, const std::string& command) {
    in_stage("config", [&] { config.validate(); });
    const auto data = in_stage("load", [&] { return load_data(config); });
    const auto result = run_pipeline(config, data.frame);

    RunManifest manifest;
    manifest.command = command;
    manifest.config_hash = sha256_hex(config.canonical());
    manifest.data_digests = data.digests;
    manifest.first_tradable_date = result.calendar[result.first_weight].iso();
    manifest.burn_in_index = result.burn_in;

    const auto root = config.output_dir / command;
    in_stage("export", [&] {
        std::filesystem::create_directories(root);
        ExportWriter writer(root, result, config.mdd);
        if (config.mode == RunMode::ex_post) export_ex_post(writer, config, result);
        export_allocations(writer, result);
        manifest.outputs = writer.finish();
        std::ofstream f(root / "manifest.json", std::ios::binary | std::ios::trunc);
        f << manifest.to_json();
        if (!f) throw std::runtime_error("cannot write " + (root / "manifest.json").string());
    });
    return manifest;
}

} // namespace adaptfolio::runner
