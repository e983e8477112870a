#include "adaptfolio/config.hpp"
#include "adaptfolio/errors.hpp"
#include "adaptfolio/ingest.hpp"
#include "adaptfolio/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace adaptfolio;

enum Exit { ok = 0, config_error = 2, data_error = 3, runtime_error = 4 };

std::pair<std::string, std::string> split_assignment(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) return {"", arg};
    return {arg.substr(0, eq), arg.substr(eq + 1)};
}

void cmd_ingest(const std::vector<std::string>& prices, const std::vector<std::string>& curves,
                const std::string& out, bool forward_fill) {
    std::vector<TimeSeriesFrame> parts;
    for (const auto& arg : prices) {
        auto [name, path] = split_assignment(arg);
        if (name.empty()) name = std::filesystem::path(path).stem().string();
        parts.push_back(ingest::load_price_csv(path, name));
    }
    for (const auto& arg : curves) {
        const auto [name, path] = split_assignment(arg);
        if (name.empty()) throw ConfigError("--curve expects kind=<csv>, got '" + arg + "'");
        parts.push_back(ingest::load_curve_csv(path, parse_curve_kind(name), forward_fill));
    }
    const auto frame = ingest::align_inner(parts);
    ingest::write_frame_csv(frame, out);
    std::cout << "wrote " << frame.rows() << " rows x " << frame.names().size() << " columns to " << out << "\n";
}

void print_manifest(const runner::RunManifest& m, const ExperimentConfig& config) {
    std::cout << "command " << m.command << ": " << m.outputs.size() << " files in "
              << (config.output_dir / m.command).string() << " (first tradable date " << m.first_tradable_date
              << ")\n";
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void cmd_report(const std::string& manifest_path, const std::string& format) {
    const std::filesystem::path path(manifest_path);
    const auto manifest = runner::RunManifest::from_json(slurp(path));
    const auto root = path.parent_path();
    for (const auto& [file, digest] : manifest.outputs) {
        if (runner::sha256_file(root / file) != digest) throw DataError(file + " does not match its manifest digest");
    }
    nlohmann::ordered_json metrics;
    try {
        metrics = nlohmann::ordered_json::parse(slurp(root / "metrics.json"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed metrics.json: ") + e.what());
    }
    if (format == "json") {
        nlohmann::ordered_json out;
        out["command"] = manifest.command;
        out["config_hash"] = manifest.config_hash;
        out["first_tradable_date"] = manifest.first_tradable_date;
        out["metrics"] = metrics;
        std::cout << out.dump(2) << "\n";
        return;
    }
    std::cout << "strategy,sr,anr,mdd,n_days,first_date,last_date\n";
    for (const auto& [name, m] : metrics.items()) {
        auto num = [](const nlohmann::ordered_json& v) { return v.is_null() ? std::string() : v.dump(); };
        std::cout << name << ',' << num(m.at("sr")) << ',' << num(m.at("anr")) << ',' << num(m.at("mdd")) << ','
                  << m.at("n_days").get<std::size_t>() << ',' << m.at("first_date").get<std::string>() << ','
                  << m.at("last_date").get<std::string>() << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Walk-forward model selection and strategy backtesting"};
    app.require_subcommand(1);

    std::vector<std::string> prices;
    std::vector<std::string> curves;
    std::string frame_out;
    bool forward_fill = false;
    auto* ingest_cmd = app.add_subcommand("ingest", "Align price and curve CSVs into one frame file");
    ingest_cmd->add_option("--prices", prices, "date,close CSV per asset, optionally name=path")->required();
    ingest_cmd->add_option("--curve", curves, "kind=path for vix or yield curves");
    ingest_cmd->add_option("--out", frame_out, "frame CSV to write")->required();
    ingest_cmd->add_flag("--forward-fill", forward_fill, "fill a missing curve tenor from the previous day");

    std::string config_path;
    std::string method;
    auto* backtest_cmd = app.add_subcommand("backtest", "Walk-forward backtest with validation-selected settings");
    backtest_cmd->add_option("--config", config_path, "experiment config")->required();
    backtest_cmd->add_option("--method", method, "restrict to one method")
        ->check(CLI::IsMember({"dms", "ae", "fixed"}));

    std::string cap;
    auto* daa_cmd = app.add_subcommand("daa", "Quarterly dynamic allocation over all adaptive strategies");
    daa_cmd->add_option("--config", config_path, "experiment config")->required();
    daa_cmd->add_option("--cap", cap, "cap mode")->required()->check(CLI::IsMember({"capped", "uncapped"}));

    std::string kstar;
    std::string asset;
    auto* cas_cmd = app.add_subcommand("cas", "Cross-asset strategy with a VIX hedge leg");
    cas_cmd->add_option("--config", config_path, "experiment config")->required();
    cas_cmd->add_option("--kstar", kstar, "hedge divisor")->required()->check(CLI::IsMember({"3k", "6k"}));
    cas_cmd->add_option("--asset", asset, "equity asset")->required();

    std::string run_path;
    std::string format = "csv";
    auto* report_cmd = app.add_subcommand("report", "Print metrics of a finished run");
    report_cmd->add_option("--run", run_path, "manifest.json of the run")->required();
    report_cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    try {
        if (ingest_cmd->parsed()) {
            cmd_ingest(prices, curves, frame_out, forward_fill);
        } else if (report_cmd->parsed()) {
            cmd_report(run_path, format);
        } else {
            auto config = load_config(config_path);
            std::string command;
            if (backtest_cmd->parsed()) {
                command = "backtest";
                if (!method.empty()) config.methods = {selection::parse_method(method)};
                config.cas_enabled = false;
            } else if (daa_cmd->parsed()) {
                command = "daa-" + cap;
                config.mode = RunMode::ex_ante;
                config.caps = {daa::parse_cap_mode(cap)};
                config.methods = config.adaptive_methods();
                config.cas_enabled = false;
            } else {
                command = "cas-" + asset + "-" + kstar;
                config.mode = RunMode::ex_ante;
                config.caps.clear();
                config.methods = config.adaptive_methods();
                config.assets = {asset};
                config.daa_assets.clear();
                config.cas_enabled = true;
                config.cas_assets = {asset};
                config.kstars = {strategy::parse_kstar(kstar)};
            }
            const auto manifest = runner::run_experiment(config, command);
            print_manifest(manifest, config);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config_error;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return Exit::data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::runtime_error;
    }
    return Exit::ok;
}
