#include "adaptfolio/config.hpp"

#include "adaptfolio/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace adaptfolio {

namespace pt = boost::property_tree;

std::string_view to_string(RunMode mode) { return mode == RunMode::ex_post ? "ex_post" : "ex_ante"; }

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double parse_double(const std::string& text, const std::string& ctx) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError(ctx + ": '" + text + "' is not a number");
    return value;
}

int parse_int(const std::string& text, const std::string& ctx) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError(ctx + ": '" + text + "' is not an integer");
    return value;
}

bool parse_bool(const std::string& text, const std::string& ctx) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
    throw ConfigError(ctx + ": '" + text + "' is not a boolean");
}

Date parse_date(const std::string& text, const std::string& ctx) {
    try {
        return Date::parse(text);
    } catch (const std::invalid_argument&) {
        throw ConfigError(ctx + ": '" + text + "' is not a YYYY-MM-DD date");
    }
}

template <typename T, typename F>
std::vector<T> parse_each(const std::string& value, F&& f) {
    std::vector<T> out;
    for (const auto& item : split_list(value)) out.push_back(f(item));
    return out;
}

std::string fmt(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ',';
        out += f(items[i]);
    }
    return out;
}

template <typename T>
void require_unique(const std::vector<T>& items, const std::string& what) {
    auto sorted = items;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError(what + " has duplicates");
}

} // namespace

std::vector<selection::Method> ExperimentConfig::adaptive_methods() const {
    std::vector<selection::Method> out;
    for (auto m : methods) {
        if (m != selection::Method::fixed) out.push_back(m);
    }
    return out;
}

bool ExperimentConfig::runs_fixed() const {
    return std::find(methods.begin(), methods.end(), selection::Method::fixed) != methods.end();
}

std::vector<selection::SelectionConfig> ExperimentConfig::selection_grid() const {
    std::vector<selection::SelectionConfig> out;
    for (auto m : adaptive_methods()) {
        for (auto f : families) {
            for (double l : lambdas) {
                for (double p : powers) out.push_back({m, f, l, p});
            }
        }
    }
    return out;
}

std::vector<std::string> ExperimentConfig::traded_assets() const {
    std::vector<std::string> out;
    auto add = [&](const std::vector<std::string>& list) {
        for (const auto& a : list) {
            if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
        }
    };
    add(assets);
    if (mode == RunMode::ex_ante && !caps.empty()) add(daa_assets);
    if (cas_enabled) add(cas_assets);
    return out;
}

void ExperimentConfig::validate() const {
    if (!frame && prices.empty()) throw ConfigError("no data: set [data] frame or list files under [prices]");
    if (frame && (!prices.empty() || !curves.empty())) {
        throw ConfigError("[data] frame cannot be combined with [prices] or [curves]");
    }
    if (horizons < 1 || horizons > 60) throw ConfigError("[model] horizons must be in 1..60");
    if (windows.empty()) throw ConfigError("[model] windows is empty");
    for (int w : windows) {
        if (w < 8) throw ConfigError("[model] windows must be at least 8, got " + std::to_string(w));
    }
    require_unique(windows, "[model] windows");
    if (max_lag < 0 || max_lag > 5) throw ConfigError("[model] max_lag must be in 0..5");
    require_unique(model_curves, "[model] curves");
    if (families.empty()) throw ConfigError("[loss] families is empty");
    require_unique(families, "[loss] families");
    if (lambdas.empty()) throw ConfigError("[loss] lambdas is empty");
    for (double l : lambdas) {
        if (!(l > 0.0 && l <= 1.0)) throw ConfigError("[loss] lambdas must lie in (0, 1], got " + fmt(l));
    }
    require_unique(lambdas, "[loss] lambdas");
    if (powers.empty()) throw ConfigError("[loss] powers is empty");
    for (double p : powers) {
        if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("[loss] powers must be positive, got " + fmt(p));
    }
    require_unique(powers, "[loss] powers");
    if (v0 < 1 || v1 < 1) throw ConfigError("[loss] v0 and v1 must be positive");
    if (v != v0 + v1) {
        throw ConfigError("[loss] v must equal v0 + v1 (" + std::to_string(v) + " != " + std::to_string(v0) + " + " +
                          std::to_string(v1) + ")");
    }
    if (methods.empty()) throw ConfigError("[run] methods is empty");
    require_unique(methods, "[run] methods");
    if (assets.empty()) throw ConfigError("[run] assets is empty");
    require_unique(assets, "[run] assets");
    if (test_start > test_end) throw ConfigError("[run] test_start is after test_end");
    if (test_start == Date{}) throw ConfigError("[run] test_start is required");
    if (mode == RunMode::ex_post) {
        if (validation_start == Date{} || validation_end == Date{}) {
            throw ConfigError("[run] ex_post mode needs validation_start and validation_end");
        }
        if (validation_start > validation_end) throw ConfigError("[run] validation_start is after validation_end");
        if (validation_end >= test_start) throw ConfigError("[run] validation must end before test_start");
    } else {
        if (adaptive_methods().empty()) throw ConfigError("[run] ex_ante mode needs dms or ae in methods");
        if (caps.empty() && !cas_enabled) throw ConfigError("[daa] caps is empty");
        require_unique(caps, "[daa] caps");
        if (!caps.empty() && daa_assets.empty()) throw ConfigError("[daa] assets is empty");
        require_unique(daa_assets, "[daa] assets");
    }
    if (cas_enabled) {
        if (adaptive_methods().empty()) throw ConfigError("[cas] needs dms or ae in methods");
        if (cas_assets.empty()) throw ConfigError("[cas] assets is empty");
        if (kstars.empty()) throw ConfigError("[cas] kstars is empty");
        require_unique(kstars, "[cas] kstars");
        require_unique(cas_assets, "[cas] assets");
        if (std::find(cas_assets.begin(), cas_assets.end(), vix_asset) != cas_assets.end()) {
            throw ConfigError("[cas] the hedge asset cannot be hedged by itself");
        }
    }
    if (!prices.empty()) {
        auto needed = traded_assets();
        if (cas_enabled) needed.push_back(vix_asset);
        for (const auto& a : needed) {
            auto it = std::find_if(prices.begin(), prices.end(), [&](const auto& p) { return p.first == a; });
            if (it == prices.end()) throw ConfigError("no price file for asset '" + a + "'");
        }
        for (auto kind : model_curves) {
            auto it = std::find_if(curves.begin(), curves.end(), [&](const auto& c) { return c.first == kind; });
            if (it == curves.end()) throw ConfigError("[model] curves lists '" + std::string(to_string(kind)) +
                                                      "' but no file is given under [curves]");
        }
    }
}

std::string ExperimentConfig::canonical() const {
    // Data files are covered by their digests, and the output location does
    // not influence any result, so neither is hashed.
    std::ostringstream out;
    out << "data.curve_forward_fill=" << (curve_forward_fill ? "true" : "false") << '\n';
    out << "data.source=" << (frame ? "frame" : "files") << '\n';
    out << "prices=" << join(prices, [](const auto& p) { return p.first; }) << '\n';
    out << "curves=" << join(curves, [](const auto& c) { return std::string(to_string(c.first)); }) << '\n';
    out << "model.horizons=" << horizons << '\n';
    out << "model.windows=" << join(windows, [](int w) { return std::to_string(w); }) << '\n';
    out << "model.max_lag=" << max_lag << '\n';
    out << "model.curves=" << join(model_curves, [](CurveKind c) { return std::string(to_string(c)); }) << '\n';
    out << "loss.families=" << join(families, [](auto f) { return std::string(loss::to_string(f)); }) << '\n';
    out << "loss.lambdas=" << join(lambdas, fmt) << '\n';
    out << "loss.powers=" << join(powers, fmt) << '\n';
    out << "loss.v=" << v << "\nloss.v0=" << v0 << "\nloss.v1=" << v1 << '\n';
    out << "run.assets=" << join(assets, [](const std::string& a) { return a; }) << '\n';
    out << "run.methods=" << join(methods, [](auto m) { return std::string(selection::to_string(m)); }) << '\n';
    out << "run.mode=" << to_string(mode) << '\n';
    if (mode == RunMode::ex_post) {
        out << "run.validation_start=" << validation_start.iso() << '\n';
        out << "run.validation_end=" << validation_end.iso() << '\n';
    }
    out << "run.test_start=" << test_start.iso() << "\nrun.test_end=" << test_end.iso() << '\n';
    out << "run.mdd=" << (mdd == strategy::MddMode::cumulative ? "cumulative" : "literal") << '\n';
    out << "run.dump_losses=" << (dump_losses ? "true" : "false") << '\n';
    if (mode == RunMode::ex_ante) {
        out << "daa.caps=" << join(caps, [](auto c) { return std::string(daa::to_string(c)); }) << '\n';
        out << "daa.assets=" << join(daa_assets, [](const std::string& a) { return a; }) << '\n';
    }
    out << "cas.enabled=" << (cas_enabled ? "true" : "false") << '\n';
    if (cas_enabled) {
        out << "cas.assets=" << join(cas_assets, [](const std::string& a) { return a; }) << '\n';
        out << "cas.kstars=" << join(kstars, [](auto k) { return std::string(strategy::to_string(k)); }) << '\n';
        out << "cas.vix_asset=" << vix_asset << '\n';
    }
    return out.str();
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    ExperimentConfig cfg;
    bool daa_assets_set = false;
    bool cas_assets_set = false;
    bool model_curves_set = false;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + section + "' appears outside any section");
        }
        for (const auto& [key, node] : body) {
            const std::string value = trim(node.data());
            const std::string ctx = where(section, key);
            if (section == "data") {
                if (key == "frame") cfg.frame = resolve(value);
                else if (key == "curve_forward_fill") cfg.curve_forward_fill = parse_bool(value, ctx);
                else throw ConfigError("unknown key " + ctx);
            } else if (section == "prices") {
                cfg.prices.emplace_back(key, resolve(value));
            } else if (section == "curves") {
                CurveKind kind = parse_curve_kind(key);
                cfg.curves.emplace_back(kind, resolve(value));
            } else if (section == "model") {
                if (key == "horizons") cfg.horizons = parse_int(value, ctx);
                else if (key == "windows") cfg.windows = parse_each<int>(value, [&](const std::string& s) { return parse_int(s, ctx); });
                else if (key == "max_lag") cfg.max_lag = parse_int(value, ctx);
                else if (key == "curves") {
                    cfg.model_curves = parse_each<CurveKind>(value, [](const std::string& s) { return parse_curve_kind(s); });
                    model_curves_set = true;
                } else throw ConfigError("unknown key " + ctx);
            } else if (section == "loss") {
                if (key == "families") cfg.families = parse_each<loss::LossFamily>(value, [](const std::string& s) { return loss::parse_family(s); });
                else if (key == "lambdas") cfg.lambdas = parse_each<double>(value, [&](const std::string& s) { return parse_double(s, ctx); });
                else if (key == "powers") cfg.powers = parse_each<double>(value, [&](const std::string& s) { return parse_double(s, ctx); });
                else if (key == "v") cfg.v = parse_int(value, ctx);
                else if (key == "v0") cfg.v0 = parse_int(value, ctx);
                else if (key == "v1") cfg.v1 = parse_int(value, ctx);
                else throw ConfigError("unknown key " + ctx);
            } else if (section == "run") {
                if (key == "assets") cfg.assets = split_list(value);
                else if (key == "methods") cfg.methods = parse_each<selection::Method>(value, [](const std::string& s) { return selection::parse_method(s); });
                else if (key == "mode") {
                    if (value == "ex_post") cfg.mode = RunMode::ex_post;
                    else if (value == "ex_ante") cfg.mode = RunMode::ex_ante;
                    else throw ConfigError(ctx + ": expected ex_post or ex_ante, got '" + value + "'");
                } else if (key == "validation_start") cfg.validation_start = parse_date(value, ctx);
                else if (key == "validation_end") cfg.validation_end = parse_date(value, ctx);
                else if (key == "test_start") cfg.test_start = parse_date(value, ctx);
                else if (key == "test_end") cfg.test_end = parse_date(value, ctx);
                else if (key == "mdd") {
                    if (value == "cumulative") cfg.mdd = strategy::MddMode::cumulative;
                    else if (value == "literal") cfg.mdd = strategy::MddMode::literal;
                    else throw ConfigError(ctx + ": expected cumulative or literal, got '" + value + "'");
                } else if (key == "dump_losses") cfg.dump_losses = parse_bool(value, ctx);
                else throw ConfigError("unknown key " + ctx);
            } else if (section == "daa") {
                if (key == "caps") cfg.caps = parse_each<daa::CapMode>(value, [](const std::string& s) { return daa::parse_cap_mode(s); });
                else if (key == "assets") {
                    cfg.daa_assets = split_list(value);
                    daa_assets_set = true;
                } else throw ConfigError("unknown key " + ctx);
            } else if (section == "cas") {
                if (key == "enabled") cfg.cas_enabled = parse_bool(value, ctx);
                else if (key == "assets") {
                    cfg.cas_assets = split_list(value);
                    cas_assets_set = true;
                } else if (key == "kstars") cfg.kstars = parse_each<strategy::KStar>(value, [](const std::string& s) { return strategy::parse_kstar(s); });
                else if (key == "vix_asset") cfg.vix_asset = value;
                else throw ConfigError("unknown key " + ctx);
            } else if (section == "output") {
                if (key == "dir") cfg.output_dir = resolve(value);
                else throw ConfigError("unknown key " + ctx);
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        }
    }
    if (!daa_assets_set) cfg.daa_assets = cfg.assets;
    if (!cas_assets_set) {
        for (const auto& a : cfg.assets) {
            if (a != cfg.vix_asset) cfg.cas_assets.push_back(a);
        }
    }
    if (!model_curves_set) {
        for (const auto& [kind, path] : cfg.curves) cfg.model_curves.push_back(kind);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_config(text.str(), base);
}

} // namespace adaptfolio
