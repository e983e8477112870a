#include "adaptfolio/export.hpp"

#include "adaptfolio/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace adaptfolio::exports {

using strategy::LegRole;
using strategy::StrategyRecord;

std::string format_number(double value) {
    if (std::isnan(value)) return {};
    if (value == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void check_range(const StrategyRecord& record, const TradingCalendar& calendar, std::size_t first, std::size_t last) {
    if (record.days() != calendar.size()) throw ConfigError("record " + record.id.str() + " is not on the calendar");
    if (first > last || last >= calendar.size()) throw std::out_of_range("export range outside the calendar");
}

// NaN when no leg of the role holds a weight on day t.
double role_weight(const StrategyRecord& record, LegRole role, std::size_t t) {
    bool any = false;
    bool known = false;
    double sum = 0.0;
    for (const auto& leg : record.legs) {
        if (leg.role != role) continue;
        any = true;
        if (!std::isnan(leg.weight[t])) {
            known = true;
            sum += leg.weight[t];
        }
    }
    if (!any) return role == LegRole::hedge ? 0.0 : kMissing;
    return known ? sum : kMissing;
}

} // namespace

void write_strategy_csv(const StrategyRecord& record, const TradingCalendar& calendar, std::size_t first,
                        std::size_t last, const std::filesystem::path& path) {
    check_range(record, calendar, first, last);
    auto out = open_out(path);
    out << "date,weight,weight_vix,pnl,cum_wealth\n";
    double wealth = 1.0;
    for (std::size_t t = first; t <= last; ++t) {
        double p = kMissing;
        if (t > first) {
            p = record.pnl[t];
            wealth *= 1.0 + p;
        }
        out << calendar[t].iso() << ',' << format_number(role_weight(record, LegRole::primary, t)) << ','
            << format_number(role_weight(record, LegRole::hedge, t)) << ',' << format_number(p) << ','
            << format_number(wealth) << '\n';
    }
}

void write_asset_weights_csv(const StrategyRecord& record, const TradingCalendar& calendar, std::size_t first,
                             std::size_t last, const std::filesystem::path& path) {
    check_range(record, calendar, first, last);
    std::vector<std::string> assets;
    for (const auto& leg : record.legs) {
        if (std::find(assets.begin(), assets.end(), leg.asset) == assets.end()) assets.push_back(leg.asset);
    }
    auto out = open_out(path);
    out << "date";
    for (const auto& a : assets) out << ',' << a;
    out << ",pnl\n";
    for (std::size_t t = first; t <= last; ++t) {
        out << calendar[t].iso();
        for (const auto& a : assets) {
            double sum = 0.0;
            bool known = false;
            for (const auto& leg : record.legs) {
                if (leg.asset == a && !std::isnan(leg.weight[t])) {
                    sum += leg.weight[t];
                    known = true;
                }
            }
            out << ',' << format_number(known ? sum : kMissing);
        }
        out << ',' << format_number(t > first ? record.pnl[t] : kMissing) << '\n';
    }
}

std::string metrics_json(const StrategyRecord& record, const TradingCalendar& calendar, std::size_t first,
                         std::size_t last, strategy::MddMode mode) {
    check_range(record, calendar, first, last);
    const auto m = strategy::metrics(record.pnl_range(first, last), mode);
    nlohmann::ordered_json j;
    j["sr"] = m.sr ? nlohmann::ordered_json(*m.sr) : nlohmann::ordered_json(nullptr);
    j["anr"] = m.anr;
    j["mdd"] = m.mdd;
    j["n_days"] = m.n;
    j["first_date"] = calendar[first].iso();
    j["last_date"] = calendar[last].iso();
    return j.dump();
}

void write_trace_csv(std::span<const selection::SelectionTrace> traces, std::span<const models::ModelSpec> specs,
                     const TradingCalendar& calendar, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "date,method,chosen_spec_or_topweight,model_class,window,forecast\n";
    for (const auto& tr : traces) {
        out << calendar[tr.t].iso() << ',' << selection::to_string(tr.method) << ',';
        if (tr.chosen && !tr.fallback) {
            const auto& s = specs[*tr.chosen];
            out << s.id() << ',' << static_cast<int>(s.model_class) << ',' << s.window;
        } else {
            out << "fallback,,";
        }
        out << ',' << format_number(tr.forecast) << '\n';
    }
}

void write_group_weights_csv(std::span<const selection::SelectionTrace> traces,
                             std::span<const models::ModelSpec> specs, const TradingCalendar& calendar,
                             const std::filesystem::path& path) {
    std::vector<int> windows;
    for (const auto& s : specs) windows.push_back(s.window);
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    const int classes = 3;

    auto out = open_out(path);
    out << "date,method";
    for (int w : windows) out << ",w" << w;
    for (int c = 1; c <= classes; ++c) out << ",class" << c;
    out << '\n';
    for (const auto& tr : traces) {
        std::vector<double> by_window(windows.size(), 0.0);
        std::vector<double> by_class(classes, 0.0);
        auto add = [&](std::size_t candidate, double mass) {
            const auto& s = specs[candidate];
            const auto wi = std::lower_bound(windows.begin(), windows.end(), s.window) - windows.begin();
            by_window[static_cast<std::size_t>(wi)] += mass;
            by_class[static_cast<std::size_t>(s.model_class) - 1] += mass;
        };
        if (!tr.fallback) {
            if (tr.method == selection::Method::ae) {
                for (const auto& [c, w] : tr.weights) add(c, w);
            } else if (tr.chosen) {
                add(*tr.chosen, 1.0);
            }
        }
        out << calendar[tr.t].iso() << ',' << selection::to_string(tr.method);
        for (double x : by_window) out << ',' << format_number(x);
        for (double x : by_class) out << ',' << format_number(x);
        out << '\n';
    }
}

void write_loss_dump(std::span<const selection::SelectionTrace> traces, std::span<const models::ModelSpec> specs,
                     const TradingCalendar& calendar, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "date,spec_id,loss\n";
    for (const auto& tr : traces) {
        for (std::size_t c = 0; c < tr.losses.size(); ++c) {
            out << calendar[tr.t].iso() << ',' << specs[c].id() << ',' << format_number(tr.losses[c]) << '\n';
        }
    }
}

void write_allocation_csv(const daa::DaaResult& result, std::span<const StrategyRecord> universe,
                          const TradingCalendar& calendar, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "quarter_end,strategy_id,asset,k,method,sr_trailing,selected\n";
    for (const auto& plan : result.plans) {
        if (plan.scores.size() != universe.size()) throw ConfigError("allocation plan does not match its universe");
        for (std::size_t i = 0; i < universe.size(); ++i) {
            const auto& id = universe[i].id;
            const bool selected = std::binary_search(plan.selected.begin(), plan.selected.end(), i);
            out << calendar[plan.quarter_end].iso() << ',' << id.str() << ',' << id.asset << ',' << id.horizon << ','
                << id.method << ',' << (plan.scores[i] ? format_number(*plan.scores[i]) : std::string()) << ','
                << (selected ? 1 : 0) << '\n';
        }
        for (const auto& a : plan.benchmark_assets) {
            out << calendar[plan.quarter_end].iso() << ",benchmark/" << a << ',' << a << ",0,benchmark,,1\n";
        }
    }
}

} // namespace adaptfolio::exports
