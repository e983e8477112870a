#include "adaptfolio/types.hpp"

#include "adaptfolio/errors.hpp"

namespace adaptfolio {

std::string_view to_string(CurveKind kind) { return kind == CurveKind::vix ? "vix" : "yield"; }

CurveKind parse_curve_kind(std::string_view text) {
    if (text == "vix") return CurveKind::vix;
    if (text == "yield") return CurveKind::yield;
    throw ConfigError("unknown curve kind '" + std::string(text) + "' (expected vix or yield)");
}

std::string slope_column(CurveKind kind) { return std::string(to_string(kind)) + ".slope"; }
std::string short_column(CurveKind kind) { return std::string(to_string(kind)) + ".short"; }
std::string long_column(CurveKind kind) { return std::string(to_string(kind)) + ".long"; }

} // namespace adaptfolio
