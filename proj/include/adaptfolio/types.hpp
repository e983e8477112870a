#pragma once

#include <string>
#include <string_view>

namespace adaptfolio {

enum class CurveKind { vix, yield };

[[nodiscard]] std::string_view to_string(CurveKind kind);
/// Throws ConfigError for anything other than "vix" or "yield".
[[nodiscard]] CurveKind parse_curve_kind(std::string_view text);

/// Maturity (months) up to and including which a tenor counts as short-term.
[[nodiscard]] constexpr double short_end_threshold(CurveKind kind) {
    return kind == CurveKind::vix ? 3.0 : 24.0;
}

/// Names of the derived per-day curve columns in a frame.
[[nodiscard]] std::string slope_column(CurveKind kind);
[[nodiscard]] std::string short_column(CurveKind kind);
[[nodiscard]] std::string long_column(CurveKind kind);

} // namespace adaptfolio
