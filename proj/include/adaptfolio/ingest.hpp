#pragma once

#include "adaptfolio/frame.hpp"
#include "adaptfolio/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adaptfolio::ingest {

struct CsvOptions {
    /// Empty cells load as missing instead of failing.
    bool allow_empty_cells = false;
};

/// Loads a `date,<col>...` CSV. When `schema` is non-empty the header after the
/// date column must match it exactly. Rows are returned sorted by date.
/// Throws DataError naming the offending line for malformed dates, non-numeric
/// cells, ragged rows and duplicate dates.
TimeSeriesFrame load_csv(const std::filesystem::path& path,
                         const std::vector<std::string>& schema,
                         const CsvOptions& options = {});

/// `date,close` file; the close column is renamed to `asset` and must be
/// strictly positive.
TimeSeriesFrame load_price_csv(const std::filesystem::path& path, const std::string& asset);

/// Writes a frame as `date,<names...>` with empty cells for missing values.
void write_frame_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path);

/// Inner join on dates. Columns keep input order; throws DataError on an empty
/// intersection or duplicate column names.
TimeSeriesFrame align_inner(std::span<const TimeSeriesFrame> frames);

/// k-day log return stamped on its end date: out[t] = log p[t] - log p[t-k].
/// The first k entries are missing. Throws DomainError on non-positive prices.
std::vector<double> log_return(std::span<const double> prices, int k);

/// One day's term structure.
struct CurveSnapshot {
    std::vector<double> maturities;  ///< months, strictly increasing
    std::vector<double> levels;

    /// Throws DomainError unless J >= 2 and maturities strictly increase.
    void validate() const;
};

/// Least-squares slope of level on maturity (level per month).
double estimate_slope(const CurveSnapshot& snapshot);

/// Arithmetic means of the short and long sides; the threshold maturity belongs
/// to the short side.
std::pair<double, double> short_long_split(const CurveSnapshot& snapshot, CurveKind kind);

/// Parses a curve header token `m<months>` (e.g. "m3", "m120", "m0.5").
double parse_maturity(const std::string& token);

/// Wide curve file (`date,m<x>,...`). Rows with a missing tenor are dropped
/// unless `forward_fill` is set, in which case the tenor takes its previous
/// value (rows still missing after filling are dropped). Returns a frame with
/// the derived slope, short and long columns for `kind`.
TimeSeriesFrame load_curve_csv(const std::filesystem::path& path, CurveKind kind, bool forward_fill);

/// Derived curve columns from an already loaded wide frame.
TimeSeriesFrame curve_features(const TimeSeriesFrame& wide, CurveKind kind, bool forward_fill);

} // namespace adaptfolio::ingest
