#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kpicomp {

/// Samples per weekly block (7 days of hourly measurements).
inline constexpr std::size_t kWeekLength = 168;

enum class KpiKind {
    DownlinkVolume,  // MB/hour
    PrbOccupancy,    // percent, 0..100
    ActiveUsersRrc,  // count
};

/// Short token used in CSV files and on the command line ("volume", "prb", "users").
std::string_view kpi_token(KpiKind kind);
/// Native unit label for reports.
std::string_view kpi_unit(KpiKind kind);
/// Parses a token produced by kpi_token(); throws std::invalid_argument otherwise.
KpiKind parse_kpi(std::string_view token);

/// Hours since 1970-01-01T00:00:00Z.
using HourStamp = std::int64_t;

/// Parses `YYYY-MM-DDTHH:00:00Z`. Throws FormatError for anything else.
HourStamp parse_hour_stamp(std::string_view text);
std::string format_hour_stamp(HourStamp stamp);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class FormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class EmptyDatasetError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TooShortError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * One cell's KPI series at uniform hourly spacing.
 *
 * Construction rejects empty or non-finite samples, so every CellSeries in
 * the program is NaN-free.
 */
class CellSeries {
public:
    CellSeries(std::string cell_id, KpiKind kpi, HourStamp start, std::vector<double> samples);

    const std::string& cell_id() const noexcept { return cell_id_; }
    KpiKind kpi() const noexcept { return kpi_; }
    HourStamp start() const noexcept { return start_; }
    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }

    bool operator==(const CellSeries&) const = default;

private:
    std::string cell_id_;
    KpiKind kpi_;
    HourStamp start_;
    std::vector<double> samples_;
};

/**
 * A set of cells for one KPI sharing length T and start time.
 * Cells are kept sorted by cell_id; ids are unique.
 */
class Dataset {
public:
    Dataset(KpiKind kpi, std::vector<CellSeries> cells);

    KpiKind kpi() const noexcept { return kpi_; }
    std::span<const CellSeries> cells() const noexcept { return cells_; }
    std::size_t cell_count() const noexcept { return cells_.size(); }
    /// Common series length T.
    std::size_t length() const noexcept { return cells_.empty() ? 0 : cells_.front().size(); }
    HourStamp start() const noexcept { return cells_.empty() ? 0 : cells_.front().start(); }

    /// Index of a cell id, or cell_count() when absent.
    std::size_t find(std::string_view cell_id) const;

    /// Subset keeping cells whose id is NOT in `excluded` (sorted input not required).
    Dataset without(std::span<const std::string> excluded) const;

    bool operator==(const Dataset&) const = default;

private:
    KpiKind kpi_;
    std::vector<CellSeries> cells_;
};

struct WeeklyBlocks {
    std::string cell_id;
    std::vector<std::vector<double>> blocks;  // each of length kWeekLength
    bool remainder_dropped = false;
};

/// Splits into floor(T/168) non-overlapping weeks. Throws TooShortError when T < 168.
WeeklyBlocks to_weekly_blocks(const CellSeries& series);

/**
 * Reads a long-format CSV (`cell_id,timestamp,kpi,value`) and keeps the
 * cells of the requested KPI that are complete over the common time range.
 *
 * The range spans the earliest to the latest timestamp seen for `kpi` and is
 * truncated to whole weeks. Cells with a missing hour or a NaN inside the
 * truncated range are dropped.
 */
Dataset load_csv(const std::string& path, KpiKind kpi);
Dataset parse_csv(std::string_view text, KpiKind kpi);

/// Writes the dataset in the same long format load_csv reads.
void write_csv(const Dataset& dataset, const std::string& path);
std::string to_csv(const Dataset& dataset);

}  // namespace kpicomp
