#include "kpicomp/kpi_model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace kpicomp {

std::string_view kpi_token(KpiKind kind)
{
    switch (kind) {
    case KpiKind::DownlinkVolume: return "volume";
    case KpiKind::PrbOccupancy: return "prb";
    case KpiKind::ActiveUsersRrc: return "users";
    }
    return "?";
}

std::string_view kpi_unit(KpiKind kind)
{
    switch (kind) {
    case KpiKind::DownlinkVolume: return "MB/hour";
    case KpiKind::PrbOccupancy: return "percent";
    case KpiKind::ActiveUsersRrc: return "users";
    }
    return "?";
}

KpiKind parse_kpi(std::string_view token)
{
    if (token == "volume") return KpiKind::DownlinkVolume;
    if (token == "prb") return KpiKind::PrbOccupancy;
    if (token == "users" || token == "rrc") return KpiKind::ActiveUsersRrc;
    throw std::invalid_argument("unknown KPI '" + std::string(token) + "' (expected volume, prb or users)");
}

namespace {

bool parse_digits(std::string_view text, int& out)
{
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

HourStamp parse_hour_stamp(std::string_view text)
{
    // YYYY-MM-DDTHH:00:00Z
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':' || text[19] != 'Z') {
        throw FormatError("timestamp '" + std::string(text) + "' is not YYYY-MM-DDTHH:00:00Z");
    }
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!parse_digits(text.substr(0, 4), year) || !parse_digits(text.substr(5, 2), month) ||
        !parse_digits(text.substr(8, 2), day) || !parse_digits(text.substr(11, 2), hour) ||
        !parse_digits(text.substr(14, 2), minute) || !parse_digits(text.substr(17, 2), second)) {
        throw FormatError("timestamp '" + std::string(text) + "' has non-numeric fields");
    }
    if (minute != 0 || second != 0) {
        throw FormatError("timestamp '" + std::string(text) + "' is not on a whole hour");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                          std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok() || hour < 0 || hour > 23) {
        throw FormatError("timestamp '" + std::string(text) + "' is not a valid calendar hour");
    }
    const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return static_cast<HourStamp>(days) * 24 + hour;
}

std::string format_hour_stamp(HourStamp stamp)
{
    auto days = stamp / 24;
    auto hour = stamp % 24;
    if (hour < 0) {
        hour += 24;
        days -= 1;
    }
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(hour));
    return buf;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

CellSeries::CellSeries(std::string cell_id, KpiKind kpi, HourStamp start, std::vector<double> samples)
    : cell_id_(std::move(cell_id)), kpi_(kpi), start_(start), samples_(std::move(samples))
{
    if (samples_.empty()) throw std::invalid_argument("cell '" + cell_id_ + "' has no samples");
    for (double v : samples_) {
        if (!std::isfinite(v)) throw std::invalid_argument("cell '" + cell_id_ + "' contains a non-finite sample");
    }
}

Dataset::Dataset(KpiKind kpi, std::vector<CellSeries> cells) : kpi_(kpi), cells_(std::move(cells))
{
    std::sort(cells_.begin(), cells_.end(),
              [](const CellSeries& a, const CellSeries& b) { return a.cell_id() < b.cell_id(); });
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const auto& c = cells_[i];
        if (c.kpi() != kpi_) throw std::invalid_argument("cell '" + c.cell_id() + "' carries a different KPI");
        if (c.size() != cells_.front().size() || c.start() != cells_.front().start()) {
            throw std::invalid_argument("cell '" + c.cell_id() + "' does not share the dataset length/start");
        }
        if (i > 0 && cells_[i - 1].cell_id() == c.cell_id()) {
            throw std::invalid_argument("duplicate cell id '" + c.cell_id() + "'");
        }
    }
}

std::size_t Dataset::find(std::string_view cell_id) const
{
    auto it = std::lower_bound(cells_.begin(), cells_.end(), cell_id,
                               [](const CellSeries& c, std::string_view id) { return c.cell_id() < id; });
    if (it != cells_.end() && it->cell_id() == cell_id) return static_cast<std::size_t>(it - cells_.begin());
    return cells_.size();
}

Dataset Dataset::without(std::span<const std::string> excluded) const
{
    std::set<std::string_view> drop(excluded.begin(), excluded.end());
    std::vector<CellSeries> kept;
    for (const auto& c : cells_) {
        if (!drop.contains(c.cell_id())) kept.push_back(c);
    }
    return Dataset(kpi_, std::move(kept));
}

WeeklyBlocks to_weekly_blocks(const CellSeries& series)
{
    if (series.size() < kWeekLength) {
        throw TooShortError("cell '" + series.cell_id() + "' has " + std::to_string(series.size()) +
                            " samples; at least one week (168) is required");
    }
    WeeklyBlocks out;
    out.cell_id = series.cell_id();
    const auto n_blocks = series.size() / kWeekLength;
    out.blocks.reserve(n_blocks);
    auto samples = series.samples();
    for (std::size_t b = 0; b < n_blocks; ++b) {
        auto week = samples.subspan(b * kWeekLength, kWeekLength);
        out.blocks.emplace_back(week.begin(), week.end());
    }
    out.remainder_dropped = series.size() % kWeekLength != 0;
    return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_value(std::string_view text, std::size_t line_no)
{
    if (text.empty() || text == "NaN" || text == "nan" || text == "NA" || text == "null") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(line_no, "value '" + std::string(text) + "' is not a decimal number");
    }
    return value;
}

}  // namespace

Dataset parse_csv(std::string_view text, KpiKind kpi)
{
    std::map<std::string, std::map<HourStamp, double>> by_cell;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    const auto wanted = kpi_token(kpi);

    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        line = trim(line);
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (line.empty()) continue;

        auto fields = split_fields(line);
        if (!saw_header) {
            if (fields.size() != 4 || trim(fields[0]) != "cell_id" || trim(fields[1]) != "timestamp" ||
                trim(fields[2]) != "kpi" || trim(fields[3]) != "value") {
                throw ParseError(line_no, "expected header 'cell_id,timestamp,kpi,value'");
            }
            saw_header = true;
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
        }
        const auto cell = trim(fields[0]);
        if (cell.empty()) throw ParseError(line_no, "empty cell_id");
        KpiKind row_kpi{};
        try {
            row_kpi = parse_kpi(trim(fields[2]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
        HourStamp stamp = 0;
        try {
            stamp = parse_hour_stamp(trim(fields[1]));
        } catch (const FormatError& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
        const double value = parse_value(trim(fields[3]), line_no);
        if (row_kpi != kpi) continue;

        auto& series = by_cell[std::string(cell)];
        if (!series.emplace(stamp, value).second) {
            throw FormatError("line " + std::to_string(line_no) + ": duplicate timestamp for cell '" +
                              std::string(cell) + "'");
        }
    }
    if (!saw_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing header");

    if (by_cell.empty()) throw EmptyDatasetError("no rows for KPI '" + std::string(wanted) + "'");

    HourStamp first = std::numeric_limits<HourStamp>::max();
    HourStamp last = std::numeric_limits<HourStamp>::min();
    for (const auto& [id, series] : by_cell) {
        first = std::min(first, series.begin()->first);
        last = std::max(last, series.rbegin()->first);
    }
    const auto span = static_cast<std::size_t>(last - first + 1);
    const auto length = span / kWeekLength * kWeekLength;
    if (length == 0) {
        throw EmptyDatasetError("common time range of " + std::to_string(span) + " hours is shorter than one week");
    }

    std::vector<CellSeries> cells;
    for (auto& [id, series] : by_cell) {
        std::vector<double> samples;
        samples.reserve(length);
        auto it = series.begin();
        bool complete = true;
        for (std::size_t n = 0; n < length && complete; ++n) {
            const auto stamp = first + static_cast<HourStamp>(n);
            if (it == series.end() || it->first != stamp || !std::isfinite(it->second)) {
                complete = false;
            } else {
                samples.push_back(it->second);
                ++it;
            }
        }
        if (complete) cells.emplace_back(id, kpi, first, std::move(samples));
    }
    if (cells.empty()) {
        throw EmptyDatasetError("no cell of KPI '" + std::string(wanted) + "' is complete over the common range");
    }
    return Dataset(kpi, std::move(cells));
}

Dataset load_csv(const std::string& path, KpiKind kpi)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), kpi);
}

std::string to_csv(const Dataset& dataset)
{
    std::string out = "cell_id,timestamp,kpi,value\n";
    const auto token = std::string(kpi_token(dataset.kpi()));
    char num[64];
    for (const auto& cell : dataset.cells()) {
        auto samples = cell.samples();
        for (std::size_t n = 0; n < samples.size(); ++n) {
            auto [ptr, ec] = std::to_chars(num, num + sizeof num, samples[n]);
            out += cell.cell_id();
            out += ',';
            out += format_hour_stamp(cell.start() + static_cast<HourStamp>(n));
            out += ',';
            out += token;
            out += ',';
            out.append(num, ptr);
            out += '\n';
        }
    }
    return out;
}

void write_csv(const Dataset& dataset, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << to_csv(dataset);
}

}  // namespace kpicomp
