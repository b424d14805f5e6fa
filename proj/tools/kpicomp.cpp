// kpicomp: command-line frontend for KPI compression experiments.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error. Diagnostics go to
// stderr as `kpicomp: <level>: <message>` lines.

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpicomp/codecs.hpp"
#include "kpicomp/experiments.hpp"
#include "kpicomp/kpi_model.hpp"
#include "kpicomp/metrics.hpp"
#include "kpicomp/svg_plot.hpp"
#include "kpicomp/synth.hpp"
#include "kpicomp/transforms.hpp"
#include "kpicomp/version.hpp"

namespace {

using namespace kpicomp;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void warn(const std::string& message)
{
    std::cerr << "kpicomp: warning: " << message << '\n';
}

std::string exact(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items, char sep = ',')
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string content_hash(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Records the resolved invocation and every file written, then lands next to the primary output.
class Manifest {
public:
    Manifest(std::string command, std::string primary_output)
        : command_(std::move(command)), primary_(std::move(primary_output))
    {
    }

    void arg(const std::string& flag, const std::string& value)
    {
        args_.push_back(flag);
        args_.push_back(value);
        config_[flag.substr(flag.find_first_not_of('-'))] = value;
    }
    void flag(const std::string& flag)
    {
        args_.push_back(flag);
        config_[flag.substr(flag.find_first_not_of('-'))] = true;
    }
    void output(const std::string& path, std::string_view content)
    {
        write_file(path, content);
        outputs_.push_back({{"path", path}, {"fnv1a64", content_hash(content)}});
    }
    std::string path() const { return primary_ + ".manifest.json"; }

    void write() const
    {
        json j;
        j["tool"] = "kpicomp";
        j["version"] = kVersion;
        j["command"] = command_;
        j["config"] = config_;
        std::vector<std::string> argv{command_};
        argv.insert(argv.end(), args_.begin(), args_.end());
        j["args"] = argv;
        j["outputs"] = outputs_;
        write_file(path(), j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::string primary_;
    std::vector<std::string> args_;
    json config_ = json::object();
    json outputs_ = json::array();
};

std::string deltas_arg(std::span<const double> deltas)
{
    std::vector<std::string> parts;
    for (double d : deltas) parts.push_back(exact(d));
    return join(parts);
}

KpiKind kpi_option(const std::string& token)
{
    try {
        return parse_kpi(token);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

std::vector<double> resolve_deltas(const std::vector<double>& requested, const Dataset& dataset)
{
    if (requested.empty()) return default_delta_ladder(dataset);
    try {
        validate_ladder(requested);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--deltas: ") + e.what());
    }
    return requested;
}

struct KltFlags {
    double fraction = 0.1;
    std::uint64_t seed = 1;
    std::string basis_in;
    std::string basis_out;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--klt-fraction", fraction, "Fraction of cells used to train the KLT")
            ->check(CLI::Range(0.0, 1.0));
        cmd.add_option("--klt-seed", seed, "Seed for KLT training-cell sampling");
        cmd.add_option("--klt-basis", basis_in, "Load a previously trained KLT basis instead of training");
        cmd.add_option("--basis-out", basis_out, "Where to write the trained KLT basis (default <out>.klt.json)");
    }

    /// Trains or loads the basis, records it in the manifest and writes it out.
    std::shared_ptr<const KltBasis> obtain(const Dataset& dataset, Manifest& manifest, const std::string& out)
    {
        if (!basis_in.empty()) {
            manifest.arg("--klt-basis", basis_in);
            return std::make_shared<const KltBasis>(load_klt(basis_in));
        }
        std::string warning;
        auto basis = std::make_shared<const KltBasis>(train_klt(dataset, {fraction, seed}, &warning));
        if (!warning.empty()) warn(warning);
        manifest.arg("--klt-fraction", exact(fraction));
        manifest.arg("--klt-seed", std::to_string(seed));
        const auto path = basis_out.empty() ? out + ".klt.json" : basis_out;
        manifest.arg("--basis-out", path);
        manifest.output(path, klt_to_json(*basis) + "\n");
        return basis;
    }
};

CodecKind make_codec(CodecId id, const std::shared_ptr<const KltBasis>& basis)
{
    switch (id) {
    case CodecId::Pcm: return CodecKind::pcm();
    case CodecId::Dpcm: return CodecKind::dpcm();
    case CodecId::Dct: return CodecKind::dct();
    case CodecId::Klt: return CodecKind::klt(basis);
    }
    throw std::logic_error("unreachable");
}

CodecId codec_option(const std::string& name)
{
    try {
        return parse_codec(name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// --- synth ----------------------------------------------------------------

struct SynthCmd {
    std::string kpi = "volume";
    std::size_t cells = 300;
    std::size_t weeks = 4;
    SynthConfig cfg;
    std::string out;

    void add_to(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("synth", "Generate a synthetic KPI dataset as long-format CSV");
        cmd->add_option("--kpi", kpi, "volume | prb | users");
        cmd->add_option("--cells", cells, "Number of cells")->check(CLI::PositiveNumber);
        cmd->add_option("--weeks", weeks, "Number of weeks")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", cfg.seed, "Generator seed");
        cmd->add_option("--daily-amplitude", cfg.daily_amplitude)->check(CLI::NonNegativeNumber);
        cmd->add_option("--weekly-amplitude", cfg.weekly_amplitude)->check(CLI::NonNegativeNumber);
        cmd->add_option("--noise-std", cfg.noise_std)->check(CLI::NonNegativeNumber);
        cmd->add_option("--scale-sigma", cfg.cell_scale_lognormal_sigma)->check(CLI::NonNegativeNumber);
        cmd->add_option("--correlation", cfg.inter_cell_pattern_correlation)->check(CLI::Range(0.0, 1.0));
        cmd->add_option("-o,--out", out, "Output CSV path")->required();
        cmd->callback([this] { run(); });
    }

    void run()
    {
        cfg.kpi = kpi_option(kpi);
        cfg.n_cells = cells;
        cfg.n_weeks = weeks;
        const auto dataset = generate(cfg);

        Manifest m("synth", out);
        m.arg("--kpi", std::string(kpi_token(cfg.kpi)));
        m.arg("--cells", std::to_string(cfg.n_cells));
        m.arg("--weeks", std::to_string(cfg.n_weeks));
        m.arg("--seed", std::to_string(cfg.seed));
        m.arg("--daily-amplitude", exact(cfg.daily_amplitude));
        m.arg("--weekly-amplitude", exact(cfg.weekly_amplitude));
        m.arg("--noise-std", exact(cfg.noise_std));
        m.arg("--scale-sigma", exact(cfg.cell_scale_lognormal_sigma));
        m.arg("--correlation", exact(cfg.inter_cell_pattern_correlation));
        m.arg("--out", out);
        m.output(out, to_csv(dataset));
        m.write();
        std::cout << "wrote " << dataset.cell_count() << " cells x " << dataset.length() << " samples to " << out
                  << '\n';
    }
};

// --- rd -------------------------------------------------------------------

struct InputFlags {
    std::string in;
    std::string kpi = "volume";

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--in", in, "Input long-format CSV")->required();
        cmd.add_option("--kpi", kpi, "KPI to read from the CSV: volume | prb | users");
    }

    Dataset load(Manifest& m) const
    {
        const auto kind = kpi_option(kpi);
        m.arg("--in", in);
        m.arg("--kpi", std::string(kpi_token(kind)));
        return load_csv(in, kind);
    }
};

struct RdCmd {
    InputFlags input;
    KltFlags klt;
    std::vector<std::string> codecs{"pcm", "dpcm", "dct", "klt"};
    std::vector<double> deltas;
    std::string out = "rd_points.csv";
    std::string svg;

    void add_to(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("rd", "Rate-distortion sweep over a quantizer step ladder");
        input.add_to(*cmd);
        klt.add_to(*cmd);
        cmd->add_option("--codecs", codecs, "Comma-separated subset of pcm,dpcm,dct,klt")->delimiter(',');
        cmd->add_option("--deltas", deltas, "Strictly decreasing step ladder (default: data-driven)")->delimiter(',');
        cmd->add_option("-o,--out", out, "Output CSV");
        cmd->add_option("--svg", svg, "Also render the curves to this SVG file");
        cmd->callback([this] { run(); });
    }

    void run()
    {
        std::vector<CodecId> ids;
        for (const auto& c : codecs) {
            const auto id = codec_option(c);
            if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        if (ids.empty()) throw UsageError("--codecs is empty");

        Manifest m("rd", out);
        const auto dataset = input.load(m);
        std::vector<std::string> names;
        for (auto id : ids) names.emplace_back(codec_name(id));
        m.arg("--codecs", join(names));

        std::shared_ptr<const KltBasis> basis;
        if (std::find(ids.begin(), ids.end(), CodecId::Klt) != ids.end()) basis = klt.obtain(dataset, m, out);
        std::vector<CodecKind> kinds;
        for (auto id : ids) kinds.push_back(make_codec(id, basis));

        const auto ladder = resolve_deltas(deltas, dataset);
        m.arg("--deltas", deltas_arg(ladder));
        const auto points = rd_sweep(dataset, kinds, ladder);

        std::string csv = "codec,delta,rate_bits_per_sample,snr_db,eligible_cell_count,side_info_bits_per_sample\n";
        json rows = json::array();
        for (const auto& p : points) {
            csv += std::string(codec_name(p.codec)) + "," + fmt(p.delta) + "," + fmt(p.rate_bits_per_sample) + "," +
                   fmt(p.snr_db) + "," + std::to_string(p.eligible_cell_count) + "," +
                   fmt(p.side_info_bits_per_sample) + "\n";
            rows.push_back({{"codec", codec_name(p.codec)},
                            {"delta", p.delta},
                            {"rate_bits_per_sample", p.rate_bits_per_sample},
                            {"snr_db", p.snr_db},
                            {"eligible_cell_count", p.eligible_cell_count},
                            {"side_info_bits_per_sample", p.side_info_bits_per_sample},
                            {"compression_factor_vs_float32",
                             p.rate_bits_per_sample > 0 ? json(32.0 / p.rate_bits_per_sample) : json(nullptr)}});
        }
        m.arg("--out", out);
        m.output(out, csv);

        json report;
        report["command"] = "rd";
        report["kpi"] = kpi_token(dataset.kpi());
        report["cells_in_dataset"] = dataset.cell_count();
        report["samples_per_cell"] = dataset.length();
        report["deltas"] = ladder;
        report["points"] = rows;
        report["notes"] = json::array({"rate is the entropy of quantization indices pooled over all evaluated cells",
                                       "DPCM first sample is sent uncoded; its amortized cost is side_info_bits_per_sample",
                                       "KLT basis side information is not counted in the rate"});
        if (basis) {
            report["klt"] = {{"training_cell_ids", std::vector<std::string>(basis->training_cell_ids().begin(),
                                                                             basis->training_cell_ids().end())},
                             {"training_cells_excluded_from_evaluation", true},
                             {"fingerprint", basis->fingerprint()}};
        }
        m.output(out + ".report.json", report.dump(2) + "\n");

        if (!svg.empty()) {
            PlotSpec plot{"Rate-distortion (" + std::string(kpi_token(dataset.kpi())) + ")", "rate [bit/sample]",
                          "SNR [dB]", {}};
            for (auto id : ids) {
                PlotSeries s{std::string(codec_name(id)), {}};
                for (const auto& p : points)
                    if (p.codec == id) s.points.emplace_back(p.rate_bits_per_sample, p.snr_db);
                plot.series.push_back(std::move(s));
            }
            m.arg("--svg", svg);
            m.output(svg, render_svg(plot));
        }
        m.write();
        std::cout << "wrote " << points.size() << " rate-distortion points to " << out << '\n';
    }
};

// --- aggregate ------------------------------------------------------------

struct AggregateCmd {
    InputFlags input;
    KltFlags klt;
    std::string codec = "klt";
    std::vector<std::size_t> n_values{10, 100, 1000};
    std::size_t replicates = 10;
    std::uint64_t seed = 1;
    bool no_clamp = false;
    std::vector<double> deltas;
    std::string out = "aggregation_points.csv";
    std::string svg;

    void add_to(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("aggregate", "Aggregate SNR of summed cells versus per-cell SNR");
        input.add_to(*cmd);
        klt.add_to(*cmd);
        cmd->add_option("--codec", codec, "pcm | dpcm | dct | klt");
        cmd->add_option("--n", n_values, "Comma-separated numbers of aggregated cells")->delimiter(',');
        cmd->add_option("--replicates", replicates, "Random cell subsets per (N, step)")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Seed for cell subset sampling");
        cmd->add_flag("--no-clamp", no_clamp, "Fail instead of clamping N to the eligible cell count");
        cmd->add_option("--deltas", deltas, "Strictly decreasing step ladder (default: data-driven)")->delimiter(',');
        cmd->add_option("-o,--out", out, "Output CSV");
        cmd->add_option("--svg", svg, "Also render aggregate vs per-cell SNR to this SVG file");
        cmd->callback([this] { run(); });
    }

    void run()
    {
        const auto id = codec_option(codec);
        Manifest m("aggregate", out);
        const auto dataset = input.load(m);
        m.arg("--codec", std::string(codec_name(id)));
        std::shared_ptr<const KltBasis> basis;
        if (id == CodecId::Klt) basis = klt.obtain(dataset, m, out);
        const auto kind = make_codec(id, basis);

        const auto ladder = resolve_deltas(deltas, dataset);
        AggregationOptions opts;
        opts.n_values = n_values;
        opts.replicates = replicates;
        opts.seed = seed;
        opts.clamp = !no_clamp;
        std::vector<std::string> ns;
        for (auto n : n_values) ns.push_back(std::to_string(n));
        m.arg("--n", join(ns));
        m.arg("--replicates", std::to_string(replicates));
        m.arg("--seed", std::to_string(seed));
        if (no_clamp) m.flag("--no-clamp");
        m.arg("--deltas", deltas_arg(ladder));

        AggregationOutcome result;
        try {
            result = aggregation_experiment(dataset, kind, ladder, opts);
        } catch (const std::invalid_argument& e) {
            if (no_clamp) throw UsageError(e.what());
            throw;
        }
        for (const auto& w : result.warnings) warn(w);

        std::string csv =
            "n_cells,delta,mean_per_cell_snr_db,pooled_per_cell_snr_db,aggregate_snr_db,replicate_index\n";
        for (const auto& p : result.points) {
            csv += std::to_string(p.n_cells) + "," + fmt(p.delta) + "," + fmt(p.mean_per_cell_snr_db) + "," +
                   fmt(p.pooled_per_cell_snr_db) + "," + fmt(p.aggregate_snr_db) + "," +
                   std::to_string(p.replicate_index) + "\n";
        }
        m.arg("--out", out);
        m.output(out, csv);

        json report;
        report["command"] = "aggregate";
        report["codec"] = codec_name(id);
        report["kpi"] = kpi_token(dataset.kpi());
        report["deltas"] = ladder;
        report["seed"] = seed;
        report["replicates"] = replicates;
        report["warnings"] = result.warnings;
        report["eligible_cells"] = eligible_cells(dataset, kind).cell_count();
        if (basis) report["klt_training_cells_excluded"] = basis->training_cell_ids().size();
        report["points"] = json::array();
        for (const auto& p : result.points) {
            report["points"].push_back({{"n_cells", p.n_cells},
                                        {"delta", p.delta},
                                        {"mean_per_cell_snr_db", p.mean_per_cell_snr_db},
                                        {"pooled_per_cell_snr_db", p.pooled_per_cell_snr_db},
                                        {"aggregate_snr_db", p.aggregate_snr_db},
                                        {"replicate_index", p.replicate_index}});
        }
        m.output(out + ".report.json", report.dump(2) + "\n");

        if (!svg.empty()) {
            // Replicate means per (N, step).
            std::map<std::size_t, std::map<double, std::pair<double, double>>> acc;
            for (const auto& p : result.points) {
                auto& a = acc[p.n_cells][p.delta];
                a.first += p.mean_per_cell_snr_db / static_cast<double>(replicates);
                a.second += p.aggregate_snr_db / static_cast<double>(replicates);
            }
            PlotSpec plot{"Aggregation (" + std::string(codec_name(id)) + ")", "mean per-cell SNR [dB]",
                          "aggregate SNR [dB]", {}};
            for (const auto& [n, by_delta] : acc) {
                PlotSeries s{"N=" + std::to_string(n), {}};
                for (const auto& [d, v] : by_delta) s.points.push_back(v);
                plot.series.push_back(std::move(s));
            }
            m.arg("--svg", svg);
            m.output(svg, render_svg(plot));
        }
        m.write();
        std::cout << "wrote " << result.points.size() << " aggregation points to " << out << '\n';
    }
};

// --- forecast -------------------------------------------------------------

struct ForecastCmd {
    InputFlags input;
    KltFlags klt;
    std::string codec = "klt";
    bool any_codec = false;
    bool clip = false;
    std::vector<double> deltas;
    std::string out = "forecast_points.csv";
    std::string svg;

    void add_to(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("forecast", "Median-weekly-signature forecasting from compressed history");
        input.add_to(*cmd);
        klt.add_to(*cmd);
        cmd->add_option("--codec", codec, "History codec (klt unless --explore-codecs)");
        cmd->add_flag("--explore-codecs", any_codec, "Allow codecs other than klt");
        cmd->add_flag("--clip-negative", clip, "Clamp reconstructed history at zero before forecasting");
        cmd->add_option("--deltas", deltas, "Strictly decreasing step ladder (default: data-driven)")->delimiter(',');
        cmd->add_option("-o,--out", out, "Output CSV");
        cmd->add_option("--svg", svg, "Also render RMSE vs per-cell SNR to this SVG file");
        cmd->callback([this] { run(); });
    }

    void run()
    {
        const auto id = codec_option(codec);
        if (id != CodecId::Klt && !any_codec) {
            throw UsageError("forecasting uses the klt codec; pass --explore-codecs to use '" + codec + "'");
        }
        Manifest m("forecast", out);
        const auto dataset = input.load(m);
        if (dataset.length() < 4 * kWeekLength) {
            throw TooShortError("forecasting needs 4 weeks (672 hourly samples) per cell: weeks 1-3 form the history "
                                "and week 4 the target; input has " + std::to_string(dataset.length()));
        }
        m.arg("--codec", std::string(codec_name(id)));
        if (any_codec) m.flag("--explore-codecs");
        if (clip) m.flag("--clip-negative");
        std::shared_ptr<const KltBasis> basis;
        if (id == CodecId::Klt) basis = klt.obtain(dataset, m, out);
        const auto kind = make_codec(id, basis);
        const auto ladder = resolve_deltas(deltas, dataset);
        m.arg("--deltas", deltas_arg(ladder));

        const auto result = forecasting_experiment(dataset, ladder, kind, {clip});
        std::string csv = "delta,mean_per_cell_snr_db,mean_rmse,cell_count\n";
        json rows = json::array();
        for (const auto& p : result.points) {
            csv += (p.delta ? fmt(*p.delta) : std::string("uncompressed")) + "," + fmt(p.mean_per_cell_snr_db) + "," +
                   fmt(p.mean_rmse) + "," + std::to_string(p.cell_count) + "\n";
            rows.push_back({{"delta", p.delta ? json(*p.delta) : json("uncompressed")},
                            {"mean_per_cell_snr_db", p.mean_per_cell_snr_db},
                            {"mean_rmse", p.mean_rmse},
                            {"cell_count", p.cell_count}});
        }
        m.arg("--out", out);
        m.output(out, csv);

        json report;
        report["command"] = "forecast";
        report["codec"] = codec_name(id);
        report["kpi"] = kpi_token(dataset.kpi());
        report["rmse_unit"] = kpi_unit(dataset.kpi());
        report["deltas"] = ladder;
        report["history_weeks"] = 3;
        report["zero_variance_cells_excluded_from_snr"] = result.zero_variance_cells;
        report["points"] = rows;
        if (basis) report["klt_training_cells_excluded"] = basis->training_cell_ids().size();
        m.output(out + ".report.json", report.dump(2) + "\n");

        if (!svg.empty()) {
            PlotSpec plot{"MWS forecasting (" + std::string(kpi_token(dataset.kpi())) + ")",
                          "mean per-cell SNR of history [dB]",
                          "mean RMSE [" + std::string(kpi_unit(dataset.kpi())) + "]", {}};
            PlotSeries compressed{std::string(codec_name(id)), {}};
            for (const auto& p : result.points)
                if (p.delta) compressed.points.emplace_back(p.mean_per_cell_snr_db, p.mean_rmse);
            PlotSeries baseline{"uncompressed", {}};
            if (!compressed.points.empty()) {
                double lo = compressed.points.front().first, hi = lo;
                for (auto [x, y] : compressed.points) lo = std::min(lo, x), hi = std::max(hi, x);
                baseline.points = {{lo, result.points.front().mean_rmse}, {hi, result.points.front().mean_rmse}};
            }
            plot.series = {compressed, baseline};
            m.arg("--svg", svg);
            m.output(svg, render_svg(plot));
        }
        m.write();
        std::cout << "wrote " << result.points.size() << " forecast points to " << out << '\n';
    }
};

// --- roundtrip ------------------------------------------------------------

struct RoundtripCmd {
    InputFlags input;
    KltFlags klt;
    std::string codec;
    double delta = 0.0;
    double delta_sigma = 0.0;
    std::string out = "encoded.kpcz";
    std::string decoded;
    std::string report_path;

    void add_to(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("roundtrip", "Encode to the binary artifact, decode it back and verify");
        input.add_to(*cmd);
        klt.add_to(*cmd);
        cmd->add_option("--codec", codec, "pcm | dpcm | dct | klt")->required();
        auto* d = cmd->add_option("--delta", delta, "Quantizer step")->check(CLI::PositiveNumber);
        auto* ds = cmd->add_option("--delta-sigma", delta_sigma, "Quantizer step as a multiple of the pooled std")
                       ->check(CLI::PositiveNumber);
        d->excludes(ds);
        cmd->add_option("-o,--out", out, "Encoded artifact path");
        cmd->add_option("--decoded", decoded, "Decoded CSV path (default <out>.decoded.csv)");
        cmd->add_option("--report", report_path, "Report path (default <out>.report.json)");
        cmd->callback([this] { run(); });
    }

    void run()
    {
        const auto id = codec_option(codec);
        if (delta <= 0.0 && delta_sigma <= 0.0) throw UsageError("roundtrip needs --delta or --delta-sigma");
        Manifest m("roundtrip", out);
        const auto dataset = input.load(m);
        m.arg("--codec", std::string(codec_name(id)));
        double step = delta;
        if (step <= 0.0) {
            // Ladder entry k = 1 is sigma itself.
            step = default_delta_ladder(dataset)[1] * delta_sigma;
        }
        m.arg("--delta", exact(step));

        std::shared_ptr<const KltBasis> basis;
        std::string basis_path;
        if (id == CodecId::Klt) {
            basis = klt.obtain(dataset, m, out);
            basis_path = klt.basis_in.empty() ? (klt.basis_out.empty() ? out + ".klt.json" : klt.basis_out)
                                              : klt.basis_in;
        }
        const auto kind = make_codec(id, basis);
        const auto run = run_codec(dataset, kind, step);
        const auto bytes = serialize_results(run.results, dataset.kpi(), dataset.start());
        m.output(out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));

        // Decode from what is on disk only: the artifact and, for KLT, the basis file.
        const auto stored = read_file(out);
        std::shared_ptr<const KltBasis> stored_basis;
        if (id == CodecId::Klt) stored_basis = std::make_shared<const KltBasis>(load_klt(basis_path));
        const auto artifact = deserialize_results(
            std::span(reinterpret_cast<const std::uint8_t*>(stored.data()), stored.size()), stored_basis);

        bool matches = artifact.cells.size() == run.results.size();
        for (std::size_t i = 0; matches && i < run.results.size(); ++i) {
            const auto& a = artifact.cells[i].reconstruction;
            const auto& b = run.results[i].reconstruction;
            matches = artifact.cells[i].cell_id == run.results[i].cell_id && a.size() == b.size() &&
                      std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
        }

        std::vector<CellSeries> cells;
        for (const auto& c : artifact.cells) cells.emplace_back(c.cell_id, dataset.kpi(), dataset.start(), c.reconstruction);
        const Dataset decoded_set(dataset.kpi(), std::move(cells));
        const auto decoded_path = decoded.empty() ? out + ".decoded.csv" : decoded;
        m.arg("--decoded", decoded_path);
        m.output(decoded_path, to_csv(decoded_set));

        std::vector<std::vector<double>> xs, ys;
        const auto evaluated = eligible_cells(dataset, kind);
        for (std::size_t i = 0; i < run.results.size(); ++i) {
            const auto s = evaluated.cells()[i].samples();
            xs.emplace_back(s.begin(), s.end());
            ys.push_back(run.results[i].reconstruction);
        }
        const auto snr = pooled_snr(xs, ys);
        const double rate = run.rate.bits_per_sample;
        const double samples = static_cast<double>(run.rate.total_count);

        json report;
        report["codec"] = codec_name(id);
        report["delta"] = step;
        report["cells"] = run.results.size();
        report["samples_per_cell"] = dataset.length();
        report["decode_matches"] = matches;
        report["entropy_bits_per_sample"] = rate;
        report["compression_factor_vs_float32"] = rate > 0.0 ? json(32.0 / rate) : json(nullptr);
        report["side_info_bits_per_sample"] = run.side_info_bits_per_sample;
        report["artifact_bytes"] = bytes.size();
        report["artifact_bits_per_sample"] = 8.0 * static_cast<double>(bytes.size()) / samples;
        report["pooled_snr_db"] = snr.snr_db;
        report["distinct_indices"] = run.rate.histogram.size();
        if (basis) {
            report["klt_basis"] = basis_path;
            report["klt_basis_counted_in_rate"] = false;
        }
        const auto rpath = report_path.empty() ? out + ".report.json" : report_path;
        m.arg("--report", rpath);
        m.arg("--out", out);
        m.output(rpath, report.dump(2) + "\n");
        m.write();

        std::cout << "decode matches: " << (matches ? "true" : "false") << '\n'
                  << "entropy rate: " << fmt(rate) << " bits/sample\n"
                  << "compression factor vs 32-bit float: " << (rate > 0.0 ? fmt(32.0 / rate) : "inf") << '\n'
                  << "pooled SNR: " << fmt(snr.snr_db) << " dB\n";
        if (!matches) throw std::runtime_error("decoded artifact differs from the in-memory reconstruction");
    }
};

int dispatch(std::vector<std::string> args);

struct ReplayCmd {
    std::string manifest;
    bool check = false;

    void add_to(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
        cmd->add_option("manifest", manifest, "Manifest JSON written by a previous run")->required();
        cmd->add_flag("--check", check, "Verify that every output hashes as recorded");
        cmd->callback([this] { run(); });
    }

    void run()
    {
        const auto j = json::parse(read_file(manifest));
        if (j.value("tool", "") != "kpicomp") throw UsageError("'" + manifest + "' is not a kpicomp manifest");
        const auto args = j.at("args").get<std::vector<std::string>>();
        if (const int rc = dispatch(args); rc != 0) throw std::runtime_error("replayed command failed");
        if (!check) return;
        for (const auto& o : j.at("outputs")) {
            const auto path = o.at("path").get<std::string>();
            if (content_hash(read_file(path)) != o.at("fnv1a64").get<std::string>()) {
                throw std::runtime_error("replayed output '" + path + "' differs from the manifest");
            }
        }
        std::cout << "replay matches manifest\n";
    }
};

int dispatch(std::vector<std::string> args)
{
    CLI::App app{"kpicomp: lossy compression of cellular KPI time series"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    SynthCmd synth;
    RdCmd rd;
    AggregateCmd aggregate;
    ForecastCmd forecast;
    RoundtripCmd roundtrip;
    ReplayCmd replay;
    synth.add_to(app);
    rd.add_to(app);
    aggregate.add_to(app);
    forecast.add_to(app);
    roundtrip.add_to(app);
    replay.add_to(app);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "kpicomp: usage: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "kpicomp: usage: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "kpicomp: error: parse: " << e.what() << '\n';
        return 1;
    } catch (const EmptyDatasetError& e) {
        std::cerr << "kpicomp: error: empty-dataset: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "kpicomp: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(std::move(args));
}
