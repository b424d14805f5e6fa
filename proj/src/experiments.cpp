#include "kpicomp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kpicomp/metrics.hpp"
#include "kpicomp/parallel.hpp"
#include "kpicomp/sampling.hpp"

namespace kpicomp {

void validate_ladder(std::span<const double> deltas)
{
    if (deltas.empty()) throw std::invalid_argument("step ladder is empty");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0) || !std::isfinite(deltas[i])) {
            throw std::invalid_argument("quantizer steps must be positive and finite");
        }
        if (i > 0 && !(deltas[i] < deltas[i - 1])) {
            throw std::invalid_argument("quantizer steps must be strictly decreasing");
        }
    }
}

std::vector<double> default_delta_ladder(const Dataset& dataset)
{
    std::size_t count = 0;
    double sum = 0.0;
    for (const auto& c : dataset.cells()) {
        for (double v : c.samples()) sum += v;
        count += c.size();
    }
    if (count < 2) throw ZeroVarianceError("step ladder needs at least two samples");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& c : dataset.cells())
        for (double v : c.samples()) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(count - 1));
    if (!(sigma > 0.0)) throw ZeroVarianceError("dataset has zero variance; no data-driven step ladder exists");

    std::vector<double> ladder;
    for (int k = 0; k < 16; ++k) ladder.push_back(std::ldexp(sigma, 1 - k));
    return ladder;
}

namespace {

std::vector<std::vector<double>> originals_of(const Dataset& dataset)
{
    std::vector<std::vector<double>> out;
    out.reserve(dataset.cell_count());
    for (const auto& c : dataset.cells()) out.emplace_back(c.samples().begin(), c.samples().end());
    return out;
}

std::vector<std::vector<double>> reconstructions_of(const CodecRun& run)
{
    std::vector<std::vector<double>> out;
    out.reserve(run.results.size());
    for (const auto& r : run.results) out.push_back(r.reconstruction);
    return out;
}

}  // namespace

std::vector<RdPoint> rd_sweep(const Dataset& dataset, std::span<const CodecKind> codecs, std::span<const double> deltas)
{
    validate_ladder(deltas);
    if (codecs.empty()) throw std::invalid_argument("no codec requested");

    // Shared eligible population: exclude every KLT training cell for all codecs.
    Dataset population = dataset;
    for (const auto& codec : codecs) {
        if (codec.id() == CodecId::Klt) population = population.without(codec.klt_basis()->training_cell_ids());
    }
    if (population.cell_count() == 0) throw EmptyDatasetError("no cell left outside the KLT training set");
    const auto originals = originals_of(population);

    std::vector<CodecKind> ordered(codecs.begin(), codecs.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const CodecKind& a, const CodecKind& b) { return a.id() < b.id(); });

    std::vector<RdPoint> points;
    for (const auto& codec : ordered) {
        for (double delta : deltas) {
            const auto run = run_codec(population, codec, delta);
            const auto snr = pooled_snr(originals, reconstructions_of(run));
            points.push_back({codec.id(), delta, run.rate.bits_per_sample, snr.snr_db, run.results.size(),
                              run.side_info_bits_per_sample});
        }
    }
    return points;
}

std::optional<double> snr_at_rate(std::span<const RdPoint> curve, double rate)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve) pts.emplace_back(p.rate_bits_per_sample, p.snr_db);
    std::sort(pts.begin(), pts.end());
    if (pts.empty() || rate < pts.front().first || rate > pts.back().first) return std::nullopt;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto [r0, s0] = pts[i - 1];
        const auto [r1, s1] = pts[i];
        if (rate <= r1) {
            if (r1 == r0) return std::max(s0, s1);
            return s0 + (s1 - s0) * (rate - r0) / (r1 - r0);
        }
    }
    return pts.back().second;
}

AggregationOutcome aggregation_experiment(const Dataset& dataset, const CodecKind& codec, std::span<const double> deltas,
                                          const AggregationOptions& options)
{
    validate_ladder(deltas);
    if (options.n_values.empty()) throw std::invalid_argument("no aggregation sizes requested");
    if (options.replicates == 0) throw std::invalid_argument("at least one replicate is required");

    const auto population = eligible_cells(dataset, codec);
    const auto available = population.cell_count();
    if (available == 0) throw EmptyDatasetError("no cell eligible for aggregation");

    AggregationOutcome out;
    std::vector<std::size_t> sizes;
    for (auto n : options.n_values) {
        if (n == 0) throw std::invalid_argument("aggregation size must be positive");
        if (n > available) {
            if (!options.clamp) {
                throw std::invalid_argument("aggregation size " + std::to_string(n) + " exceeds the " +
                                            std::to_string(available) + " eligible cells");
            }
            out.warnings.push_back("aggregation size " + std::to_string(n) + " clamped to " +
                                   std::to_string(available) + " eligible cells");
            n = available;
        }
        sizes.push_back(n);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    // Cell subsets depend only on (seed, N, replicate).
    std::vector<std::vector<std::vector<std::size_t>>> subsets(sizes.size());
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        for (std::size_t r = 0; r < options.replicates; ++r) {
            const auto stream = static_cast<std::uint64_t>(sizes[s]) * 1'000'003ULL + r;
            subsets[s].push_back(sample_without_replacement(available, sizes[s], derive_seed(options.seed, stream)));
        }
    }

    const auto originals = originals_of(population);
    const std::size_t length = population.length();
    for (double delta : deltas) {
        const auto run = run_codec(population, codec, delta);
        const auto recon = reconstructions_of(run);
        for (std::size_t s = 0; s < sizes.size(); ++s) {
            for (std::size_t r = 0; r < options.replicates; ++r) {
                const auto& pick = subsets[s][r];
                std::vector<double> sum(length, 0.0);
                std::vector<double> sum_hat(length, 0.0);
                std::vector<std::vector<double>> xs;
                std::vector<std::vector<double>> ys;
                for (auto idx : pick) {
                    for (std::size_t n = 0; n < length; ++n) {
                        sum[n] += originals[idx][n];
                        sum_hat[n] += recon[idx][n];
                    }
                    xs.push_back(originals[idx]);
                    ys.push_back(recon[idx]);
                }
                const auto per_cell = mean_per_cell_snr(xs, ys);
                const auto pooled = pooled_snr(xs, ys);
                const auto aggregate = per_cell_snr(sum, sum_hat);
                out.points.push_back({sizes[s], delta, per_cell.mean_db, pooled.snr_db, aggregate.snr_db, r});
            }
        }
    }
    return out;
}

std::vector<double> mws_forecast(std::span<const std::vector<double>> history)
{
    if (history.size() != 3) {
        throw std::invalid_argument("median weekly signature needs exactly 3 history weeks, got " +
                                    std::to_string(history.size()));
    }
    for (const auto& w : history) {
        if (w.size() != kWeekLength) throw DimensionError("history weeks must have 168 samples");
    }
    std::vector<double> signature(kWeekLength);
    for (std::size_t j = 0; j < kWeekLength; ++j) {
        const double a = history[0][j];
        const double b = history[1][j];
        const double c = history[2][j];
        signature[j] = std::max(std::min(a, b), std::min(std::max(a, b), c));
    }
    return signature;
}

namespace {

constexpr std::size_t kHistoryWeeks = 3;
constexpr std::size_t kHistoryLength = kHistoryWeeks * kWeekLength;

std::vector<std::vector<double>> split_weeks(std::span<const double> samples)
{
    std::vector<std::vector<double>> weeks;
    for (std::size_t w = 0; w < kHistoryWeeks; ++w) {
        auto s = samples.subspan(w * kWeekLength, kWeekLength);
        weeks.emplace_back(s.begin(), s.end());
    }
    return weeks;
}

}  // namespace

ForecastOutcome forecasting_experiment(const Dataset& dataset, std::span<const double> deltas, const CodecKind& codec,
                                       const ForecastOptions& options)
{
    if (dataset.length() < 4 * kWeekLength) {
        throw TooShortError("forecasting needs 4 weeks (672 hourly samples) per cell: 3 of history and 1 target; "
                            "dataset has " + std::to_string(dataset.length()));
    }
    validate_ladder(deltas);
    const auto population = eligible_cells(dataset, codec);
    const auto n_cells = population.cell_count();
    if (n_cells == 0) throw EmptyDatasetError("no cell eligible for forecasting");

    std::vector<CellSeries> histories;
    std::vector<std::vector<double>> history_values;
    std::vector<std::vector<double>> targets;
    for (const auto& c : population.cells()) {
        const auto s = c.samples();
        histories.emplace_back(c.cell_id(), c.kpi(), c.start(),
                               std::vector<double>(s.begin(), s.begin() + kHistoryLength));
        history_values.emplace_back(s.begin(), s.begin() + kHistoryLength);
        targets.emplace_back(s.begin() + kHistoryLength, s.begin() + kHistoryLength + kWeekLength);
    }

    auto score = [&](const std::vector<std::vector<double>>& seen) {
        double total = 0.0;
        for (std::size_t c = 0; c < n_cells; ++c) {
            const auto weeks = split_weeks(seen[c]);
            total += rmse(mws_forecast(weeks), targets[c]);
        }
        return total / static_cast<double>(n_cells);
    };

    ForecastOutcome out;
    {
        const auto snr = mean_per_cell_snr(history_values, history_values);
        out.zero_variance_cells = snr.excluded;
        out.points.push_back({std::nullopt, snr.mean_db, score(history_values), n_cells});
    }

    for (double delta : deltas) {
        std::vector<std::vector<double>> recon(n_cells);
        parallel_for(n_cells, [&](std::size_t c) {
            recon[c] = encode(histories[c], codec, delta).reconstruction;
            if (options.clip_nonnegative) {
                for (auto& v : recon[c]) v = std::max(v, 0.0);
            }
        });
        const auto snr = mean_per_cell_snr(history_values, recon);
        out.points.push_back({delta, snr.mean_db, score(recon), n_cells});
    }
    return out;
}

}  // namespace kpicomp
