#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpicomp/codecs.hpp"
#include "kpicomp/kpi_model.hpp"

namespace kpicomp {

// --- rate-distortion ------------------------------------------------------

struct RdPoint {
    CodecId codec;
    double delta;
    double rate_bits_per_sample;
    double snr_db;
    std::size_t eligible_cell_count;
    /// DPCM's uncoded first sample amortized at 32 bits; excluded from the rate.
    double side_info_bits_per_sample;
};

/// Throws std::invalid_argument unless every step is positive, finite and the ladder strictly decreases.
void validate_ladder(std::span<const double> deltas);

/// 16 steps sigma * 2^1 ... sigma * 2^-14, sigma the pooled sample standard deviation.
std::vector<double> default_delta_ladder(const Dataset& dataset);

/**
 * One point per (codec, step), ordered by codec then descending step. When a
 * KLT codec participates, every codec is evaluated on the cells outside its
 * training set so the curves share one eligible population.
 */
std::vector<RdPoint> rd_sweep(const Dataset& dataset, std::span<const CodecKind> codecs, std::span<const double> deltas);

/// Linear interpolation of SNR at `rate` along one codec's curve; nullopt outside the covered rate span.
std::optional<double> snr_at_rate(std::span<const RdPoint> curve, double rate);

// --- aggregation ----------------------------------------------------------

struct AggregationPoint {
    std::size_t n_cells;
    double delta;
    double mean_per_cell_snr_db;    ///< mean of per-cell dB values
    double pooled_per_cell_snr_db;  ///< pooled over the same cells, alternative reading
    double aggregate_snr_db;
    std::size_t replicate_index;
};

struct AggregationOptions {
    std::vector<std::size_t> n_values{10, 100, 1000};
    std::size_t replicates = 10;
    std::uint64_t seed = 1;
    bool clamp = true;
};

struct AggregationOutcome {
    std::vector<AggregationPoint> points;  ///< descending step, then N, then replicate
    std::vector<std::string> warnings;
};

/**
 * For every (step, N, replicate) sums N sampled cells before and after
 * compression and compares the aggregate SNR with the per-cell SNR. The cell
 * sample depends only on (seed, N, replicate), so each replicate tracks the
 * same cells across the step ladder.
 */
AggregationOutcome aggregation_experiment(const Dataset& dataset, const CodecKind& codec, std::span<const double> deltas,
                                          const AggregationOptions& options);

// --- forecasting ----------------------------------------------------------

/// Sample-wise median of three weekly history blocks.
std::vector<double> mws_forecast(std::span<const std::vector<double>> history);

struct ForecastPoint {
    std::optional<double> delta;  ///< nullopt for the uncompressed baseline
    double mean_per_cell_snr_db;
    double mean_rmse;
    std::size_t cell_count;
};

struct ForecastOptions {
    /// Clamp reconstructed history at zero before forming the signature.
    bool clip_nonnegative = false;
};

struct ForecastOutcome {
    std::vector<ForecastPoint> points;  ///< baseline first, then descending step
    std::size_t zero_variance_cells = 0;
};

/**
 * Weeks 1-3 are the history, week 4 the target. Each step compresses only
 * the history, builds the median weekly signature from the reconstruction
 * and scores it against the untouched week 4. Requires T >= 672; only the
 * first four weeks are used.
 */
ForecastOutcome forecasting_experiment(const Dataset& dataset, std::span<const double> deltas, const CodecKind& codec,
                                       const ForecastOptions& options = {});

}  // namespace kpicomp
