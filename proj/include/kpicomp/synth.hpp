#pragma once

#include <cstddef>
#include <cstdint>

#include "kpicomp/kpi_model.hpp"

namespace kpicomp {

/// Traffic-like synthetic dataset parameters. Amplitudes and noise are relative to a unit base level.
struct SynthConfig {
    KpiKind kpi = KpiKind::DownlinkVolume;
    std::size_t n_cells = 300;
    std::size_t n_weeks = 4;
    std::uint64_t seed = 1;
    double daily_amplitude = 0.6;
    double weekly_amplitude = 0.25;
    double noise_std = 0.05;
    double cell_scale_lognormal_sigma = 0.5;
    /// Weight of the city-wide template against the cell-private one.
    double inter_cell_pattern_correlation = 0.8;

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

/**
 * value[n] = scale_c * max(0, base_c(n) + noise), with
 * base_c = rho * shared(n) + (1 - rho) * private_c(n).
 *
 * Templates repeat every 168 hours and mix 24 h harmonics with a weekly
 * modulation. PRB occupancy is clipped to [0, 100] and active users are
 * rounded. Every cell draws from its own seed stream.
 */
Dataset generate(const SynthConfig& config);

}  // namespace kpicomp
