#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kpicomp {

/// SNR reported when the reconstruction is exact.
inline constexpr double kSnrCapDb = 300.0;

class ZeroVarianceError : public std::domain_error {
    using std::domain_error::domain_error;
};

struct SnrReport {
    double snr_db = 0.0;
    double mse = 0.0;
    double signal_variance = 0.0;  ///< population variance of the originals
};

/// SNR = 10 log10(Var(x) / E[(x - x̂)²]) with variance and expectation pooled over all vectors.
SnrReport pooled_snr(std::span<const std::vector<double>> originals,
                     std::span<const std::vector<double>> reconstructions);

SnrReport per_cell_snr(std::span<const double> original, std::span<const double> reconstruction);

double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Mean of per-cell dB values over cells with nonzero variance.
struct MeanSnr {
    double mean_db = 0.0;
    std::size_t included = 0;
    std::size_t excluded = 0;  ///< zero-variance cells
};

MeanSnr mean_per_cell_snr(std::span<const std::vector<double>> originals,
                          std::span<const std::vector<double>> reconstructions);

}  // namespace kpicomp
