#include "kpicomp/metrics.hpp"

#include <cmath>
#include <string>

namespace kpicomp {

namespace {

SnrReport snr_from(double variance, double mse)
{
    if (!(variance > 0.0)) throw ZeroVarianceError("signal variance is zero; SNR undefined");
    SnrReport r;
    r.signal_variance = variance;
    r.mse = mse;
    r.snr_db = mse > 0.0 ? 10.0 * std::log10(variance / mse) : kSnrCapDb;
    return r;
}

}  // namespace

SnrReport pooled_snr(std::span<const std::vector<double>> originals,
                     std::span<const std::vector<double>> reconstructions)
{
    if (originals.size() != reconstructions.size()) throw std::invalid_argument("SNR inputs differ in cell count");
    std::size_t count = 0;
    double sum = 0.0;
    for (std::size_t c = 0; c < originals.size(); ++c) {
        if (originals[c].size() != reconstructions[c].size()) {
            throw std::invalid_argument("SNR inputs differ in length for cell " + std::to_string(c));
        }
        for (double v : originals[c]) sum += v;
        count += originals[c].size();
    }
    if (count < 2) throw std::invalid_argument("SNR needs at least two samples");
    const double n = static_cast<double>(count);
    const double mean = sum / n;
    double var = 0.0;
    double err = 0.0;
    for (std::size_t c = 0; c < originals.size(); ++c) {
        const auto& x = originals[c];
        const auto& y = reconstructions[c];
        for (std::size_t i = 0; i < x.size(); ++i) {
            var += (x[i] - mean) * (x[i] - mean);
            err += (x[i] - y[i]) * (x[i] - y[i]);
        }
    }
    return snr_from(var / n, err / n);
}

SnrReport per_cell_snr(std::span<const double> original, std::span<const double> reconstruction)
{
    const std::vector<std::vector<double>> x{{original.begin(), original.end()}};
    const std::vector<std::vector<double>> y{{reconstruction.begin(), reconstruction.end()}};
    return pooled_snr(x, y);
}

double rmse(std::span<const double> predicted, std::span<const double> actual)
{
    if (predicted.size() != actual.size()) throw std::invalid_argument("RMSE inputs differ in length");
    if (predicted.empty()) throw std::invalid_argument("RMSE of empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predicted.size()));
}

MeanSnr mean_per_cell_snr(std::span<const std::vector<double>> originals,
                          std::span<const std::vector<double>> reconstructions)
{
    if (originals.size() != reconstructions.size()) throw std::invalid_argument("SNR inputs differ in cell count");
    MeanSnr out;
    double sum = 0.0;
    for (std::size_t c = 0; c < originals.size(); ++c) {
        try {
            sum += per_cell_snr(originals[c], reconstructions[c]).snr_db;
            ++out.included;
        } catch (const ZeroVarianceError&) {
            ++out.excluded;
        }
    }
    if (out.included == 0) throw ZeroVarianceError("every cell has zero variance");
    out.mean_db = sum / static_cast<double>(out.included);
    return out;
}

}  // namespace kpicomp
