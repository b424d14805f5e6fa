#include "kpicomp/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpicomp/sampling.hpp"

namespace kpicomp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 2023-10-02T00:00:00Z, a Monday.
constexpr HourStamp kSynthStart = 19632 * 24;

class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // Box-Muller; 1 - u keeps the log argument in (0, 1].
        const double u1 = 1.0 - draw_unit(rng_);
        const double u2 = draw_unit(rng_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * draw_unit(rng_); }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

double median_scale(KpiKind kpi)
{
    switch (kpi) {
    case KpiKind::DownlinkVolume: return 400.0;
    case KpiKind::PrbOccupancy: return 30.0;
    case KpiKind::ActiveUsersRrc: return 20.0;
    }
    return 1.0;
}

/// One week of unit-level profile: 1 + daily * D(h) + weekly * W(n), each component peak-normalized.
std::array<double, kWeekLength> weekly_template(Gaussian& g, double daily_amplitude, double weekly_amplitude)
{
    // Daily shape: dominant 24 h cycle with an evening peak, plus 12 h and 8 h harmonics.
    const double peak_hour = g.uniform(17.0, 22.0);
    const std::array<double, 3> amp{1.0, g.uniform(0.2, 0.5), g.uniform(0.0, 0.2)};
    std::array<double, 3> phase{};
    for (std::size_t m = 0; m < 3; ++m) {
        phase[m] = -kTwoPi * static_cast<double>(m + 1) * peak_hour / 24.0 + (m == 0 ? 0.0 : g.uniform(-0.5, 0.5));
    }
    std::array<double, 24> daily{};
    double daily_peak = 0.0;
    for (std::size_t h = 0; h < 24; ++h) {
        double v = 0.0;
        for (std::size_t m = 0; m < 3; ++m) {
            v += amp[m] * std::cos(kTwoPi * static_cast<double>((m + 1) * h) / 24.0 + phase[m]);
        }
        daily[h] = v;
        daily_peak = std::max(daily_peak, std::fabs(v));
    }

    // Weekly modulation: weekday/weekend swing over the first two weekly harmonics.
    const double w_phase1 = g.uniform(0.0, kTwoPi);
    const double w_phase2 = g.uniform(0.0, kTwoPi);
    const double w_amp2 = g.uniform(0.2, 0.6);
    std::array<double, kWeekLength> weekly{};
    double weekly_peak = 0.0;
    for (std::size_t n = 0; n < kWeekLength; ++n) {
        const double t = static_cast<double>(n) / static_cast<double>(kWeekLength);
        weekly[n] = std::cos(kTwoPi * t + w_phase1) + w_amp2 * std::cos(2.0 * kTwoPi * t + w_phase2);
        weekly_peak = std::max(weekly_peak, std::fabs(weekly[n]));
    }

    std::array<double, kWeekLength> out{};
    for (std::size_t n = 0; n < kWeekLength; ++n) {
        out[n] = 1.0 + daily_amplitude * daily[n % 24] / daily_peak + weekly_amplitude * weekly[n] / weekly_peak;
    }
    return out;
}

}  // namespace

void SynthConfig::validate() const
{
    if (n_cells < 1) throw std::invalid_argument("synthetic dataset needs at least one cell");
    if (n_weeks < 1) throw std::invalid_argument("synthetic dataset needs at least one week");
    if (!(daily_amplitude >= 0.0) || !(weekly_amplitude >= 0.0)) {
        throw std::invalid_argument("amplitudes must be nonnegative");
    }
    if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be nonnegative");
    if (!(cell_scale_lognormal_sigma >= 0.0)) throw std::invalid_argument("scale sigma must be nonnegative");
    if (!(inter_cell_pattern_correlation >= 0.0 && inter_cell_pattern_correlation <= 1.0)) {
        throw std::invalid_argument("inter-cell pattern correlation must lie in [0, 1]");
    }
}

Dataset generate(const SynthConfig& config)
{
    config.validate();
    Gaussian shared_rng(derive_seed(config.seed, 0));
    const auto shared = weekly_template(shared_rng, config.daily_amplitude, config.weekly_amplitude);
    const double rho = config.inter_cell_pattern_correlation;
    const double median = median_scale(config.kpi);
    const std::size_t length = config.n_weeks * kWeekLength;

    std::vector<CellSeries> cells;
    cells.reserve(config.n_cells);
    const int width = config.n_cells > 9999 ? static_cast<int>(std::to_string(config.n_cells - 1).size()) : 4;
    for (std::size_t c = 0; c < config.n_cells; ++c) {
        Gaussian g(derive_seed(config.seed, c + 1));
        const double scale = median * std::exp(config.cell_scale_lognormal_sigma * g());
        const auto own = weekly_template(g, config.daily_amplitude, config.weekly_amplitude);

        std::vector<double> samples(length);
        for (std::size_t n = 0; n < length; ++n) {
            const auto slot = n % kWeekLength;
            const double base = rho * shared[slot] + (1.0 - rho) * own[slot];
            double v = scale * std::max(0.0, base + config.noise_std * g());
            if (config.kpi == KpiKind::PrbOccupancy) v = std::clamp(v, 0.0, 100.0);
            if (config.kpi == KpiKind::ActiveUsersRrc) v = std::round(v);
            samples[n] = v;
        }
        char id[32];
        std::snprintf(id, sizeof id, "cell%0*zu", width, c);
        cells.emplace_back(id, config.kpi, kSynthStart, std::move(samples));
    }
    return Dataset(config.kpi, std::move(cells));
}

}  // namespace kpicomp
