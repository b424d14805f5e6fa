#include <doctest.h>

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "kpicomp/experiments.hpp"
#include "kpicomp/synth.hpp"

using namespace kpicomp;

namespace {

double lag_autocorrelation(std::span<const double> x, std::size_t lag)
{
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i + lag < x.size()) num += (x[i] - mean) * (x[i + lag] - mean);
    }
    return num / den;
}

// KLT minus DCT SNR at a matched rate, both interpolated on a shared ladder.
double klt_gap(const SynthConfig& cfg, double rate)
{
    const auto ds = generate(cfg);
    const auto basis = std::make_shared<const KltBasis>(train_klt(ds, {0.2, 1}));
    const std::vector<CodecKind> codecs{CodecKind::dct(), CodecKind::klt(basis)};
    const auto ladder = default_delta_ladder(ds);
    const auto pts = rd_sweep(ds, codecs, ladder);
    const std::span<const RdPoint> all(pts);
    const auto dct = snr_at_rate(all.subspan(0, ladder.size()), rate);
    const auto klt = snr_at_rate(all.subspan(ladder.size()), rate);
    REQUIRE(dct.has_value());
    REQUIRE(klt.has_value());
    return *klt - *dct;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed gives identical datasets")
{
    SynthConfig cfg;
    cfg.n_cells = 20;
    CHECK(generate(cfg) == generate(cfg));
    auto other = cfg;
    other.seed = 2;
    CHECK_FALSE(generate(other) == generate(cfg));
}

TEST_CASE("shape, bounds and invariants per KPI")
{
    for (auto kpi : {KpiKind::DownlinkVolume, KpiKind::PrbOccupancy, KpiKind::ActiveUsersRrc}) {
        SynthConfig cfg;
        cfg.kpi = kpi;
        cfg.n_cells = 25;
        cfg.n_weeks = 2;
        cfg.noise_std = 0.4;
        const auto ds = generate(cfg);
        CHECK(ds.cell_count() == 25);
        CHECK(ds.length() == 336);
        CHECK(ds.kpi() == kpi);
        CHECK(format_hour_stamp(ds.start()) == "2023-10-02T00:00:00Z");
        for (const auto& c : ds.cells()) {
            for (double v : c.samples()) {
                REQUIRE(std::isfinite(v));
                REQUIRE(v >= 0.0);
                if (kpi == KpiKind::PrbOccupancy) REQUIRE(v <= 100.0);
                if (kpi == KpiKind::ActiveUsersRrc) REQUIRE(v == std::round(v));
            }
        }
    }
}

TEST_CASE("volume series show a strong daily cycle")
{
    SynthConfig cfg;
    cfg.n_cells = 30;
    const auto ds = generate(cfg);
    for (const auto& c : ds.cells()) CHECK(lag_autocorrelation(c.samples(), 24) > 0.5);
}

TEST_CASE("noise-free fully correlated cells are scaled copies of one week")
{
    SynthConfig cfg;
    cfg.n_cells = 6;
    cfg.noise_std = 0.0;
    cfg.inter_cell_pattern_correlation = 1.0;
    const auto ds = generate(cfg);
    const auto& ref = ds.cells()[0].samples();
    for (const auto& c : ds.cells()) {
        const auto& s = c.samples();
        const double ratio = s[0] / ref[0];
        for (std::size_t n = 0; n < s.size(); ++n) {
            CHECK(s[n] == s[n % 168]);
            CHECK(s[n] == doctest::Approx(ratio * ref[n % 168]).epsilon(1e-12));
        }
    }
}

TEST_CASE("configuration validation")
{
    auto bad = [](auto mutate) {
        SynthConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(bad([](SynthConfig& c) { c.n_weeks = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SynthConfig& c) { c.n_cells = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SynthConfig& c) { c.daily_amplitude = -0.1; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SynthConfig& c) { c.inter_cell_pattern_correlation = 1.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SynthConfig& c) { c.noise_std = -1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS(generate(bad([](SynthConfig& c) { c.n_weeks = 0; })));
}

TEST_CASE("uncorrelated noisy cells shrink the KLT advantage")
{
    SynthConfig correlated;
    correlated.n_cells = 150;
    SynthConfig noisy = correlated;
    noisy.inter_cell_pattern_correlation = 0.0;
    noisy.noise_std = 1.0;
    CHECK(klt_gap(noisy, 3.0) < klt_gap(correlated, 3.0));
}

}
