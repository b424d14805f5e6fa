#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kpicomp/experiments.hpp"
#include "kpicomp/metrics.hpp"
#include "kpicomp/synth.hpp"

using namespace kpicomp;

namespace {

double sample_std(const Dataset& ds)
{
    double sum = 0.0, n = 0.0;
    for (const auto& c : ds.cells())
        for (double v : c.samples()) sum += v, n += 1.0;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& c : ds.cells())
        for (double v : c.samples()) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

Dataset scaled(const Dataset& ds, double s)
{
    std::vector<CellSeries> cells;
    for (const auto& c : ds.cells()) {
        std::vector<double> v(c.samples().begin(), c.samples().end());
        for (auto& x : v) x *= s;
        cells.emplace_back(c.cell_id(), c.kpi(), c.start(), std::move(v));
    }
    return Dataset(ds.kpi(), std::move(cells));
}

Dataset small_synth(std::size_t cells, std::uint64_t seed = 1)
{
    SynthConfig cfg;
    cfg.n_cells = cells;
    cfg.seed = seed;
    return generate(cfg);
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("step ladder validation")
{
    CHECK_NOTHROW(validate_ladder(std::vector<double>{4.0, 2.0, 1.0}));
    CHECK_THROWS(validate_ladder(std::vector<double>{}));
    CHECK_THROWS(validate_ladder(std::vector<double>{1.0, 2.0}));
    CHECK_THROWS(validate_ladder(std::vector<double>{1.0, 1.0}));
    CHECK_THROWS(validate_ladder(std::vector<double>{1.0, -0.5}));
    CHECK_THROWS(validate_ladder(std::vector<double>{INFINITY, 1.0}));
}

TEST_CASE("default ladder follows the sample deviation")
{
    const auto ds = small_synth(5);
    const auto ladder = default_delta_ladder(ds);
    const double sigma = sample_std(ds);
    REQUIRE(ladder.size() == 16);
    CHECK(ladder.front() == doctest::Approx(2.0 * sigma).epsilon(1e-12));
    CHECK(ladder.back() == doctest::Approx(sigma * std::ldexp(1.0, -14)).epsilon(1e-12));
    CHECK_NOTHROW(validate_ladder(ladder));

    const auto ten = default_delta_ladder(scaled(ds, 10.0));
    for (std::size_t i = 0; i < ladder.size(); ++i) CHECK(ten[i] == doctest::Approx(10.0 * ladder[i]).epsilon(1e-12));

    const Dataset flat(KpiKind::DownlinkVolume, {CellSeries("f", KpiKind::DownlinkVolume, 0, std::vector<double>(168, 3.0))});
    CHECK_THROWS_AS(default_delta_ladder(flat), ZeroVarianceError);
}

TEST_CASE("single-step PCM sweep is one run plus one SNR")
{
    const auto ds = small_synth(6);
    const std::vector<CodecKind> codecs{CodecKind::pcm()};
    const std::vector<double> deltas{3.0};
    const auto points = rd_sweep(ds, codecs, deltas);
    REQUIRE(points.size() == 1);
    const auto run = run_codec(ds, CodecKind::pcm(), 3.0);
    std::vector<std::vector<double>> x, y;
    for (std::size_t i = 0; i < ds.cell_count(); ++i) {
        x.emplace_back(ds.cells()[i].samples().begin(), ds.cells()[i].samples().end());
        y.push_back(run.results[i].reconstruction);
    }
    CHECK(points[0].rate_bits_per_sample == run.rate.bits_per_sample);
    CHECK(points[0].snr_db == pooled_snr(x, y).snr_db);
    CHECK(points[0].eligible_cell_count == 6);
}

TEST_CASE("PCM gains about 6 dB per halving at high rate")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::vector<CellSeries> cells;
    for (int c = 0; c < 10; ++c) {
        std::vector<double> v(10000);
        for (auto& s : v) s = u(rng);
        cells.emplace_back("u" + std::to_string(c), KpiKind::DownlinkVolume, 0, std::move(v));
    }
    const Dataset ds(KpiKind::DownlinkVolume, std::move(cells));
    const std::vector<CodecKind> codecs{CodecKind::pcm()};
    const std::vector<double> deltas{1.0, 0.5, 0.25, 0.125};
    const auto pts = rd_sweep(ds, codecs, deltas);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(std::fabs(pts[i].snr_db - pts[i - 1].snr_db - 6.02) < 0.5);
}

TEST_CASE("rd sweep ordering, shared population and monotone curves")
{
    const auto ds = small_synth(40);
    const auto basis = std::make_shared<const KltBasis>(train_klt(ds, {0.25, 1}));
    const std::vector<CodecKind> codecs{CodecKind::klt(basis), CodecKind::pcm(), CodecKind::dct(), CodecKind::dpcm()};
    const auto ladder = default_delta_ladder(ds);
    const auto pts = rd_sweep(ds, codecs, ladder);
    REQUIRE(pts.size() == 4 * ladder.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(static_cast<int>(pts[i].codec) == static_cast<int>(i / ladder.size()));
        CHECK(pts[i].delta == ladder[i % ladder.size()]);
        CHECK(pts[i].eligible_cell_count == 30);
        if (i % ladder.size() != 0) {
            CHECK(pts[i].rate_bits_per_sample >= pts[i - 1].rate_bits_per_sample);
            CHECK(pts[i].snr_db >= pts[i - 1].snr_db);
        }
    }
    CHECK(pts[ladder.size()].side_info_bits_per_sample > 0.0);
}

TEST_CASE("rate interpolation")
{
    const std::vector<RdPoint> curve{{CodecId::Pcm, 2.0, 1.0, 10.0, 1, 0.0}, {CodecId::Pcm, 1.0, 2.0, 16.0, 1, 0.0}};
    CHECK(*snr_at_rate(curve, 1.5) == doctest::Approx(13.0));
    CHECK(*snr_at_rate(curve, 1.0) == doctest::Approx(10.0));
    CHECK_FALSE(snr_at_rate(curve, 0.5).has_value());
    CHECK_FALSE(snr_at_rate(curve, 2.5).has_value());
}

TEST_CASE("median weekly signature")
{
    std::vector<double> w(168);
    for (std::size_t i = 0; i < 168; ++i) w[i] = std::sin(0.1 * static_cast<double>(i));
    CHECK(mws_forecast(std::vector<std::vector<double>>{w, w, w}) == w);

    auto a = std::vector<double>(168, 1.0), b = std::vector<double>(168, 2.0), c = std::vector<double>(168, 10.0);
    CHECK(mws_forecast(std::vector<std::vector<double>>{c, a, b}) == std::vector<double>(168, 2.0));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    std::vector<double> w1(168), w2(168), w3(168);
    for (std::size_t i = 0; i < 168; ++i) w1[i] = d(rng), w2[i] = d(rng), w3[i] = w1[i] + 1000.0;
    const auto sig = mws_forecast(std::vector<std::vector<double>>{w1, w2, w3});
    for (std::size_t i = 0; i < 168; ++i) {
        CHECK(sig[i] >= std::min(w1[i], w2[i]));
        CHECK(sig[i] <= std::max(w1[i], w2[i]) + 1e-12);
    }
    std::vector<std::vector<double>> weeks{w1, w2, w3};
    std::sort(weeks.begin(), weeks.end());
    do {
        CHECK(mws_forecast(weeks) == sig);
    } while (std::next_permutation(weeks.begin(), weeks.end()));

    CHECK_THROWS(mws_forecast(std::vector<std::vector<double>>{w1, w2}));
    CHECK_THROWS(mws_forecast(std::vector<std::vector<double>>{w1, w2, std::vector<double>(100)}));
}

TEST_CASE("aggregation of one cell reproduces the per-cell SNR")
{
    const auto ds = small_synth(12);
    AggregationOptions opt;
    opt.n_values = {1};
    opt.replicates = 3;
    const std::vector<double> deltas{20.0, 0.5};
    const auto out = aggregation_experiment(ds, CodecKind::dct(), deltas, opt);
    REQUIRE(out.points.size() == 6);
    for (const auto& p : out.points) {
        CHECK(p.aggregate_snr_db == p.mean_per_cell_snr_db);
        CHECK(p.aggregate_snr_db == p.pooled_per_cell_snr_db);
    }
    CHECK(out.points[0].delta == 20.0);
    CHECK(out.points[5].replicate_index == 2);
}

TEST_CASE("aggregation clamps or rejects oversize N")
{
    const auto ds = small_synth(8);
    AggregationOptions opt;
    opt.n_values = {5, 50};
    opt.replicates = 1;
    const std::vector<double> deltas{1.0};
    const auto out = aggregation_experiment(ds, CodecKind::pcm(), deltas, opt);
    CHECK(out.warnings.size() == 1);
    CHECK(out.points.back().n_cells == 8);
    opt.clamp = false;
    CHECK_THROWS_AS(aggregation_experiment(ds, CodecKind::pcm(), deltas, opt), std::invalid_argument);
}

TEST_CASE("aggregation gain follows 10 log10 N for independent errors")
{
    // Nearly identical cells: a common waveform plus a per-cell dither several steps wide,
    // so every cell's PCM error is an independent uniform variable.
    const double delta = 0.2;
    std::mt19937_64 rng(100);
    std::normal_distribution<double> shape(0.0, 50.0);
    std::uniform_real_distribution<double> dither(-2.0, 2.0);
    std::vector<double> w(168);
    for (auto& v : w) v = 200.0 + shape(rng);
    std::vector<CellSeries> cells;
    for (int c = 0; c < 150; ++c) {
        auto v = w;
        for (auto& s : v) s += dither(rng);
        cells.emplace_back("id" + std::to_string(1000 + c), KpiKind::DownlinkVolume, 0, std::move(v));
    }
    const Dataset ds(KpiKind::DownlinkVolume, std::move(cells));
    AggregationOptions opt;
    opt.n_values = {100};
    opt.replicates = 10;
    const std::vector<double> deltas{delta};
    const auto out = aggregation_experiment(ds, CodecKind::pcm(), deltas, opt);
    REQUIRE(out.points.size() == 10);
    double gain = 0.0;
    for (const auto& p : out.points) gain += p.aggregate_snr_db - p.mean_per_cell_snr_db;
    gain /= 10.0;
    CHECK(std::fabs(gain - 20.0) <= 1.0);
}

TEST_CASE("aggregation sampling depends only on seed, N and replicate")
{
    const auto ds = small_synth(30);
    AggregationOptions opt;
    opt.n_values = {4, 9};
    opt.replicates = 2;
    const std::vector<double> wide{8.0, 1.0}, narrow{1.0};
    const auto a = aggregation_experiment(ds, CodecKind::pcm(), wide, opt);
    const auto b = aggregation_experiment(ds, CodecKind::pcm(), narrow, opt);
    REQUIRE(b.points.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.points[4 + i].aggregate_snr_db == b.points[i].aggregate_snr_db);
        CHECK(a.points[4 + i].mean_per_cell_snr_db == b.points[i].mean_per_cell_snr_db);
    }
}

TEST_CASE("forecasting: lossless limit, baseline first, purity")
{
    const auto ds = small_synth(30, 3);
    const auto basis = std::make_shared<const KltBasis>(train_klt(ds, {0.3, 2}));
    const std::vector<double> deltas{50.0, 5.0, 1e-7};
    const auto out = forecasting_experiment(ds, deltas, CodecKind::klt(basis));
    REQUIRE(out.points.size() == 4);
    CHECK_FALSE(out.points[0].delta.has_value());
    CHECK(out.points[0].mean_per_cell_snr_db == kSnrCapDb);
    CHECK(*out.points[1].delta == 50.0);
    CHECK(out.points[0].cell_count == 21);
    const double base = out.points[0].mean_rmse;
    CHECK(std::fabs(out.points[3].mean_rmse - base) <= 1e-6 * base);
    for (const auto& p : out.points) CHECK(p.mean_rmse >= 0.0);

    const auto again = forecasting_experiment(ds, deltas, CodecKind::klt(basis));
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        CHECK(again.points[i].mean_rmse == out.points[i].mean_rmse);
        CHECK(again.points[i].mean_per_cell_snr_db == out.points[i].mean_per_cell_snr_db);
    }
}

TEST_CASE("forecasting on noise-free periodic data has zero baseline error")
{
    SynthConfig cfg;
    cfg.n_cells = 10;
    cfg.noise_std = 0.0;
    cfg.inter_cell_pattern_correlation = 1.0;
    const auto ds = generate(cfg);
    const std::vector<double> deltas{1.0};
    const auto out = forecasting_experiment(ds, deltas, CodecKind::dct());
    CHECK(out.points[0].mean_rmse == 0.0);
}

TEST_CASE("forecasting needs four weeks")
{
    SynthConfig cfg;
    cfg.n_cells = 4;
    cfg.n_weeks = 3;
    const std::vector<double> deltas{1.0};
    CHECK_THROWS_AS(forecasting_experiment(generate(cfg), deltas, CodecKind::dct()), TooShortError);
}

}
