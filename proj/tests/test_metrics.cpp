#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kpicomp/metrics.hpp"

using namespace kpicomp;

namespace {

using Cells = std::vector<std::vector<double>>;

}

TEST_SUITE("metrics") {

TEST_CASE("exact reconstruction hits the cap")
{
    const Cells x{{1.0, 2.0, 5.0}};
    const auto r = pooled_snr(x, x);
    CHECK(r.mse == 0.0);
    CHECK(r.snr_db == kSnrCapDb);
    CHECK(per_cell_snr(x[0], x[0]).snr_db == kSnrCapDb);
}

TEST_CASE("error power equal to signal variance gives 0 dB")
{
    const std::vector<double> x{0.0, 2.0}, y{1.0, 1.0};
    CHECK(per_cell_snr(x, y).snr_db == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(per_cell_snr(x, y).signal_variance == 1.0);

    // Offset by c on a signal with variance c².
    const double c = 3.0;
    std::vector<double> s{-c, c, -c, c}, shifted;
    for (double v : s) shifted.push_back(v + c);
    CHECK(per_cell_snr(s, shifted).snr_db == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Monte Carlo SNR near 30 dB")
{
    std::mt19937_64 rng(30);
    std::normal_distribution<double> sig(0.0, 10.0), err(0.0, std::sqrt(0.1));
    std::vector<double> x(100000), y(100000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = sig(rng);
        y[i] = x[i] + err(rng);
    }
    CHECK(std::fabs(per_cell_snr(x, y).snr_db - 30.0) < 0.5);
}

TEST_CASE("errors")
{
    CHECK_THROWS_AS(per_cell_snr(std::vector<double>(5, 2.0), std::vector<double>(5, 1.0)), ZeroVarianceError);
    CHECK_THROWS(per_cell_snr(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}));
    CHECK_THROWS(pooled_snr(Cells{{1, 2}}, Cells{{1, 2}, {3, 4}}));
    CHECK_THROWS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}));
    CHECK_THROWS(rmse(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("rmse")
{
    const std::vector<double> a{1.5, -2.0, 7.0};
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
    const std::vector<double> b{0.5, 1.0, 2.0};
    CHECK(rmse(a, b) == rmse(b, a));
}

TEST_CASE("scale equivariance")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d;
    std::vector<double> x(300), y(300);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = d(rng), y[i] = x[i] + 0.1 * d(rng);
    for (double s : {1e-3, 7.0, 1e4}) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < x.size(); ++i) xs.push_back(s * x[i]), ys.push_back(s * y[i]);
        CHECK(per_cell_snr(xs, ys).snr_db == doctest::Approx(per_cell_snr(x, y).snr_db).epsilon(1e-10));
        CHECK(rmse(xs, ys) == doctest::Approx(s * rmse(x, y)).epsilon(1e-10));
    }
}

TEST_CASE("pooled over one cell equals per-cell")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.0, 10.0);
    for (int t = 0; t < 20; ++t) {
        Cells x{std::vector<double>(97)}, y{std::vector<double>(97)};
        for (std::size_t i = 0; i < 97; ++i) x[0][i] = d(rng), y[0][i] = x[0][i] + 0.2 * (d(rng) - 5.0);
        CHECK(std::fabs(pooled_snr(x, y).snr_db - per_cell_snr(x[0], y[0]).snr_db) <= 1e-12);
    }
}

TEST_CASE("mean of per-cell dB skips and counts zero-variance cells")
{
    const Cells x{{0.0, 2.0}, {5.0, 5.0}, {0.0, 2.0, 0.0, 2.0}};
    const Cells y{{1.0, 1.0}, {5.0, 4.0}, {0.1, 1.9, -0.1, 2.1}};
    const auto m = mean_per_cell_snr(x, y);
    CHECK(m.included == 2);
    CHECK(m.excluded == 1);
    CHECK(m.mean_db == doctest::Approx((0.0 + 20.0) / 2.0).epsilon(1e-12));
}

}
