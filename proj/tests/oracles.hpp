#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library code paths it is compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// log2 N - (1/N) Σ_c m_c c log2 c, grouping symbols by their count c (m_c of them) in long double.
inline double entropy_bits(const std::vector<std::int64_t>& symbols)
{
    std::map<std::int64_t, std::uint64_t> counts;
    for (auto s : symbols) ++counts[s];
    std::map<std::uint64_t, std::uint64_t> multiplicity;
    for (const auto& [s, c] : counts) ++multiplicity[c];
    const long double n = static_cast<long double>(symbols.size());
    long double weighted = 0.0L;
    for (const auto& [c, m] : multiplicity) {
        const long double cl = static_cast<long double>(c);
        weighted += static_cast<long double>(m) * cl * std::log2(cl);
    }
    return static_cast<double>(std::log2(n) - weighted / n);
}

/// Eigenvalues of a symmetric matrix via Householder tridiagonalization + implicit QR (Eigen), descending.
inline std::vector<double> qr_eigenvalues(const std::vector<double>& row_major, std::size_t n)
{
    Eigen::MatrixXd m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = row_major[r * n + c];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

/// Direct DCT-II sum, written from the textbook definition.
inline std::vector<double> dct2(const std::vector<double>& x)
{
    const std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += x[i] * std::cos(std::numbers::pi / static_cast<double>(n) * (static_cast<double>(i) + 0.5) *
                                 static_cast<double>(k));
        }
        const double norm = k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
        out[k] = norm * s;
    }
    return out;
}

/// Literal closed-loop DPCM recursion: x̂[n] = x̂[n-1] + Δ·round_half_even((x[n] - x̂[n-1]) / Δ).
inline std::vector<double> dpcm_reference(const std::vector<double>& x, double delta)
{
    std::vector<double> y(x.size());
    y[0] = x[0];
    for (std::size_t n = 1; n < x.size(); ++n) {
        const double r = (x[n] - y[n - 1]) / delta;
        double f = std::floor(r);
        const double frac = r - f;
        if (frac > 0.5 || (frac == 0.5 && std::fmod(f, 2.0) != 0.0)) f += 1.0;
        y[n] = y[n - 1] + delta * f;
    }
    return y;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline double norm2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace oracle
