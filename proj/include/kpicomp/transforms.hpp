#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpicomp/kpi_model.hpp"

namespace kpicomp {

class DimensionError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense square matrix, row-major.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
    SquareMatrix(std::size_t n, std::vector<double> row_major);

    static SquareMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * n_ + c]; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * n_, n_}; }
    std::span<const double> data() const noexcept { return data_; }

    SquareMatrix transposed() const;
    SquareMatrix operator*(const SquareMatrix& rhs) const;

    double frobenius_norm() const;
    /// sqrt of the sum of squared off-diagonal entries.
    double off_diagonal_norm() const;

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// ‖A − I‖_F
double distance_from_identity(const SquareMatrix& a);

struct EigenDecomposition {
    std::vector<double> eigenvalues;  ///< nonincreasing
    SquareMatrix eigenvectors;        ///< column k pairs with eigenvalues[k]
    int sweeps = 0;
};

/**
 * Cyclic Jacobi eigensolver for a symmetric matrix.
 *
 * Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
 * below `tolerance * ‖A‖_F`. Eigenpairs come back sorted by descending
 * eigenvalue, each eigenvector signed so that its largest-magnitude component
 * (first one on ties) is positive. Throws ConvergenceError after `max_sweeps`.
 */
EigenDecomposition jacobi_eigen(const SquareMatrix& symmetric, double tolerance = 1e-12, int max_sweeps = 100);

/// Orthonormal DCT-II: D[k][n] = sqrt(2/N) c_k cos(pi (2n+1) k / 2N), c_0 = 1/sqrt(2).
class DctBasis {
public:
    explicit DctBasis(std::size_t n = kWeekLength);

    std::size_t size() const noexcept { return matrix_.size(); }
    const SquareMatrix& matrix() const noexcept { return matrix_; }
    /// Rows of the forward (analysis) operator.
    const SquareMatrix& analysis() const noexcept { return matrix_; }

private:
    SquareMatrix matrix_;
};

DctBasis build_dct();

/// Trained Karhunen-Loeve basis: eigenvectors of R = X Xᵀ over training weeks.
class KltBasis {
public:
    KltBasis(SquareMatrix eigenvectors, std::vector<double> eigenvalues, std::vector<std::string> training_cell_ids,
             std::uint64_t seed, double training_fraction);

    std::size_t size() const noexcept { return vectors_.size(); }
    /// V, eigenvectors as columns in descending eigenvalue order.
    const SquareMatrix& vectors() const noexcept { return vectors_; }
    /// Vᵀ; forward(x) = Vᵀ x.
    const SquareMatrix& analysis() const noexcept { return analysis_; }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    std::span<const std::string> training_cell_ids() const noexcept { return training_cell_ids_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double training_fraction() const noexcept { return training_fraction_; }
    /// Number of weekly columns that went into R (0 when loaded from an older file).
    std::size_t training_columns() const noexcept { return training_columns_; }
    void set_training_columns(std::size_t n) noexcept { training_columns_ = n; }

    /// FNV-1a 64 over the matrix bytes, hex; identifies the basis in encoded files.
    std::string fingerprint() const;

    bool operator==(const KltBasis& other) const
    {
        return vectors_ == other.vectors_ && eigenvalues_ == other.eigenvalues_ &&
               training_cell_ids_ == other.training_cell_ids_ && seed_ == other.seed_ &&
               training_fraction_ == other.training_fraction_;
    }

private:
    SquareMatrix vectors_;
    SquareMatrix analysis_;
    std::vector<double> eigenvalues_;
    std::vector<std::string> training_cell_ids_;
    std::uint64_t seed_;
    double training_fraction_;
    std::size_t training_columns_ = 0;
};

struct KltTrainingOptions {
    double training_fraction = 0.1;
    std::uint64_t seed = 1;
};

/// Builds R = X Xᵀ (no mean removal) from an explicit list of weekly columns.
SquareMatrix weekly_covariance(std::span<const std::vector<double>> columns);

/**
 * Trains a KLT basis on ceil(fraction * |C|) cells drawn by seeded sampling
 * without replacement. Throws std::invalid_argument when fewer than two cells
 * would be used. `warning`, if given, receives a message when R has fewer
 * columns than its dimension.
 */
KltBasis train_klt(const Dataset& dataset, const KltTrainingOptions& options, std::string* warning = nullptr);

std::vector<double> forward(const SquareMatrix& analysis, std::span<const double> block);
std::vector<double> inverse(const SquareMatrix& analysis, std::span<const double> coeffs);

inline std::vector<double> forward(const DctBasis& b, std::span<const double> x) { return forward(b.analysis(), x); }
inline std::vector<double> inverse(const DctBasis& b, std::span<const double> c) { return inverse(b.analysis(), c); }
inline std::vector<double> forward(const KltBasis& b, std::span<const double> x) { return forward(b.analysis(), x); }
inline std::vector<double> inverse(const KltBasis& b, std::span<const double> c) { return inverse(b.analysis(), c); }

std::string klt_to_json(const KltBasis& basis);
KltBasis klt_from_json(const std::string& text);
void save_klt(const KltBasis& basis, const std::string& path);
KltBasis load_klt(const std::string& path);

}  // namespace kpicomp
