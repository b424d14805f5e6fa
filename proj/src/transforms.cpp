#include "kpicomp/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "kpicomp/sampling.hpp"

namespace kpicomp {

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major))
{
    if (data_.size() != n * n) {
        throw DimensionError("matrix of dimension " + std::to_string(n) + " needs " + std::to_string(n * n) +
                             " entries, got " + std::to_string(data_.size()));
    }
}

SquareMatrix SquareMatrix::identity(std::size_t n)
{
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SquareMatrix SquareMatrix::transposed() const
{
    SquareMatrix t(n_);
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < n_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

SquareMatrix SquareMatrix::operator*(const SquareMatrix& rhs) const
{
    if (rhs.n_ != n_) throw DimensionError("matrix product dimension mismatch");
    SquareMatrix out(n_);
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t k = 0; k < n_; ++k) {
            const double a = (*this)(r, k);
            if (a == 0.0) continue;
            for (std::size_t c = 0; c < n_; ++c) out(r, c) += a * rhs(k, c);
        }
    }
    return out;
}

double SquareMatrix::frobenius_norm() const
{
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double SquareMatrix::off_diagonal_norm() const
{
    double s = 0.0;
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < n_; ++c)
            if (r != c) s += (*this)(r, c) * (*this)(r, c);
    return std::sqrt(s);
}

double distance_from_identity(const SquareMatrix& a)
{
    double s = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < a.size(); ++c) {
            const double d = a(r, c) - (r == c ? 1.0 : 0.0);
            s += d * d;
        }
    }
    return std::sqrt(s);
}

EigenDecomposition jacobi_eigen(const SquareMatrix& symmetric, double tolerance, int max_sweeps)
{
    const std::size_t n = symmetric.size();
    SquareMatrix a = symmetric;
    SquareMatrix v = SquareMatrix::identity(n);
    const double threshold = tolerance * symmetric.frobenius_norm();

    int sweep = 0;
    while (a.off_diagonal_norm() > threshold) {
        if (sweep == max_sweeps) {
            throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) + " sweeps");
        }
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::fabs(tau) > 1e150) {
                    t = 0.5 / tau;
                } else {
                    t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.sweeps = sweep;
    out.eigenvalues.resize(n);
    out.eigenvectors = SquareMatrix(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = order[k];
        out.eigenvalues[k] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t r = 1; r < n; ++r) {
            if (std::fabs(v(r, src)) > std::fabs(v(lead, src))) lead = r;
        }
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = sign * v(r, src);
    }
    return out;
}

DctBasis::DctBasis(std::size_t n) : matrix_(n)
{
    if (n == 0) throw DimensionError("DCT dimension must be positive");
    const double nn = static_cast<double>(n);
    const double scale = std::sqrt(2.0 / nn);
    for (std::size_t k = 0; k < n; ++k) {
        const double ck = k == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            matrix_(k, i) = scale * ck *
                            std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) / (2.0 * nn));
        }
    }
}

DctBasis build_dct()
{
    return DctBasis(kWeekLength);
}

KltBasis::KltBasis(SquareMatrix eigenvectors, std::vector<double> eigenvalues,
                   std::vector<std::string> training_cell_ids, std::uint64_t seed, double training_fraction)
    : vectors_(std::move(eigenvectors)),
      eigenvalues_(std::move(eigenvalues)),
      training_cell_ids_(std::move(training_cell_ids)),
      seed_(seed),
      training_fraction_(training_fraction)
{
    if (eigenvalues_.size() != vectors_.size()) throw DimensionError("eigenvalue count does not match basis size");
    for (std::size_t k = 1; k < eigenvalues_.size(); ++k) {
        if (eigenvalues_[k] > eigenvalues_[k - 1]) throw std::invalid_argument("eigenvalues must be nonincreasing");
    }
    std::sort(training_cell_ids_.begin(), training_cell_ids_.end());
    analysis_ = vectors_.transposed();
}

std::string KltBasis::fingerprint() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : vectors_.data()) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SquareMatrix weekly_covariance(std::span<const std::vector<double>> columns)
{
    if (columns.empty()) throw std::invalid_argument("covariance needs at least one column");
    const std::size_t n = columns.front().size();
    SquareMatrix r(n);
    for (const auto& col : columns) {
        if (col.size() != n) throw DimensionError("training columns differ in length");
        for (std::size_t i = 0; i < n; ++i) {
            const double ci = col[i];
            for (std::size_t j = i; j < n; ++j) r(i, j) += ci * col[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) r(i, j) = r(j, i);
    return r;
}

KltBasis train_klt(const Dataset& dataset, const KltTrainingOptions& options, std::string* warning)
{
    if (!(options.training_fraction > 0.0 && options.training_fraction <= 1.0)) {
        throw std::invalid_argument("KLT training fraction must lie in (0, 1]");
    }
    const auto n_cells = dataset.cell_count();
    const auto n_train =
        static_cast<std::size_t>(std::ceil(options.training_fraction * static_cast<double>(n_cells) - 1e-9));
    if (n_train < 2) {
        throw std::invalid_argument("KLT training needs at least 2 cells; fraction " +
                                    std::to_string(options.training_fraction) + " of " + std::to_string(n_cells) +
                                    " cells selects " + std::to_string(n_train));
    }
    const auto picks = sample_without_replacement(n_cells, n_train, options.seed);

    std::vector<std::vector<double>> columns;
    std::vector<std::string> ids;
    for (auto idx : picks) {
        const auto& cell = dataset.cells()[idx];
        ids.push_back(cell.cell_id());
        auto weeks = to_weekly_blocks(cell);
        for (auto& b : weeks.blocks) columns.push_back(std::move(b));
    }
    if (warning != nullptr && columns.size() < kWeekLength) {
        *warning = "KLT covariance built from " + std::to_string(columns.size()) +
                   " weekly columns, fewer than its dimension " + std::to_string(kWeekLength) +
                   "; trailing eigenvectors span an untrained null space";
    }
    const auto r = weekly_covariance(columns);
    auto eig = jacobi_eigen(r);
    for (auto& lambda : eig.eigenvalues) lambda = std::max(lambda, 0.0);  // R is PSD; clear roundoff negatives
    KltBasis basis(std::move(eig.eigenvectors), std::move(eig.eigenvalues), std::move(ids), options.seed,
                   options.training_fraction);
    basis.set_training_columns(columns.size());
    return basis;
}

std::vector<double> forward(const SquareMatrix& analysis, std::span<const double> block)
{
    const auto n = analysis.size();
    if (block.size() != n) {
        throw DimensionError("transform expects " + std::to_string(n) + " samples, got " + std::to_string(block.size()));
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto row = analysis.row(k);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += row[i] * block[i];
        out[k] = acc;
    }
    return out;
}

std::vector<double> inverse(const SquareMatrix& analysis, std::span<const double> coeffs)
{
    const auto n = analysis.size();
    if (coeffs.size() != n) {
        throw DimensionError("inverse transform expects " + std::to_string(n) + " coefficients, got " +
                             std::to_string(coeffs.size()));
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double ck = coeffs[k];
        if (ck == 0.0) continue;
        const auto row = analysis.row(k);
        for (std::size_t i = 0; i < n; ++i) out[i] += ck * row[i];
    }
    return out;
}

std::string klt_to_json(const KltBasis& basis)
{
    nlohmann::json j;
    j["format"] = "kpicomp-klt-basis";
    j["version"] = 1;
    j["dimension"] = basis.size();
    j["seed"] = basis.seed();
    j["training_fraction"] = basis.training_fraction();
    j["training_columns"] = basis.training_columns();
    j["training_cell_ids"] = std::vector<std::string>(basis.training_cell_ids().begin(), basis.training_cell_ids().end());
    j["eigenvalues"] = std::vector<double>(basis.eigenvalues().begin(), basis.eigenvalues().end());
    j["matrix"] = std::vector<double>(basis.vectors().data().begin(), basis.vectors().data().end());
    j["fingerprint"] = basis.fingerprint();
    return j.dump(1);
}

KltBasis klt_from_json(const std::string& text)
{
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "kpicomp-klt-basis") throw std::invalid_argument("not a KLT basis file");
    const auto n = j.at("dimension").get<std::size_t>();
    KltBasis basis(SquareMatrix(n, j.at("matrix").get<std::vector<double>>()),
                   j.at("eigenvalues").get<std::vector<double>>(),
                   j.at("training_cell_ids").get<std::vector<std::string>>(), j.at("seed").get<std::uint64_t>(),
                   j.at("training_fraction").get<double>());
    basis.set_training_columns(j.value("training_columns", std::size_t{0}));
    if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != basis.fingerprint()) {
        throw std::invalid_argument("KLT basis fingerprint mismatch; file is corrupt");
    }
    return basis;
}

void save_klt(const KltBasis& basis, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << klt_to_json(basis) << '\n';
}

KltBasis load_klt(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return klt_from_json(buf.str());
}

}  // namespace kpicomp
