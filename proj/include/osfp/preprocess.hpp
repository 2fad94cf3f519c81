#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace osfp {

inline constexpr double kConstantEpsilon = 1e-9;
inline constexpr double kDependenceTolerance = 1e-6;
inline constexpr double kDefaultVarianceTarget = 0.98;

class PcaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-column standardization. Constant columns map to 0.
template <typename Scalar>
struct Normalizer {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector means;
    Vector stds;
    std::vector<bool> constant;

    Eigen::Index size() const { return means.size(); }

    template <typename Derived>
    Vector apply(const Eigen::MatrixBase<Derived>& x) const {
        if (x.size() != means.size()) throw std::invalid_argument("normalizer: length mismatch");
        Vector out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out[i] = constant[static_cast<std::size_t>(i)] ? Scalar(0) : (x[i] - means[i]) / stds[i];
        return out;
    }

    /// Row-wise version of apply().
    template <typename Derived>
    Matrix apply_rows(const Eigen::MatrixBase<Derived>& rows) const {
        if (rows.cols() != means.size()) throw std::invalid_argument("normalizer: width mismatch");
        Matrix out = rows.template cast<Scalar>();
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
            if (constant[static_cast<std::size_t>(c)])
                out.col(c).setZero();
            else
                out.col(c) = (out.col(c).array() - means[c]) / stds[c];
        }
        return out;
    }

    bool operator==(const Normalizer&) const = default;
};

/// Column means and population standard deviations of `data` (one sample
/// per row).
template <typename Derived>
Normalizer<typename Derived::Scalar> fit_normalizer(const Eigen::MatrixBase<Derived>& data,
                                                    double constant_epsilon = kConstantEpsilon) {
    using Scalar = typename Derived::Scalar;
    if (data.rows() < 2) throw std::invalid_argument("fit_normalizer: need at least 2 rows");
    Normalizer<Scalar> n;
    n.means = data.colwise().mean().transpose();
    n.stds.resize(data.cols());
    n.constant.assign(static_cast<std::size_t>(data.cols()), false);
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const Scalar var = (data.col(c).array() - n.means[c]).square().mean();
        n.stds[c] = std::sqrt(var);
        n.constant[static_cast<std::size_t>(c)] = n.stds[c] < Scalar(constant_epsilon);
    }
    return n;
}

/// R = E[X_i X_j] over standardized columns.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> correlation_matrix(
    const Eigen::MatrixBase<Derived>& normalized) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Matrix r = Matrix::Zero(normalized.cols(), normalized.cols());
    r.template selfadjointView<Eigen::Lower>().rankUpdate(normalized.transpose());
    r.template triangularView<Eigen::StrictlyUpper>() = r.transpose();
    return r / Scalar(normalized.rows());
}

/// Greedy scan in index order: a column of R survives when its residual
/// after projection onto the already kept columns exceeds `tol`. Columns with
/// a zero diagonal (constants) never survive.
template <typename Derived>
std::vector<Eigen::Index> reduce_dependent_columns(const Eigen::MatrixBase<Derived>& r,
                                                   double tol = kDependenceTolerance) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (r.rows() != r.cols()) throw std::invalid_argument("reduce_dependent_columns: R must be square");

    std::vector<Eigen::Index> kept;
    Matrix q(r.rows(), 0);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        if (!(r(j, j) > Scalar(0.5))) continue;
        Vector v = r.col(j);
        // Two passes of classical Gram-Schmidt keep q orthonormal to working precision.
        for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) v -= q * (q.transpose() * v);
        const Scalar norm = v.norm();
        if (norm > Scalar(tol)) {
            kept.push_back(j);
            q.conservativeResize(Eigen::NoChange, q.cols() + 1);
            q.col(q.cols() - 1) = v / norm;
        }
    }
    return kept;
}

template <typename Scalar>
struct PcaResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis;  ///< one component per column
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;         ///< all of them, descending
    Eigen::Index components = 0;
    Scalar variance_kept = 0;
};

/// Smallest prefix of the descending spectrum whose share reaches `target`.
template <typename Derived>
Eigen::Index components_for_variance(const Eigen::MatrixBase<Derived>& eigenvalues, double target) {
    using Scalar = typename Derived::Scalar;
    const Scalar total = eigenvalues.cwiseMax(Scalar(0)).sum();
    if (!(total > Scalar(0))) return 0;
    Scalar acc = 0;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        acc += std::max(eigenvalues[k], Scalar(0));
        if (acc / total >= Scalar(target) - Scalar(1e-12)) return k + 1;
    }
    return eigenvalues.size();
}

/// Principal components of standardized data through the eigenvectors of its
/// correlation matrix.
template <typename Derived>
PcaResult<typename Derived::Scalar> fit_pca(const Eigen::MatrixBase<Derived>& normalized_kept,
                                            double variance_target = kDefaultVarianceTarget) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    PcaResult<Scalar> out;
    if (normalized_kept.cols() == 0) {
        out.basis.resize(0, 0);
        out.eigenvalues.resize(0);
        out.variance_kept = 1;
        return out;
    }
    const Matrix r = correlation_matrix(normalized_kept);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(r);
    if (solver.info() != Eigen::Success) throw PcaError("symmetric eigen-solver did not converge");

    // Eigen returns ascending order.
    out.eigenvalues = solver.eigenvalues().reverse();
    const Matrix vectors = solver.eigenvectors().rowwise().reverse();
    out.components = components_for_variance(out.eigenvalues, variance_target);
    out.basis = vectors.leftCols(out.components);
    // Sign convention: largest-magnitude entry of each component is positive.
    for (Eigen::Index c = 0; c < out.basis.cols(); ++c) {
        Eigen::Index at = 0;
        out.basis.col(c).cwiseAbs().maxCoeff(&at);
        if (out.basis(at, c) < Scalar(0)) out.basis.col(c) *= Scalar(-1);
    }
    const Scalar total = out.eigenvalues.cwiseMax(Scalar(0)).sum();
    out.variance_kept =
        total > Scalar(0) ? out.eigenvalues.head(out.components).cwiseMax(Scalar(0)).sum() / total : Scalar(1);
    return out;
}

/// Raw feature vector -> network input: standardize, select the surviving
/// columns, project onto the principal basis.
template <typename Scalar>
struct ReductionPipeline {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Normalizer<Scalar> normalizer;
    std::vector<Eigen::Index> kept;
    Matrix basis;  ///< kept.size() x k
    Vector eigenvalues;
    Scalar variance_kept = 1;

    Eigen::Index input_size() const { return normalizer.size(); }
    Eigen::Index output_size() const { return basis.cols(); }

    template <typename Derived>
    Vector apply(const Eigen::MatrixBase<Derived>& raw) const {
        if (raw.size() != input_size()) throw std::invalid_argument("pipeline: input length mismatch");
        const Vector z = normalizer.apply(raw);
        Vector selected(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) selected[static_cast<Eigen::Index>(i)] = z[kept[i]];
        return basis.transpose() * selected;
    }

    template <typename Derived>
    Matrix apply_rows(const Eigen::MatrixBase<Derived>& raw_rows) const {
        if (raw_rows.cols() != input_size()) throw std::invalid_argument("pipeline: input width mismatch");
        const Matrix z = normalizer.apply_rows(raw_rows);
        Matrix selected(z.rows(), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) selected.col(static_cast<Eigen::Index>(i)) = z.col(kept[i]);
        return selected * basis;
    }

    bool operator==(const ReductionPipeline&) const = default;
};

struct ReductionOptions {
    double constant_epsilon = kConstantEpsilon;
    double dependence_tolerance = kDependenceTolerance;
    double variance_target = kDefaultVarianceTarget;
};

template <typename Derived>
ReductionPipeline<typename Derived::Scalar> fit_reduction(const Eigen::MatrixBase<Derived>& raw_rows,
                                                          const ReductionOptions& options = {}) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    ReductionPipeline<Scalar> p;
    p.normalizer = fit_normalizer(raw_rows, options.constant_epsilon);
    const Matrix z = p.normalizer.apply_rows(raw_rows);
    p.kept = reduce_dependent_columns(correlation_matrix(z), options.dependence_tolerance);
    Matrix selected(z.rows(), static_cast<Eigen::Index>(p.kept.size()));
    for (std::size_t i = 0; i < p.kept.size(); ++i) selected.col(static_cast<Eigen::Index>(i)) = z.col(p.kept[i]);
    auto pca = fit_pca(selected, options.variance_target);
    p.basis = std::move(pca.basis);
    p.eigenvalues = std::move(pca.eigenvalues);
    p.variance_kept = pca.variance_kept;
    return p;
}

/// Table of surviving columns: `kept-index  original-index  test : field`.
std::string reduction_report(const ReductionPipeline<double>& pipeline);

}  // namespace osfp
