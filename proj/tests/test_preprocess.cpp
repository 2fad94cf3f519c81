#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "osfp/preprocess.hpp"
#include "osfp/random.hpp"

using namespace osfp;

namespace {

using Mat = std::vector<std::vector<double>>;

Eigen::MatrixXd noise_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform_real(rng, -2, 2);
    return m;
}

// Pearson correlation by explicit sums.
Mat naive_correlation(const Eigen::MatrixXd& x) {
    const auto n = static_cast<double>(x.rows());
    const auto c = static_cast<std::size_t>(x.cols());
    std::vector<double> mean(c, 0), sd(c, 0);
    for (std::size_t j = 0; j < c; ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) mean[j] += x(i, Eigen::Index(j));
        mean[j] /= n;
        for (Eigen::Index i = 0; i < x.rows(); ++i) sd[j] += std::pow(x(i, Eigen::Index(j)) - mean[j], 2);
        sd[j] = std::sqrt(sd[j] / n);
    }
    Mat r(c, std::vector<double>(c, 0));
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            double s = 0;
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                s += (x(i, Eigen::Index(a)) - mean[a]) * (x(i, Eigen::Index(b)) - mean[b]);
            r[a][b] = s / n / (sd[a] * sd[b]);
        }
    return r;
}

// Cyclic Jacobi rotations; returns eigenvalues sorted descending.
std::vector<double> jacobi_eigenvalues(Mat a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

}  // namespace

TEST_CASE("normalizer uses population deviation and zeroes constants") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 5, 2, 5, 3, 5, 4, 5;
    const auto n = fit_normalizer(x);
    CHECK(n.means[0] == doctest::Approx(2.5));
    CHECK(n.stds[0] == doctest::Approx(std::sqrt(1.25)));
    CHECK(n.constant[1]);
    const Eigen::VectorXd z = n.apply(Eigen::Vector2d(2.5, 99));
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    CHECK_THROWS(n.apply(Eigen::Vector3d(1, 2, 3)));
}

TEST_CASE("correlation matrix matches explicit sums") {
    const auto x = noise_matrix(50, 5, 1);
    const auto n = fit_normalizer(x);
    const Eigen::MatrixXd r = correlation_matrix(n.apply_rows(x));
    const auto oracle = naive_correlation(x);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) CHECK(r(a, b) == doctest::Approx(oracle[a][b]).epsilon(1e-12));
}

TEST_CASE("dependent columns are dropped in index order") {
    auto x = noise_matrix(60, 6, 2);
    x.col(2) = 2 * x.col(0) - x.col(1);  // combination of earlier columns
    x.col(4) = (-3 * x.col(3)).array() + 1;  // affine copy
    x.col(5).setConstant(7);
    const auto p = fit_reduction(x);
    CHECK(p.kept == std::vector<Eigen::Index>{0, 1, 3});
}

TEST_CASE("PCA spectrum matches Jacobi on the correlation matrix") {
    auto x = noise_matrix(80, 6, 3);
    x.col(1) += 0.8 * x.col(0);
    x.col(4) += 0.5 * x.col(2) - 0.3 * x.col(5);
    const auto n = fit_normalizer(x);
    const Eigen::MatrixXd z = n.apply_rows(x);
    const auto pca = fit_pca(z, 0.98);
    const auto oracle = jacobi_eigenvalues(naive_correlation(x));
    for (int i = 0; i < 6; ++i) CHECK(pca.eigenvalues[i] == doctest::Approx(oracle[std::size_t(i)]).epsilon(1e-9));

    double total = 0;
    for (double e : oracle) total += e;
    // smallest prefix reaching 98%
    std::size_t k = 0;
    double acc = 0;
    while (acc / total < 0.98) acc += oracle[k++];
    CHECK(pca.components == Eigen::Index(k));
    CHECK(pca.variance_kept == doctest::Approx(acc / total));

    // columns are orthonormal eigenvectors
    const Eigen::MatrixXd r = correlation_matrix(z);
    const Eigen::MatrixXd gram = pca.basis.transpose() * pca.basis;
    CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).norm() < 1e-10);
    for (Eigen::Index c = 0; c < pca.basis.cols(); ++c)
        CHECK((r * pca.basis.col(c) - pca.eigenvalues[c] * pca.basis.col(c)).norm() < 1e-9);
}

TEST_CASE("components for variance") {
    const Eigen::Vector4d ev(5, 3, 1.5, 0.5);
    CHECK(components_for_variance(ev, 0.5) == 1);
    CHECK(components_for_variance(ev, 0.8) == 2);
    CHECK(components_for_variance(ev, 0.95) == 3);
    CHECK(components_for_variance(ev, 1.0) == 4);
}

TEST_CASE("pipeline apply agrees with apply_rows") {
    auto x = noise_matrix(40, 8, 4);
    x.col(3) = x.col(1) + x.col(2);
    const auto p = fit_reduction(x);
    CHECK(p.kept.size() == 7);
    const Eigen::MatrixXd rows = p.apply_rows(x);
    for (Eigen::Index i = 0; i < 5; ++i) {
        const Eigen::VectorXd v = p.apply(x.row(i).transpose());
        CHECK((v - rows.row(i).transpose()).norm() < 1e-12);
    }
    const auto f = fit_reduction(x.cast<float>().eval());
    CHECK(f.kept == p.kept);
}

TEST_CASE("reduction report lists kept columns") {
    const auto x = noise_matrix(30, 3, 5);
    const auto p = fit_reduction(x);
    const auto text = reduction_report(p);
    CHECK(text.find("input 2") != std::string::npos);
    CHECK(text.find("kept 3 of 3 columns") != std::string::npos);
}
