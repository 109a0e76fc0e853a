#include "efr/fpca.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace efr {

FpcaBasis fit_fpca(const CurveSample& sample, double var_threshold) {
    const std::size_t n = sample.n();
    const std::size_t S = sample.grid->size();
    if (n < 2)
        throw insufficient_sample_error("fpca needs at least 2 curves");
    if (!(var_threshold > 0.0) || !(var_threshold <= 1.0))
        throw domain_error("variance threshold must lie in (0,1]");

    Eigen::MatrixXd X(n, S);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < S; ++j) {
            const double v = sample.curves[i].values[j];
            if (!std::isfinite(v))
                throw data_error("non-finite curve value in fpca sample");
            X(i, j) = v;
        }

    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;

    Eigen::VectorXd sqw(S);
    for (std::size_t j = 0; j < S; ++j)
        sqw(j) = std::sqrt(sample.grid->quad_weights[j]);

    // M = W^{1/2} C W^{1/2} with C the 1/(n-1) covariance of curve values.
    Eigen::MatrixXd C = (X.transpose() * X) / static_cast<double>(n - 1);
    Eigen::MatrixXd M = sqw.asDiagonal() * C * sqw.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw error("fpca eigendecomposition failed");

    // Ascending from Eigen; read from the back, clamping fp-noise negatives.
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& U = es.eigenvectors();

    std::vector<double> eigs(S);
    double total = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
        eigs[k] = std::max(lam(static_cast<Eigen::Index>(S - 1 - k)), 0.0);
        total += eigs[k];
    }

    FpcaBasis basis;
    basis.grid = sample.grid;
    basis.mean = Curve{sample.grid, std::vector<double>(mean.data(), mean.data() + S)};
    basis.total_variance = total;

    if (total <= 0.0) {
        basis.var_explained = 1.0; // vacuous: nothing to explain
        return basis;
    }

    std::size_t K = 0;
    double cum = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
        cum += eigs[k];
        K = k + 1;
        if (cum / total >= var_threshold - 1e-12)
            break;
    }

    basis.eigenvalues.assign(eigs.begin(), eigs.begin() + K);
    basis.var_explained = std::min(cum / total, 1.0);
    basis.eigenfunctions.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(S - 1 - k);
        std::vector<double> phi(S);
        double ip_one = 0.0; // <phi, 1> = sum_j w_j * u_j / sqrt(w_j)
        for (std::size_t j = 0; j < S; ++j) {
            phi[j] = U(static_cast<Eigen::Index>(j), col) / sqw(static_cast<Eigen::Index>(j));
            ip_one += sample.grid->quad_weights[j] * phi[j];
        }
        if (ip_one < 0.0)
            for (double& v : phi)
                v = -v;
        basis.eigenfunctions.push_back(Curve{sample.grid, std::move(phi)});
    }
    return basis;
}

std::vector<double> project_scores(const FpcaBasis& basis, const Curve& f) {
    if (!same_grid(*basis.grid, *f.grid))
        throw grid_mismatch_error("curve not on fpca grid");
    std::vector<double> centered(f.values);
    for (std::size_t j = 0; j < centered.size(); ++j)
        centered[j] -= basis.mean.values[j];
    const Curve c{basis.grid, std::move(centered)};
    std::vector<double> scores(basis.K());
    for (std::size_t k = 0; k < basis.K(); ++k)
        scores[k] = inner_product(basis.eigenfunctions[k], c);
    return scores;
}

} // namespace efr
