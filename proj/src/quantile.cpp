#include "efr/quantile.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "efr/errors.hpp"

namespace efr {

double check_loss(double u, double tau) {
    return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

QuantileFit fit_quantile(const RealMatrix& scores,
                         const std::vector<double>& responses, double tau,
                         bool with_intercept) {
    const std::size_t n = responses.size();
    const std::size_t K = scores.cols;
    if (scores.rows != n)
        throw data_error("score rows do not match response count");
    if (!(tau > 0.0) || !(tau < 1.0))
        throw domain_error("quantile level must lie strictly in (0,1)");
    if (n <= K + 1)
        throw insufficient_sample_error("quantile fit needs n > K + 1");

    const std::size_t p = K + (with_intercept ? 1 : 0);

    QuantileFit fit;
    fit.tau = tau;
    fit.coefficients.assign(K, 0.0);

    if (p == 0) { // score-free model with no intercept: nothing to fit
        fit.converged = true;
        for (double y : responses)
            fit.objective += check_loss(y, tau);
        return fit;
    }

    Eigen::MatrixXd A(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        if (with_intercept)
            A(static_cast<Eigen::Index>(i), c++) = 1.0;
        for (std::size_t k = 0; k < K; ++k)
            A(static_cast<Eigen::Index>(i), c + k) = scores.at(i, k);
    }
    Eigen::Map<const Eigen::VectorXd> y(responses.data(),
                                        static_cast<Eigen::Index>(n));

    // least-squares start
    Eigen::VectorXd beta =
        (A.transpose() * A + 1e-12 * Eigen::MatrixXd::Identity(p, p))
            .ldlt()
            .solve(A.transpose() * y);

    double eps = 1e-2;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd r = y - A * beta;
        Eigen::VectorXd w(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = r(static_cast<Eigen::Index>(i));
            const double asym = std::fabs(tau - (ri < 0.0 ? 1.0 : 0.0));
            w(static_cast<Eigen::Index>(i)) = asym / std::max(std::fabs(ri), eps);
        }
        const Eigen::MatrixXd Aw = w.asDiagonal() * A;
        const Eigen::VectorXd next =
            (A.transpose() * Aw + 1e-12 * Eigen::MatrixXd::Identity(p, p))
                .ldlt()
                .solve(Aw.transpose() * y);
        const double delta = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (delta < 1e-9 && eps <= 1e-8 + 1e-15) {
            converged = true;
            break;
        }
        eps = std::max(eps * 0.9, 1e-8);
    }

    const auto objective_of = [&](const Eigen::VectorXd& b) {
        double acc = 0.0;
        const Eigen::VectorXd res = y - A * b;
        for (std::size_t i = 0; i < n; ++i)
            acc += check_loss(res(static_cast<Eigen::Index>(i)), tau);
        return acc;
    };

    // Active-set polish: a check-loss minimizer can always be chosen to
    // interpolate p observations, and IRLS lands close enough that those
    // observations sit among the smallest residuals.  Each round enumerates
    // p-subsets of the p+6 observations nearest the incumbent and adopts the
    // best exact objective; re-ranking after every improvement walks the
    // solution vertex to vertex until no candidate improves it.
    double best_obj = objective_of(beta);
    const std::size_t m = std::min(n, p + 6);
    for (int round = 0; round < 50; ++round) {
        const Eigen::VectorXd rabs = (y - A * beta).cwiseAbs();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rabs(static_cast<Eigen::Index>(a)) < rabs(static_cast<Eigen::Index>(b));
        });
        bool improved = false;
        std::vector<std::size_t> pick(p);
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            Eigen::MatrixXd As(p, p);
            Eigen::VectorXd ys(p);
            for (std::size_t q = 0; q < p; ++q) {
                const auto row = static_cast<Eigen::Index>(order[pick[q]]);
                As.row(static_cast<Eigen::Index>(q)) = A.row(row);
                ys(static_cast<Eigen::Index>(q)) = y(row);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(As);
            if (lu.isInvertible()) {
                const Eigen::VectorXd cand = lu.solve(ys);
                const double obj = objective_of(cand);
                if (obj < best_obj) {
                    best_obj = obj;
                    beta = cand;
                    improved = true;
                }
            }
            std::size_t j = p;
            while (j > 0 && pick[j - 1] == m - p + (j - 1))
                --j;
            if (j == 0)
                break;
            ++pick[j - 1];
            for (std::size_t q = j; q < p; ++q)
                pick[q] = pick[q - 1] + 1;
        }
        if (!improved)
            break;
    }

    std::size_t c = 0;
    if (with_intercept)
        fit.intercept = beta(c++);
    for (std::size_t k = 0; k < K; ++k)
        fit.coefficients[k] = beta(c + k);
    fit.converged = converged;
    fit.objective = best_obj;
    return fit;
}

RealMatrix predict_quantiles(const std::vector<QuantileFit>& fits,
                             const RealMatrix& scores) {
    RealMatrix out(scores.rows, fits.size());
    for (std::size_t t = 0; t < fits.size(); ++t) {
        if (fits[t].coefficients.size() != scores.cols)
            throw data_error("score dimension does not match the fit");
        for (std::size_t i = 0; i < scores.rows; ++i) {
            double v = fits[t].intercept;
            for (std::size_t k = 0; k < scores.cols; ++k)
                v += scores.at(i, k) * fits[t].coefficients[k];
            out.at(i, t) = v;
        }
    }
    return out;
}

} // namespace efr
