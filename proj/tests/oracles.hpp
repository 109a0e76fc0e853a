// Independent reference implementations the tests compare the library
// against.  Everything here is written naively (direct loops, exhaustive
// enumeration) and on purpose shares no code with src/.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "efr/grid.hpp"
#include "efr/kernels.hpp"
#include "efr/matrix.hpp"

namespace oracles {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- random test instances ---------------------------------------------

struct Instance {
    efr::CurveSample sample;
    std::vector<double> responses;
};

// Smooth random curves (low-order trigonometric mix) plus gaussian
// responses; spread keeps pairwise distances well separated.
inline Instance make_instance(unsigned seed, std::size_t n, std::size_t S) {
    std::mt19937 eng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    auto grid = efr::uniform_grid01(S);
    std::vector<efr::Curve> curves;
    for (std::size_t i = 0; i < n; ++i) {
        const double a0 = N(eng), a1 = N(eng), a2 = N(eng), a3 = N(eng);
        std::vector<double> v(S);
        for (std::size_t j = 0; j < S; ++j) {
            const double s = grid->points[j];
            v[j] = a0 + a1 * s + a2 * std::sin(2.0 * M_PI * s) +
                   a3 * std::cos(2.0 * M_PI * s);
        }
        curves.push_back(efr::make_curve(grid, std::move(v)));
    }
    Instance inst{efr::make_sample(grid, std::move(curves)), {}};
    inst.responses.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        inst.responses[i] = N(eng);
    return inst;
}

// ---- conditional-CDF bandwidth selection, brute force -------------------

struct CcdfOracle {
    std::vector<double> d; // distances to the evaluation point
    std::vector<double> Y;
    std::vector<double> grid;
    efr::KernelSpec kernel;
    double kappa = 1.0;
    bool printed_form = false;

    std::vector<double> mesh() const {
        std::vector<double> m(Y);
        const double lo = *std::min_element(Y.begin(), Y.end());
        const double hi = *std::max_element(Y.begin(), Y.end());
        for (int j = 0; j < 512; ++j)
            m.push_back(lo + (hi - lo) * (static_cast<double>(j) / 511.0));
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());
        return m;
    }

    double total_weight(double h) const {
        double tw = 0.0;
        for (double di : d)
            tw += kernel(di / h);
        return tw;
    }

    bool usable(double h) const { return total_weight(h) > 0.0; }

    double F(double y, double h) const {
        double tw = 0.0, num = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double kw = kernel(d[i] / h);
            tw += kw;
            if (Y[i] <= y)
                num += kw;
        }
        return num / tw;
    }

    double pi(double h) const {
        std::size_t c = 0;
        for (double di : d)
            if (di <= h)
                ++c;
        return static_cast<double>(c) / static_cast<double>(d.size());
    }

    double v(double h) const {
        const double p = pi(h);
        if (p <= 0.0)
            return kInf;
        const double m = static_cast<double>(d.size());
        if (printed_form)
            return kappa * std::log(m) / (m * std::log(p));
        return kappa * std::log(m) / (m * p);
    }

    double sq_diff(double h1, double h2) const {
        const auto m = mesh();
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < m.size(); ++j) {
            const double g0 = F(m[j], h1) - F(m[j], h2);
            const double g1 = F(m[j + 1], h1) - F(m[j + 1], h2);
            acc += 0.5 * (g0 * g0 + g1 * g1) * (m[j + 1] - m[j]);
        }
        return acc;
    }

    double a(double h) const {
        double best = 0.0;
        for (double hp : grid) {
            if (hp >= h || !usable(hp) || std::isinf(v(hp)))
                continue;
            best = std::max(best, std::max(0.0, sq_diff(hp, h) - v(hp)));
        }
        return best;
    }

    double crit(double h) const { return a(h) + v(h); }

    std::optional<double> select() const {
        double best_crit = kInf;
        std::optional<double> best;
        for (double h : grid) {
            if (!usable(h))
                continue;
            const double c = crit(h);
            if (c < best_crit) {
                best_crit = c;
                best = h;
            }
        }
        return best;
    }
};

// ---- dense weighted least squares --------------------------------------

struct WlsOracle {
    std::vector<double> theta;
    double objective = 0.0;
};

inline WlsOracle dense_wls(const efr::RealMatrix& design,
                           const std::vector<double>& y,
                           const std::vector<double>& w) {
    const std::size_t n = design.rows, p = design.cols;
    Eigen::MatrixXd Phi(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            Phi(i, j) = design.at(i, j);
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
    Eigen::MatrixXd A = Phi.transpose() * wv.asDiagonal() * Phi;
    Eigen::VectorXd b = Phi.transpose() * wv.cwiseProduct(yv);
    Eigen::VectorXd t = A.fullPivLu().solve(b);
    WlsOracle out;
    out.theta.assign(t.data(), t.data() + p);
    Eigen::VectorXd r = yv - Phi * t;
    out.objective = r.cwiseProduct(wv.cwiseSqrt()).squaredNorm();
    return out;
}

inline double wls_objective(const efr::RealMatrix& design,
                            const std::vector<double>& y,
                            const std::vector<double>& w,
                            const std::vector<double>& theta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < design.rows; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < design.cols; ++j)
            fit += design.at(i, j) * theta[j];
        const double r = y[i] - fit;
        acc += w[i] * r * r;
    }
    return acc;
}

// ---- linear quantile regression by vertex enumeration -------------------

// The check-loss minimum over theta is attained at a vertex where p = #params
// residuals vanish; enumerating all p-subsets and interpolating them exactly
// yields the global optimum for small instances.
inline double quantile_vertex_objective(const efr::RealMatrix& scores,
                                        const std::vector<double>& y,
                                        double tau, bool intercept) {
    const std::size_t n = scores.rows;
    const std::size_t K = scores.cols;
    const std::size_t p = K + (intercept ? 1 : 0);
    auto rho = [tau](double u) { return u * (tau - (u < 0.0 ? 1.0 : 0.0)); };
    auto row = [&](std::size_t i, Eigen::VectorXd& r) {
        std::size_t c = 0;
        if (intercept)
            r(c++) = 1.0;
        for (std::size_t k = 0; k < K; ++k)
            r(c++) = scores.at(i, k);
    };

    double best = kInf;
    if (p == 0)
        return 0.0;
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    auto evaluate = [&]() {
        Eigen::MatrixXd A(p, p);
        Eigen::VectorXd b(p), r(p);
        for (std::size_t q = 0; q < p; ++q) {
            row(idx[q], r);
            A.row(q) = r;
            b(q) = y[idx[q]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible())
            return;
        Eigen::VectorXd theta = lu.solve(b);
        double obj = 0.0;
        Eigen::VectorXd ri(p);
        for (std::size_t i = 0; i < n; ++i) {
            row(i, ri);
            obj += rho(y[i] - ri.dot(theta));
        }
        best = std::min(best, obj);
    };
    // iterative subset enumeration
    while (true) {
        evaluate();
        std::size_t j = p;
        while (j > 0 && idx[j - 1] == n - p + (j - 1))
            --j;
        if (j == 0)
            break;
        ++idx[j - 1];
        for (std::size_t q = j; q < p; ++q)
            idx[q] = idx[q - 1] + 1;
    }
    return best;
}

// ---- cubic B-spline basis via the span-based iterative algorithm ---------

// Returns all nb = #knots - 4 cubic basis function values at s; knots must
// be clamped (first/last repeated 4 times).  Distinct from the recursive
// definition used by the library.
inline std::vector<double> deboor_cubic_basis(const std::vector<double>& knots,
                                              double s) {
    const int pdeg = 3;
    const int nb = static_cast<int>(knots.size()) - pdeg - 1;
    std::vector<double> out(nb, 0.0);

    int span;
    if (s >= knots[nb]) {
        span = nb - 1;
    } else {
        span = pdeg;
        while (span + 1 < nb && knots[span + 1] <= s)
            ++span;
    }

    std::vector<double> N(pdeg + 1, 0.0), left(pdeg + 1), right(pdeg + 1);
    N[0] = 1.0;
    for (int d = 1; d <= pdeg; ++d) {
        left[d] = s - knots[span + 1 - d];
        right[d] = knots[span + d] - s;
        double saved = 0.0;
        for (int r = 0; r < d; ++r) {
            const double denom = right[r + 1] + left[d - r];
            const double tmp = denom != 0.0 ? N[r] / denom : 0.0;
            N[r] = saved + right[r + 1] * tmp;
            saved = left[d - r] * tmp;
        }
        N[d] = saved;
    }
    for (int r = 0; r <= pdeg; ++r) {
        const int j = span - pdeg + r;
        if (j >= 0 && j < nb)
            out[j] = N[r];
    }
    return out;
}

} // namespace oracles
