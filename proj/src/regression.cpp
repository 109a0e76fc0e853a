#include "efr/regression.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace efr {

namespace {

void check_fit_inputs(const CurveSample& sample, const std::vector<double>& responses) {
    if (responses.size() != sample.n())
        throw data_error("response count does not match curve count");
    for (double y : responses)
        if (!std::isfinite(y))
            throw data_error("non-finite response");
}

// Per-evaluation-point state shared across levels: distances, design and
// base (level-free) per-observation kNN radii.
struct FitContext {
    std::vector<double> dist;
    DesignMatrix design;
    std::vector<double> base_bw;
};

KnnBandwidth knn_from_distances(const std::vector<double>& d, std::size_t k,
                                const BandwidthGrid& grid,
                                std::optional<std::size_t> exclude) {
    std::vector<double> ds(d);
    std::sort(ds.begin(), ds.end());

    // open-ball counts per grid value, before any exclusion
    const std::size_t G = grid.values.size();
    std::vector<std::size_t> cnt(G);
    for (std::size_t g = 0; g < G; ++g)
        cnt[g] = static_cast<std::size_t>(
            std::lower_bound(ds.begin(), ds.end(), grid.values[g]) - ds.begin());

    KnnBandwidth fallback{0.0, false};
    bool have_fallback = false;
    for (std::size_t g = 0; g < G; ++g) {
        std::size_t c = cnt[g];
        if (exclude && d[*exclude] < grid.values[g])
            --c;
        if (c == k)
            return KnnBandwidth{grid.values[g], true};
        if (c > k) {
            if (!have_fallback) {
                fallback.value = grid.values[g];
                have_fallback = true;
            }
            break; // counts are nondecreasing in h: exact k is out of reach
        }
    }
    if (!have_fallback)
        throw selection_error("kNN bandwidth grid does not reach k neighbors");
    return fallback;
}

FitContext make_context(const Curve& x0, const CurveSample& sample,
                        const FpcaBasis& basis, std::size_t k) {
    const std::size_t n = sample.n();
    if (k < 1 || k > n - 1)
        throw domain_error("k must lie in [1, n-1] for per-observation bandwidths");

    FitContext ctx;
    ctx.dist = distance_matrix(sample, x0);
    ctx.design = build_design(basis, x0, sample);
    const BandwidthGrid grid = default_h_grid(ctx.dist);

    // Shared open-ball counts; the per-observation search below only adjusts
    // them by the excluded observation's own indicator.
    std::vector<double> ds(ctx.dist);
    std::sort(ds.begin(), ds.end());
    const std::size_t G = grid.values.size();
    std::vector<std::size_t> cnt(G);
    for (std::size_t g = 0; g < G; ++g)
        cnt[g] = static_cast<std::size_t>(
            std::lower_bound(ds.begin(), ds.end(), grid.values[g]) - ds.begin());

    ctx.base_bw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double chosen = 0.0;
        bool found = false;
        for (std::size_t g = 0; g < G; ++g) {
            std::size_t c = cnt[g];
            if (ctx.dist[i] < grid.values[g])
                --c;
            if (c == k) {
                chosen = grid.values[g];
                found = true;
                break;
            }
            if (c > k) {
                chosen = grid.values[g]; // >= k fallback on ties
                found = true;
                break;
            }
        }
        if (!found)
            throw selection_error("kNN bandwidth grid does not reach k neighbors");
        ctx.base_bw[i] = chosen;
    }
    return ctx;
}

// One level's fit given the shared context; `factor` is adaptive_factor(tau).
ExtremileFit fit_in_context(const FitContext& ctx, const Curve& x0, double tau,
                            double factor, const std::vector<double>& responses,
                            const KernelSpec& kernel,
                            const std::vector<double>& extremile_weights) {
    const std::size_t n = responses.size();
    std::vector<double> bw(n), kw(n);
    for (std::size_t i = 0; i < n; ++i) {
        bw[i] = ctx.base_bw[i] * factor;
        kw[i] = kernel(ctx.dist[i] / bw[i]);
    }
    WlsSolution sol = solve_wls(ctx.design, responses, kw, extremile_weights);

    ExtremileFit fit;
    fit.x0 = x0;
    fit.tau = tau;
    fit.alpha_hat = sol.alpha_hat;
    fit.b_hat = std::move(sol.b_hat);
    fit.bandwidths_used = std::move(bw);
    fit.effective_n = sol.effective_n;
    fit.ridge_used = sol.ridge_used;
    return fit;
}

} // namespace

std::size_t default_k_neighbors(std::size_t n_fit) {
    if (n_fit < 2)
        throw insufficient_sample_error("need at least 2 curves for a kNN bandwidth");
    const auto k = static_cast<std::size_t>(
        std::ceil(0.8 * static_cast<double>(n_fit)));
    return std::min(std::max<std::size_t>(k, 1), n_fit - 1);
}

DesignMatrix build_design(const FpcaBasis& basis, const Curve& x0,
                          const CurveSample& sample) {
    if (!same_grid(*basis.grid, *x0.grid) || !same_grid(*basis.grid, *sample.grid))
        throw grid_mismatch_error("design inputs must share the basis grid");
    const std::size_t n = sample.n();
    const std::size_t K = basis.K();
    DesignMatrix m(n, K + 1);
    std::vector<double> diff(x0.values.size());
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, 0) = 1.0;
        for (std::size_t j = 0; j < diff.size(); ++j)
            diff[j] = x0.values[j] - sample.curves[i].values[j];
        const Curve dc{basis.grid, diff};
        for (std::size_t k = 0; k < K; ++k)
            m.at(i, k + 1) = inner_product(basis.eigenfunctions[k], dc);
    }
    return m;
}

BandwidthGrid default_h_grid(const std::vector<double>& distances) {
    std::vector<double> vals;
    vals.reserve(distances.size() + 1);
    for (double d : distances)
        if (d > 0.0)
            vals.push_back(d);
    if (vals.empty())
        return make_bandwidth_grid({1.0}); // all curves coincide with x0
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    vals.push_back(vals.back() * 1.1);
    return make_bandwidth_grid(std::move(vals));
}

KnnBandwidth knn_bandwidth(const Curve& x0, const CurveSample& sample,
                           std::size_t k, const BandwidthGrid& grid_H,
                           std::optional<std::size_t> exclude) {
    const std::size_t n = sample.n();
    if (exclude && *exclude >= n)
        throw domain_error("exclude index out of range");
    const std::size_t avail = n - (exclude ? 1 : 0);
    if (k < 1 || k > avail)
        throw domain_error("k must lie in [1, available sample size]");
    return knn_from_distances(distance_matrix(sample, x0), k, grid_H, exclude);
}

double tau_bandwidth(double h_k, ExtremileLevel tau) {
    if (!(h_k > 0.0))
        throw domain_error("bandwidth must be positive");
    return h_k * adaptive_factor(tau);
}

WlsSolution solve_wls(const DesignMatrix& design,
                      const std::vector<double>& responses,
                      const std::vector<double>& kernel_weights,
                      const std::vector<double>& extremile_weights) {
    const std::size_t n = design.rows;
    const std::size_t p = design.cols;
    if (responses.size() != n || kernel_weights.size() != n ||
        extremile_weights.size() != n)
        throw data_error("weight/response length does not match the design");

    Eigen::VectorXd wt(n);
    std::size_t effective = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (kernel_weights[i] < 0.0 || extremile_weights[i] < 0.0)
            throw domain_error("weights must be nonnegative");
        wt(static_cast<Eigen::Index>(i)) = kernel_weights[i] * extremile_weights[i];
        if (wt(static_cast<Eigen::Index>(i)) > 0.0)
            ++effective;
    }
    if (effective == 0)
        throw empty_neighborhood_error("all observation weights vanish");

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        Phi(design.data.data(), static_cast<Eigen::Index>(n),
            static_cast<Eigen::Index>(p));
    Eigen::Map<const Eigen::VectorXd> y(responses.data(),
                                        static_cast<Eigen::Index>(n));

    Eigen::MatrixXd A = Phi.transpose() * wt.asDiagonal() * Phi;
    Eigen::VectorXd b = Phi.transpose() * wt.cwiseProduct(y);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double emax = es.eigenvalues().maxCoeff();
    const double emin = es.eigenvalues().minCoeff();
    bool ridge = false;
    if (!(emin > 0.0) || emax / emin > 1e12) {
        A.diagonal().array() += 1e-8 * A.trace() / static_cast<double>(p);
        ridge = true;
    }
    const Eigen::VectorXd theta = A.ldlt().solve(b);

    WlsSolution sol;
    sol.alpha_hat = theta(0);
    sol.b_hat.assign(theta.data() + 1, theta.data() + p);
    sol.ridge_used = ridge;
    sol.effective_n = effective;
    if (!std::isfinite(sol.alpha_hat))
        throw error("weighted least squares produced a non-finite estimate");
    return sol;
}

ExtremileFit fit_extremile(const Curve& x0, ExtremileLevel tau,
                           const CurveSample& sample,
                           const std::vector<double>& responses,
                           const FpcaBasis& basis, const KernelSpec& kernel,
                           std::size_t k_neighbors, const CcdfConfig& ccdf_config) {
    check_fit_inputs(sample, responses);
    if (sample.n() < basis.K() + 2)
        throw insufficient_sample_error("sample too small for the basis dimension");

    const BandwidthGrid hf = default_hf_grid(sample, ccdf_config.hf_grid_size);
    const std::vector<double> loo_bw =
        loo_bandwidths(sample, responses, hf, ccdf_config.kernel,
                       ccdf_config.kappa, ccdf_config.vhat_form);
    const std::vector<double> ew =
        ccdf_weights_at_responses(sample, responses, loo_bw, ccdf_config.kernel, tau);

    const FitContext ctx = make_context(x0, sample, basis, k_neighbors);
    return fit_in_context(ctx, x0, tau.tau, adaptive_factor(tau), responses,
                          kernel, ew);
}

ExtremileFit local_linear_mean(const Curve& x0, const CurveSample& sample,
                               const std::vector<double>& responses,
                               const FpcaBasis& basis, const KernelSpec& kernel,
                               std::size_t k_neighbors) {
    check_fit_inputs(sample, responses);
    if (sample.n() < basis.K() + 2)
        throw insufficient_sample_error("sample too small for the basis dimension");
    const FitContext ctx = make_context(x0, sample, basis, k_neighbors);
    const std::vector<double> ones(sample.n(), 1.0);
    return fit_in_context(ctx, x0, 0.5, adaptive_factor(ExtremileLevel(0.5)),
                          responses, kernel, ones);
}

PredictionMatrix predict_extremiles(const CurveSample& eval_points,
                                    const std::vector<double>& tau_grid,
                                    const CurveSample& sample,
                                    const std::vector<double>& responses,
                                    const FpcaBasis& basis,
                                    const KernelSpec& kernel,
                                    std::size_t k_neighbors,
                                    const CcdfConfig& ccdf_config) {
    check_fit_inputs(sample, responses);
    if (tau_grid.empty())
        throw domain_error("tau grid must be nonempty");
    if (sample.n() < basis.K() + 2)
        throw insufficient_sample_error("sample too small for the basis dimension");

    const std::size_t T = tau_grid.size();
    const BandwidthGrid hf = default_hf_grid(sample, ccdf_config.hf_grid_size);
    const std::vector<double> loo_bw =
        loo_bandwidths(sample, responses, hf, ccdf_config.kernel,
                       ccdf_config.kappa, ccdf_config.vhat_form);
    const std::vector<double> F =
        loo_cdf_values(sample, responses, loo_bw, ccdf_config.kernel);

    std::vector<std::vector<double>> ew(T, std::vector<double>(sample.n()));
    std::vector<double> factors(T);
    for (std::size_t t = 0; t < T; ++t) {
        const ExtremileLevel lvl(tau_grid[t]);
        factors[t] = adaptive_factor(lvl);
        for (std::size_t i = 0; i < sample.n(); ++i)
            ew[t][i] = little_j(F[i], lvl);
    }

    PredictionMatrix out;
    out.values = RealMatrix(eval_points.n(), T,
                            std::numeric_limits<double>::quiet_NaN());
    out.ok.assign(eval_points.n() * T, 0);

    for (std::size_t p = 0; p < eval_points.n(); ++p) {
        FitContext ctx;
        try {
            ctx = make_context(eval_points.curves[p], sample, basis, k_neighbors);
        } catch (const error&) {
            out.failed_cells += T;
            continue;
        }
        for (std::size_t t = 0; t < T; ++t) {
            try {
                const ExtremileFit fit =
                    fit_in_context(ctx, eval_points.curves[p], tau_grid[t],
                                   factors[t], responses, kernel, ew[t]);
                out.values.at(p, t) = fit.alpha_hat;
                out.ok[p * T + t] = 1;
            } catch (const error&) {
                ++out.failed_cells;
            }
        }
    }
    return out;
}

} // namespace efr
