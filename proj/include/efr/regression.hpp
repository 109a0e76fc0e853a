#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "efr/ccdf.hpp"
#include "efr/extremile.hpp"
#include "efr/fpca.hpp"
#include "efr/grid.hpp"
#include "efr/kernels.hpp"
#include "efr/matrix.hpp"

namespace efr {

// Local linear design at x0: row i = (1, <phi_1, x0 - X_i>, ..., <phi_K, x0 - X_i>).
using DesignMatrix = RealMatrix;

DesignMatrix build_design(const FpcaBasis& basis, const Curve& x0,
                          const CurveSample& sample);

// Smallest grid bandwidth whose open ball around x0 captures exactly k
// curves (optionally not counting `exclude`); `exact` reports whether the
// exact count was attainable or the >= k fallback fired on distance ties.
struct KnnBandwidth {
    double value = 0.0;
    bool exact = true;
};

KnnBandwidth knn_bandwidth(const Curve& x0, const CurveSample& sample,
                           std::size_t k, const BandwidthGrid& grid_H,
                           std::optional<std::size_t> exclude = std::nullopt);

// Default kNN grid: the sorted distinct positive distances from x0 plus a
// 10% headroom value, so an exact count is attainable absent ties.
BandwidthGrid default_h_grid(const std::vector<double>& distances);

// Level-adaptive rescaling of a kNN radius.
double tau_bandwidth(double h_k, ExtremileLevel tau);

struct WlsSolution {
    double alpha_hat = 0.0;
    std::vector<double> b_hat;
    bool ridge_used = false;
    std::size_t effective_n = 0; // observations with positive total weight
};

// Solves (Phi' W_tau Phi) theta = Phi' W_tau Y with
// W_tau = diag(kernel_weights * extremile_weights).  A gram condition
// estimate above 1e12 triggers a flagged ridge of 1e-8 * trace/(K+1).
WlsSolution solve_wls(const DesignMatrix& design,
                      const std::vector<double>& responses,
                      const std::vector<double>& kernel_weights,
                      const std::vector<double>& extremile_weights);

struct ExtremileFit {
    Curve x0;
    double tau = 0.5;
    double alpha_hat = 0.0;         // conditional extremile estimate
    std::vector<double> b_hat;      // functional-derivative coefficients
    std::vector<double> bandwidths_used; // per-observation h^k_{tau,i}
    std::size_t effective_n = 0;
    bool ridge_used = false;
};

// Full estimator: leave-one-out CDF weights J_tau(F_hat(Y_i|X_i)),
// per-observation tau-adaptive kNN bandwidths, kernel weights in curve
// distance, closed-form WLS.
ExtremileFit fit_extremile(const Curve& x0, ExtremileLevel tau,
                           const CurveSample& sample,
                           const std::vector<double>& responses,
                           const FpcaBasis& basis, const KernelSpec& kernel,
                           std::size_t k_neighbors, const CcdfConfig& ccdf_config);

// tau = 0.5 special case: unit extremile weights, same code path.
ExtremileFit local_linear_mean(const Curve& x0, const CurveSample& sample,
                               const std::vector<double>& responses,
                               const FpcaBasis& basis, const KernelSpec& kernel,
                               std::size_t k_neighbors);

// Batch prediction over evaluation points and levels.  Per-cell failures
// are collected, not fatal; `ok` marks valid cells.
struct PredictionMatrix {
    RealMatrix values;            // points x taus
    std::vector<std::uint8_t> ok; // same shape, row-major
    std::size_t failed_cells = 0;
};

PredictionMatrix predict_extremiles(const CurveSample& eval_points,
                                    const std::vector<double>& tau_grid,
                                    const CurveSample& sample,
                                    const std::vector<double>& responses,
                                    const FpcaBasis& basis,
                                    const KernelSpec& kernel,
                                    std::size_t k_neighbors,
                                    const CcdfConfig& ccdf_config);

// Auto rule used when no k is given: ceil(0.8 * n_fit), capped at n_fit - 1.
std::size_t default_k_neighbors(std::size_t n_fit);

} // namespace efr
