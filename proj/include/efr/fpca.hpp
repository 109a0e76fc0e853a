#pragma once

#include <vector>

#include "efr/grid.hpp"

namespace efr {

// Functional principal component basis: mean curve plus the K leading
// eigenfunctions of the empirical covariance operator, L2-orthonormal
// under the grid's quadrature weights.
struct FpcaBasis {
    GridPtr grid;
    Curve mean;
    std::vector<Curve> eigenfunctions; // phi_1 .. phi_K
    std::vector<double> eigenvalues;   // nonincreasing, nonnegative
    double total_variance = 0.0;
    double var_explained = 1.0; // achieved cumulative share

    std::size_t K() const { return eigenfunctions.size(); }
};

// Eigendecomposes W^{1/2} C W^{1/2} (C = sample covariance of curve values,
// W = diag quadrature weights) and rescales eigenvectors by W^{-1/2}, which
// makes the eigenfunctions L2-orthonormal on arbitrary grids.  K is the
// smallest count whose cumulative eigenvalue share reaches var_threshold.
// Sign convention: each eigenfunction has nonnegative inner product with
// the constant curve 1.  A zero-variance sample yields K = 0.
FpcaBasis fit_fpca(const CurveSample& sample, double var_threshold);

// Scores c_k = <phi_k, f - mean>.
std::vector<double> project_scores(const FpcaBasis& basis, const Curve& f);

} // namespace efr
