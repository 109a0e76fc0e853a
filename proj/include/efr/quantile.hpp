#pragma once

#include <vector>

#include "efr/matrix.hpp"

namespace efr {

struct QuantileFit {
    double tau = 0.5;
    double intercept = 0.0;
    std::vector<double> coefficients; // one per score column
    bool converged = false;
    double objective = 0.0; // final check loss
};

// rho_tau(u) = u * (tau - 1{u < 0}).
double check_loss(double u, double tau);

// Linear quantile regression of responses on FPC scores, solved by
// iteratively reweighted least squares on a smoothed check loss (smoothing
// decays geometrically 1e-2 -> 1e-8, at most 200 iterations) followed by an
// iterated active-set interpolation polish that walks the solution onto the
// optimal vertex.  The intercept is included by default; with_intercept=false keeps
// the literal score-only model.
QuantileFit fit_quantile(const RealMatrix& scores,
                         const std::vector<double>& responses, double tau,
                         bool with_intercept = true);

// Rows = points, columns = the fits' levels.
RealMatrix predict_quantiles(const std::vector<QuantileFit>& fits,
                             const RealMatrix& scores);

} // namespace efr
