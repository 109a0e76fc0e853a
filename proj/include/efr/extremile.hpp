#pragma once

#include <vector>

#include "efr/errors.hpp"

namespace efr {

// Extremile order, strictly inside (0,1).
struct ExtremileLevel {
    double tau;

    explicit ExtremileLevel(double t);
};

// r(tau) = s(1-tau) = log(1/2)/log(tau).
double exponent_r(ExtremileLevel tau);
double exponent_s(ExtremileLevel tau);

// Distortion K_tau: 1-(1-t)^{s(tau)} for tau <= 1/2, t^{r(tau)} for
// tau >= 1/2 (the branches agree at tau = 1/2).
double big_k(double t, ExtremileLevel tau);

// Weight density J_tau = K_tau'.  With the branch selection above the
// exponent is always >= 1, so the function stays finite on [0,1]; if an
// endpoint/exponent combination ever diverged, IEEE pow yields the
// documented +infinity sentinel rather than NaN.
double little_j(double t, ExtremileLevel tau);

// Standard normal quantile, rational minimax approximation accurate to
// well below 1e-10 (AS241-class).
double std_normal_quantile(double p);

// Fixed quadrature rule on (0,1): 20-node Gauss-Legendre panels whose
// edges are packed dyadically toward both endpoints (depth 2^-38), so
// integrands with endpoint spikes (J_tau) or mild singularities (the
// normal quantile) are resolved deterministically.
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const QuadRule& unit_quad_rule();

// mu_tau = integral of Phi^{-1}(t) J_tau(t) dt: the standard Gaussian
// extremile of order tau.
double gaussian_extremile(ExtremileLevel tau);

// Fifth root of 4*tau*(1-tau) * V * J_tau(tau)^2 where V is the
// J_tau-weighted variance of the standard normal quantile; rescales kNN
// bandwidths per level.
double adaptive_factor(ExtremileLevel tau);

} // namespace efr
