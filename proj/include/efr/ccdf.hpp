#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "efr/extremile.hpp"
#include "efr/grid.hpp"
#include "efr/kernels.hpp"

namespace efr {

// Finite set of candidate bandwidths, strictly increasing and positive.
struct BandwidthGrid {
    std::vector<double> values;
};

BandwidthGrid make_bandwidth_grid(std::vector<double> values);

// Default conditional-CDF grid: hf_grid_size log-spaced values between the
// 5th and 95th percentiles of the positive pairwise curve distances.
BandwidthGrid default_hf_grid(const CurveSample& sample, std::size_t size = 20);

// Variance proxy denominator.  The printed form divides by ln(pi_hat), which
// is nonpositive and breaks the bias/variance argmin; the adopted form
// divides by pi_hat itself.  Both are implemented, adopted is the default.
enum class VhatForm { adopted, printed };

struct CcdfConfig {
    KernelSpec kernel{};
    double kappa = 1.0;
    VhatForm vhat_form = VhatForm::adopted;
    std::size_t hf_grid_size = 20;
};

// Kernel-weighted empirical conditional CDF at y given x0 (bandwidth h_F).
double eval_ccdf(double y, const Curve& x0, const CurveSample& sample,
                 const std::vector<double>& responses, double h_F,
                 const KernelSpec& kernel);

// Fraction of sample curves inside the closed L2 ball of radius h.
double small_ball_hat(const Curve& x0, double h, const CurveSample& sample);

// Variance proxy v(h_F); +infinity when the small ball is empty.
double v_hat(double h_F, const Curve& x0, const CurveSample& sample,
             double kappa, VhatForm form = VhatForm::adopted);

// Bias proxy a(h_F): max over grid bandwidths h' of the positive part of
// the squared-CDF-difference integral minus v(h').  Bandwidths whose
// neighborhood is empty are excluded from the max.
double a_hat(double h_F, const Curve& x0, const CurveSample& sample,
             const std::vector<double>& responses, const BandwidthGrid& grid_HF,
             const KernelSpec& kernel, double kappa,
             VhatForm form = VhatForm::adopted);

// argmin over the grid of a(h) + v(h); ties break to the smallest h.
double select_hf_opt(const Curve& x0, const CurveSample& sample,
                     const std::vector<double>& responses,
                     const BandwidthGrid& grid_HF, const KernelSpec& kernel,
                     double kappa, VhatForm form = VhatForm::adopted);

// Entry i: select_hf_opt centered at X_i with observation i left out of
// both curves and responses.
std::vector<double> loo_bandwidths(const CurveSample& sample,
                                   const std::vector<double>& responses,
                                   const BandwidthGrid& grid_HF,
                                   const KernelSpec& kernel, double kappa,
                                   VhatForm form = VhatForm::adopted);

// Leave-one-out CDF value at each observation's own response, evaluated at
// its selected bandwidth and clamped to [eps_F, 1-eps_F], eps_F = 1/(2n).
std::vector<double> loo_cdf_values(const CurveSample& sample,
                                   const std::vector<double>& responses,
                                   const std::vector<double>& loo_bw,
                                   const KernelSpec& kernel);

// Extremile weights J_tau applied to the leave-one-out CDF values.
std::vector<double> ccdf_weights_at_responses(const CurveSample& sample,
                                              const std::vector<double>& responses,
                                              const std::vector<double>& loo_bw,
                                              const KernelSpec& kernel,
                                              ExtremileLevel tau);

} // namespace efr
