#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "efr/ccdf.hpp"
#include "efr/extremile.hpp"
#include "efr/grid.hpp"
#include "efr/kernels.hpp"
#include "efr/matrix.hpp"

namespace efr {

// Full parameterization of one Monte Carlo setting.
struct ScenarioConfig {
    char scenario = 'A'; // 'A' (B-spline factors) or 'B' (trigonometric)
    std::size_t n = 200;
    std::size_t S = 100;
    double kappa = 1.0;
    double sigma_eps = 0.25;
    double beta0 = 0.0;
    std::vector<double> tau_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t B_reps = 50;
    KernelSpec kernel{};
    std::uint64_t seed = 1;
    std::size_t k_neighbors = 0; // 0 = auto: ceil(0.8 * fitting sample size)
    double split_fraction = 0.8;
    VhatForm vhat_form = VhatForm::adopted;
    bool qr_intercept = true;
    double var_threshold = 0.95;
    std::size_t hf_grid_size = 20;
    bool truth_hook = false; // test hook: report the analytic truth as estimate
};

void validate_config(const ScenarioConfig& config);

struct McResult {
    std::vector<double> amse; // per tau
    std::vector<double> sd;   // per tau, sample SD over reps
    double crossing_rate_extremile = 0.0;
    double crossing_rate_quantile = 0.0;
    std::vector<double> apmse;   // filled by run_pmse merges, empty here
    std::vector<double> sd_pmse; // same
    RealMatrix per_rep_mse;      // B x taus, NaN for failed reps
    bool sd_defined = true;      // false when only one rep succeeded
    std::size_t failed_reps = 0;
    std::size_t failed_cells = 0;
};

struct PmseResult {
    std::vector<double> apmse;
    std::vector<double> sd;
    RealMatrix per_rep_mse;
    bool sd_defined = true;
    std::size_t failed_reps = 0;
    std::size_t failed_cells = 0;
};

// Cubic B-spline basis with df functions: clamped boundary knots, df-4
// equally spaced interior knots; partition of unity on [a,b].
std::vector<Curve> bspline_basis(std::size_t df, GridPtr grid);

struct ScenarioDraw {
    CurveSample sample;
    std::vector<double> responses;
    std::vector<double> sigma_x; // sigma(X_i) = 1 + integral |X_i|
};

// Deterministic given (config.seed, rep_index); the engine overload lets
// callers keep drawing from the same stream (e.g. the PMSE split).
ScenarioDraw gen_scenario(const ScenarioConfig& config, std::uint64_t rep_index);
ScenarioDraw gen_scenario(const ScenarioConfig& config, std::mt19937_64& eng);

// beta(s) = 2 cos(2 pi s) on the given grid.
Curve beta_curve(GridPtr grid);

// xi_tau(x) = beta0 + <beta, x> + sigma_eps * sigma(x) * mu_tau.
double true_extremile(const Curve& x, ExtremileLevel tau,
                      const ScenarioConfig& config);

// Strict all-pairs crossing: some point i and levels j < k with
// estimate(i,j) > estimate(i,k).  Columns must be in increasing tau order.
bool has_crossing(const RealMatrix& estimates);
double crossing_rate(const std::vector<RealMatrix>& per_rep_estimates);

// In-sample campaign: AMSE/SD per tau plus paired crossing rates for the
// extremile estimator and the FPC-score quantile baseline.
McResult run_mc(const ScenarioConfig& config);

// Out-of-sample campaign: per rep an 80/20-style split, fit on the training
// part, error against the truth at the held-out covariates.
PmseResult run_pmse(const ScenarioConfig& config);

} // namespace efr
