#include "efr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "efr/fpca.hpp"
#include "efr/quantile.hpp"
#include "efr/regression.hpp"
#include "efr/rng.hpp"

namespace efr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cox-de Boor, direct recursion.  The domain's right endpoint is folded
// into the last nonempty span so the clamped basis sums to one at s = b.
double cox_de_boor(const std::vector<double>& t, std::size_t j, std::size_t order,
                   double s, double b) {
    if (order == 1) {
        if (t[j] <= s && s < t[j + 1])
            return 1.0;
        if (s == b && t[j + 1] == b && t[j] < s)
            return 1.0;
        return 0.0;
    }
    double acc = 0.0;
    const double dl = t[j + order - 1] - t[j];
    if (dl > 0.0)
        acc += (s - t[j]) / dl * cox_de_boor(t, j, order - 1, s, b);
    const double dr = t[j + order] - t[j + 1];
    if (dr > 0.0)
        acc += (t[j + order] - s) / dr * cox_de_boor(t, j + 1, order - 1, s, b);
    return acc;
}

struct ScenarioBasis {
    std::vector<Curve> factors;  // 5 curves
    std::vector<double> mean;    // coefficient means
    std::vector<double> sd;      // coefficient standard deviations
};

ScenarioBasis scenario_basis(char scenario, const GridPtr& grid) {
    ScenarioBasis sb;
    if (scenario == 'A') {
        std::vector<Curve> bs = bspline_basis(7, grid);
        sb.factors.assign(bs.begin() + 1, bs.begin() + 6); // five central
        sb.mean = {0.0, 0.0, 0.0, 0.0, 0.0};
        sb.sd = {0.5, 0.5, 0.25, 0.05, 0.05};
        return sb;
    }
    const std::size_t S = grid->size();
    std::vector<std::vector<double>> vals(5, std::vector<double>(S));
    for (std::size_t j = 0; j < S; ++j) {
        const double s = grid->points[j];
        vals[0][j] = 1.0;
        vals[1][j] = std::sin(M_PI * s);
        vals[2][j] = std::cos(10.0 * M_PI * s);
        vals[3][j] = std::sin(30.0 * M_PI * s);
        vals[4][j] = std::cos(40.0 * M_PI * s);
    }
    for (auto& v : vals)
        sb.factors.push_back(Curve{grid, std::move(v)});
    sb.mean = {0.0, 2.0, 0.0, 0.0, 0.0};
    sb.sd = {0.25, 1.0, 0.5, 0.05, 0.05};
    return sb;
}

std::size_t resolve_k(const ScenarioConfig& cfg, std::size_t n_fit) {
    if (cfg.k_neighbors == 0)
        return default_k_neighbors(n_fit);
    return std::min(cfg.k_neighbors, n_fit - 1);
}

CcdfConfig ccdf_config_of(const ScenarioConfig& cfg) {
    CcdfConfig c;
    c.kernel = cfg.kernel;
    c.kappa = cfg.kappa;
    c.vhat_form = cfg.vhat_form;
    c.hf_grid_size = cfg.hf_grid_size;
    return c;
}

RealMatrix truth_matrix(const CurveSample& points,
                        const std::vector<double>& tau_grid,
                        const ScenarioConfig& cfg) {
    const Curve beta = beta_curve(points.grid);
    RealMatrix truth(points.n(), tau_grid.size());
    std::vector<double> mu(tau_grid.size());
    for (std::size_t t = 0; t < tau_grid.size(); ++t)
        mu[t] = gaussian_extremile(ExtremileLevel(tau_grid[t]));
    for (std::size_t i = 0; i < points.n(); ++i) {
        const Curve& x = points.curves[i];
        const double lin = inner_product(beta, x);
        std::vector<double> ax(x.values.size());
        for (std::size_t j = 0; j < ax.size(); ++j)
            ax[j] = std::fabs(x.values[j]);
        const double sig = 1.0 + integrate(*points.grid, ax);
        for (std::size_t t = 0; t < tau_grid.size(); ++t)
            truth.at(i, t) = cfg.beta0 + lin + cfg.sigma_eps * sig * mu[t];
    }
    return truth;
}

// Crossing scan that tolerates missing cells.
bool has_crossing_masked(const RealMatrix& est, const std::vector<std::uint8_t>& ok) {
    const std::size_t T = est.cols;
    for (std::size_t i = 0; i < est.rows; ++i)
        for (std::size_t a = 0; a < T; ++a) {
            if (!ok[i * T + a])
                continue;
            for (std::size_t b = a + 1; b < T; ++b) {
                if (!ok[i * T + b])
                    continue;
                if (est.at(i, a) > est.at(i, b))
                    return true;
            }
        }
    return false;
}

std::vector<double> masked_col_mse(const RealMatrix& est,
                                   const std::vector<std::uint8_t>& ok,
                                   const RealMatrix& truth) {
    const std::size_t T = est.cols;
    std::vector<double> mse(T, kNaN);
    for (std::size_t t = 0; t < T; ++t) {
        double acc = 0.0;
        std::size_t m = 0;
        for (std::size_t i = 0; i < est.rows; ++i) {
            if (!ok[i * T + t])
                continue;
            const double d = est.at(i, t) - truth.at(i, t);
            acc += d * d;
            ++m;
        }
        if (m == 0)
            throw error("no valid estimates at one level in a replication");
        mse[t] = acc / static_cast<double>(m);
    }
    return mse;
}

struct RepOutcome {
    std::vector<double> mse;
    bool crossed_extremile = false;
    bool crossed_quantile = false;
    std::size_t failed_cells = 0;
};

RepOutcome run_one_rep(const ScenarioConfig& cfg, std::uint64_t b) {
    const ScenarioDraw draw = gen_scenario(cfg, b);
    const std::vector<double>& taus = cfg.tau_grid;
    const RealMatrix truth = truth_matrix(draw.sample, taus, cfg);

    RepOutcome out;
    if (cfg.truth_hook) {
        out.mse.assign(taus.size(), 0.0);
        return out;
    }

    const FpcaBasis basis = fit_fpca(draw.sample, cfg.var_threshold);
    const std::size_t k = resolve_k(cfg, draw.sample.n());
    const PredictionMatrix pred =
        predict_extremiles(draw.sample, taus, draw.sample, draw.responses, basis,
                           cfg.kernel, k, ccdf_config_of(cfg));
    out.failed_cells = pred.failed_cells;
    out.mse = masked_col_mse(pred.values, pred.ok, truth);
    out.crossed_extremile = has_crossing_masked(pred.values, pred.ok);

    RealMatrix scores(draw.sample.n(), basis.K());
    for (std::size_t i = 0; i < draw.sample.n(); ++i) {
        const std::vector<double> sc = project_scores(basis, draw.sample.curves[i]);
        for (std::size_t kk = 0; kk < basis.K(); ++kk)
            scores.at(i, kk) = sc[kk];
    }
    std::vector<QuantileFit> qfits;
    qfits.reserve(taus.size());
    for (double tau : taus)
        qfits.push_back(fit_quantile(scores, draw.responses, tau, cfg.qr_intercept));
    out.crossed_quantile = has_crossing(predict_quantiles(qfits, scores));
    return out;
}

} // namespace

void validate_config(const ScenarioConfig& config) {
    if (config.scenario != 'A' && config.scenario != 'B')
        throw domain_error("scenario must be A or B");
    if (config.n < 20)
        throw domain_error("n must be at least 20");
    if (config.S < 10)
        throw domain_error("grid size must be at least 10");
    if (!(config.kappa > 0.0))
        throw domain_error("kappa must be positive");
    if (!(config.sigma_eps > 0.0))
        throw domain_error("sigma_eps must be positive");
    if (config.tau_grid.empty())
        throw domain_error("tau grid must be nonempty");
    for (std::size_t t = 0; t < config.tau_grid.size(); ++t) {
        if (!(config.tau_grid[t] > 0.0) || !(config.tau_grid[t] < 1.0))
            throw domain_error("tau levels must lie strictly in (0,1)");
        if (t > 0 && config.tau_grid[t] <= config.tau_grid[t - 1])
            throw domain_error("tau grid must be strictly increasing");
    }
    if (config.B_reps < 1)
        throw domain_error("replication count must be positive");
    if (!(config.split_fraction > 0.0) || !(config.split_fraction < 1.0))
        throw domain_error("split fraction must lie strictly in (0,1)");
    if (!(config.var_threshold > 0.0) || !(config.var_threshold <= 1.0))
        throw domain_error("variance threshold must lie in (0,1]");
    if (config.hf_grid_size == 0)
        throw domain_error("CDF bandwidth grid size must be positive");
}

std::vector<Curve> bspline_basis(std::size_t df, GridPtr grid) {
    if (df < 4)
        throw domain_error("cubic B-spline basis needs df >= 4");
    const double a = grid->a(), b = grid->b();
    std::vector<double> knots;
    knots.insert(knots.end(), 4, a);
    const std::size_t interior = df - 4;
    for (std::size_t i = 1; i <= interior; ++i)
        knots.push_back(a + (b - a) * static_cast<double>(i) /
                                static_cast<double>(interior + 1));
    knots.insert(knots.end(), 4, b);

    std::vector<Curve> basis;
    basis.reserve(df);
    for (std::size_t j = 0; j < df; ++j) {
        std::vector<double> vals(grid->size());
        for (std::size_t p = 0; p < grid->size(); ++p)
            vals[p] = cox_de_boor(knots, j, 4, grid->points[p], b);
        basis.push_back(Curve{grid, std::move(vals)});
    }
    return basis;
}

ScenarioDraw gen_scenario(const ScenarioConfig& config, std::uint64_t rep_index) {
    std::mt19937_64 eng = rep_engine(config.seed, rep_index);
    return gen_scenario(config, eng);
}

ScenarioDraw gen_scenario(const ScenarioConfig& config, std::mt19937_64& eng) {
    validate_config(config);
    const GridPtr grid = uniform_grid01(config.S);
    const ScenarioBasis sb = scenario_basis(config.scenario, grid);
    const std::size_t n = config.n;
    const std::size_t S = config.S;

    std::vector<Curve> curves;
    curves.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double c[5];
        for (std::size_t k = 0; k < 5; ++k)
            c[k] = sb.mean[k] + sb.sd[k] * draw_normal(eng);
        std::vector<double> vals(S, 0.0);
        for (std::size_t k = 0; k < 5; ++k)
            for (std::size_t j = 0; j < S; ++j)
                vals[j] += c[k] * sb.factors[k].values[j];
        curves.push_back(Curve{grid, std::move(vals)});
    }

    std::vector<std::string> ids(n);
    {
        const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
        for (std::size_t i = 0; i < n; ++i) {
            std::string num = std::to_string(i + 1);
            if (num.size() < width)
                num.insert(0, width - num.size(), '0');
            ids[i] = "c" + num;
        }
    }
    ScenarioDraw draw{make_sample(grid, std::move(curves), std::move(ids)), {}, {}};
    const Curve beta = beta_curve(grid);
    draw.responses.resize(n);
    draw.sigma_x.resize(n);
    std::vector<double> ax(S);
    for (std::size_t i = 0; i < n; ++i) {
        const Curve& x = draw.sample.curves[i];
        for (std::size_t j = 0; j < S; ++j)
            ax[j] = std::fabs(x.values[j]);
        draw.sigma_x[i] = 1.0 + integrate(*grid, ax);
        draw.responses[i] = config.beta0 + inner_product(beta, x) +
                            draw.sigma_x[i] * config.sigma_eps * draw_normal(eng);
    }
    return draw;
}

Curve beta_curve(GridPtr grid) {
    std::vector<double> vals(grid->size());
    for (std::size_t j = 0; j < grid->size(); ++j)
        vals[j] = 2.0 * std::cos(2.0 * M_PI * grid->points[j]);
    return Curve{std::move(grid), std::move(vals)};
}

double true_extremile(const Curve& x, ExtremileLevel tau,
                      const ScenarioConfig& config) {
    const Curve beta = beta_curve(x.grid);
    std::vector<double> ax(x.values.size());
    for (std::size_t j = 0; j < ax.size(); ++j)
        ax[j] = std::fabs(x.values[j]);
    const double sig = 1.0 + integrate(*x.grid, ax);
    return config.beta0 + inner_product(beta, x) +
           config.sigma_eps * sig * gaussian_extremile(tau);
}

bool has_crossing(const RealMatrix& estimates) {
    for (std::size_t i = 0; i < estimates.rows; ++i)
        for (std::size_t a = 0; a < estimates.cols; ++a)
            for (std::size_t b = a + 1; b < estimates.cols; ++b)
                if (estimates.at(i, a) > estimates.at(i, b))
                    return true;
    return false;
}

double crossing_rate(const std::vector<RealMatrix>& per_rep_estimates) {
    if (per_rep_estimates.empty())
        return 0.0;
    std::size_t crossed = 0;
    for (const RealMatrix& m : per_rep_estimates)
        if (has_crossing(m))
            ++crossed;
    return static_cast<double>(crossed) /
           static_cast<double>(per_rep_estimates.size());
}

McResult run_mc(const ScenarioConfig& config) {
    validate_config(config);
    const std::size_t T = config.tau_grid.size();
    const std::size_t B = config.B_reps;

    McResult res;
    res.per_rep_mse = RealMatrix(B, T, kNaN);
    std::size_t ok_reps = 0, crossed_e = 0, crossed_q = 0;

    for (std::size_t b = 0; b < B; ++b) {
        RepOutcome rep;
        try {
            rep = run_one_rep(config, b);
        } catch (const error&) {
            ++res.failed_reps;
            continue;
        }
        ++ok_reps;
        res.failed_cells += rep.failed_cells;
        for (std::size_t t = 0; t < T; ++t)
            res.per_rep_mse.at(b, t) = rep.mse[t];
        if (rep.crossed_extremile)
            ++crossed_e;
        if (rep.crossed_quantile)
            ++crossed_q;
    }

    if (ok_reps == 0 ||
        static_cast<double>(res.failed_reps) > 0.05 * static_cast<double>(B))
        throw error("campaign failed: " + std::to_string(res.failed_reps) + " of " +
                    std::to_string(B) + " replications errored");

    res.amse.assign(T, 0.0);
    res.sd.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b)
            if (!std::isnan(res.per_rep_mse.at(b, t)))
                acc += res.per_rep_mse.at(b, t);
        res.amse[t] = acc / static_cast<double>(ok_reps);
    }
    if (ok_reps > 1) {
        for (std::size_t t = 0; t < T; ++t) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                if (!std::isnan(res.per_rep_mse.at(b, t))) {
                    const double d = res.per_rep_mse.at(b, t) - res.amse[t];
                    acc += d * d;
                }
            res.sd[t] = std::sqrt(acc / static_cast<double>(ok_reps - 1));
        }
    } else {
        res.sd_defined = false; // single replication: SD reported as 0
    }
    res.crossing_rate_extremile =
        static_cast<double>(crossed_e) / static_cast<double>(ok_reps);
    res.crossing_rate_quantile =
        static_cast<double>(crossed_q) / static_cast<double>(ok_reps);
    return res;
}

PmseResult run_pmse(const ScenarioConfig& config) {
    validate_config(config);
    const std::size_t T = config.tau_grid.size();
    const std::size_t B = config.B_reps;
    const std::size_t n = config.n;
    const auto ntr = static_cast<std::size_t>(
        std::llround(config.split_fraction * static_cast<double>(n)));
    if (ntr < 3 || ntr >= n)
        throw domain_error("split leaves too few training or test observations");

    PmseResult res;
    res.per_rep_mse = RealMatrix(B, T, kNaN);
    std::size_t ok_reps = 0;

    for (std::size_t b = 0; b < B; ++b) {
        try {
            std::mt19937_64 eng = rep_engine(config.seed, b);
            const ScenarioDraw draw = gen_scenario(config, eng);

            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            shuffle_indices(perm, eng);

            std::vector<Curve> tr_curves, te_curves;
            std::vector<double> tr_y;
            tr_curves.reserve(ntr);
            te_curves.reserve(n - ntr);
            tr_y.reserve(ntr);
            for (std::size_t i = 0; i < n; ++i) {
                if (i < ntr) {
                    tr_curves.push_back(draw.sample.curves[perm[i]]);
                    tr_y.push_back(draw.responses[perm[i]]);
                } else {
                    te_curves.push_back(draw.sample.curves[perm[i]]);
                }
            }
            const CurveSample train = make_sample(draw.sample.grid, std::move(tr_curves));
            const CurveSample test = make_sample(draw.sample.grid, std::move(te_curves));
            const RealMatrix truth = truth_matrix(test, config.tau_grid, config);

            std::vector<double> mse;
            std::size_t cell_failures = 0;
            if (config.truth_hook) {
                mse.assign(T, 0.0);
            } else {
                const FpcaBasis basis = fit_fpca(train, config.var_threshold);
                const std::size_t k = resolve_k(config, train.n());
                const PredictionMatrix pred =
                    predict_extremiles(test, config.tau_grid, train, tr_y, basis,
                                       config.kernel, k, ccdf_config_of(config));
                cell_failures = pred.failed_cells;
                mse = masked_col_mse(pred.values, pred.ok, truth);
            }
            ++ok_reps;
            res.failed_cells += cell_failures;
            for (std::size_t t = 0; t < T; ++t)
                res.per_rep_mse.at(b, t) = mse[t];
        } catch (const error&) {
            ++res.failed_reps;
        }
    }

    if (ok_reps == 0 ||
        static_cast<double>(res.failed_reps) > 0.05 * static_cast<double>(B))
        throw error("campaign failed: " + std::to_string(res.failed_reps) + " of " +
                    std::to_string(B) + " replications errored");

    res.apmse.assign(T, 0.0);
    res.sd.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b)
            if (!std::isnan(res.per_rep_mse.at(b, t)))
                acc += res.per_rep_mse.at(b, t);
        res.apmse[t] = acc / static_cast<double>(ok_reps);
    }
    if (ok_reps > 1) {
        for (std::size_t t = 0; t < T; ++t) {
            double acc = 0.0;
            for (std::size_t b = 0; b < B; ++b)
                if (!std::isnan(res.per_rep_mse.at(b, t))) {
                    const double d = res.per_rep_mse.at(b, t) - res.apmse[t];
                    acc += d * d;
                }
            res.sd[t] = std::sqrt(acc / static_cast<double>(ok_reps - 1));
        }
    } else {
        res.sd_defined = false;
    }
    return res;
}

} // namespace efr
