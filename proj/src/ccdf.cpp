#include "efr/ccdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace efr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integration mesh over the response range: observed responses plus 512
// uniform points, sorted and deduplicated.  Captures every step of the
// step-function CDFs at modest cost.
std::vector<double> response_mesh(const std::vector<double>& Y) {
    std::vector<double> mesh(Y);
    const auto [lo_it, hi_it] = std::minmax_element(Y.begin(), Y.end());
    const double lo = *lo_it, hi = *hi_it;
    mesh.reserve(mesh.size() + 512);
    for (int j = 0; j < 512; ++j)
        mesh.push_back(lo + (hi - lo) * (static_cast<double>(j) / 511.0));
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());
    return mesh;
}

// Everything select_hf_opt / a_hat need for one evaluation point, computed
// from the distance vector alone so the leave-one-out path can reuse it.
struct SelectionTables {
    std::vector<double> mesh;
    std::vector<char> usable; // per grid bandwidth: total kernel weight > 0
    std::vector<double> v;    // variance proxy per grid bandwidth
    std::vector<std::vector<double>> F; // per bandwidth: CDF on mesh
};

double v_hat_from(double kappa, VhatForm form, double pi_hat, std::size_t m) {
    if (pi_hat <= 0.0)
        return kInf;
    const double lnm = std::log(static_cast<double>(m));
    if (form == VhatForm::adopted)
        return kappa * lnm / (static_cast<double>(m) * pi_hat);
    return kappa * lnm / (static_cast<double>(m) * std::log(pi_hat));
}

SelectionTables build_tables(const std::vector<double>& d,
                             const std::vector<double>& Y,
                             const BandwidthGrid& grid, const KernelSpec& kernel,
                             double kappa, VhatForm form) {
    const std::size_t m = Y.size();
    SelectionTables t;
    t.mesh = response_mesh(Y);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return Y[a] < Y[b]; });
    std::vector<double> Ys(m);
    for (std::size_t i = 0; i < m; ++i)
        Ys[i] = Y[order[i]];

    const std::size_t G = grid.values.size();
    t.usable.assign(G, 0);
    t.v.assign(G, kInf);
    t.F.assign(G, {});

    std::vector<double> cw(m);
    for (std::size_t g = 0; g < G; ++g) {
        const double h = grid.values[g];
        double tw = 0.0;
        std::size_t inside = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (d[i] <= h)
                ++inside;
        }
        t.v[g] = v_hat_from(kappa, form, static_cast<double>(inside) / m, m);

        for (std::size_t i = 0; i < m; ++i) {
            const double kw = kernel(d[order[i]] / h);
            tw += kw;
            cw[i] = tw;
        }
        if (!(tw > 0.0))
            continue;
        t.usable[g] = 1;

        std::vector<double> Fg(t.mesh.size());
        std::size_t p = 0;
        for (std::size_t j = 0; j < t.mesh.size(); ++j) {
            while (p < m && Ys[p] <= t.mesh[j])
                ++p;
            Fg[j] = p == 0 ? 0.0 : cw[p - 1] / tw;
        }
        t.F[g] = std::move(Fg);
    }
    return t;
}

// Trapezoid integral of (F_a - F_b)^2 over the mesh.
double sq_diff_integral(const SelectionTables& t, std::size_t a, std::size_t b) {
    const std::vector<double>& Fa = t.F[a];
    const std::vector<double>& Fb = t.F[b];
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < t.mesh.size(); ++j) {
        const double g0 = Fa[j] - Fb[j];
        const double g1 = Fa[j + 1] - Fb[j + 1];
        acc += 0.5 * (g0 * g0 + g1 * g1) * (t.mesh[j + 1] - t.mesh[j]);
    }
    return acc;
}

// Bias proxy for grid index g.  Only h' < h contributes: at h' >= h the
// comparison estimate F_{h v h'} equals F_{h'} and the bracket clamps to 0.
double a_from_tables(const SelectionTables& t, std::size_t g) {
    double best = 0.0;
    for (std::size_t gp = 0; gp < g; ++gp) {
        if (!t.usable[gp] || std::isinf(t.v[gp]))
            continue;
        const double val = sq_diff_integral(t, gp, g) - t.v[gp];
        if (val > best)
            best = val;
    }
    return best;
}

double select_from_tables(const SelectionTables& t, const BandwidthGrid& grid) {
    double best_crit = kInf;
    std::size_t best_g = grid.values.size();
    for (std::size_t g = 0; g < grid.values.size(); ++g) {
        if (!t.usable[g])
            continue;
        const double crit = a_from_tables(t, g) + t.v[g];
        if (crit < best_crit) {
            best_crit = crit;
            best_g = g;
        }
    }
    if (best_g == grid.values.size())
        throw selection_error("no usable conditional-CDF bandwidth in the grid");
    return grid.values[best_g];
}

std::vector<double> pairwise_positive_distances(const CurveSample& sample) {
    std::vector<double> pd;
    pd.reserve(sample.n() * (sample.n() - 1) / 2);
    for (std::size_t i = 0; i < sample.n(); ++i)
        for (std::size_t j = i + 1; j < sample.n(); ++j) {
            const double d = l2_distance(sample.curves[i], sample.curves[j]);
            if (d > 0.0)
                pd.push_back(d);
        }
    return pd;
}

double percentile(const std::vector<double>& sorted, double p) {
    const double idx = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    if (lo + 1 >= sorted.size())
        return sorted.back();
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

void check_responses(const CurveSample& sample, const std::vector<double>& Y) {
    if (Y.size() != sample.n())
        throw data_error("response count does not match curve count");
    for (double y : Y)
        if (!std::isfinite(y))
            throw data_error("non-finite response");
}

} // namespace

BandwidthGrid make_bandwidth_grid(std::vector<double> values) {
    if (values.empty())
        throw domain_error("bandwidth grid must be nonempty");
    for (std::size_t g = 0; g < values.size(); ++g) {
        if (!(values[g] > 0.0) || !std::isfinite(values[g]))
            throw domain_error("bandwidths must be positive finite");
        if (g > 0 && values[g] <= values[g - 1])
            throw domain_error("bandwidth grid must be strictly increasing");
    }
    return BandwidthGrid{std::move(values)};
}

BandwidthGrid default_hf_grid(const CurveSample& sample, std::size_t size) {
    if (size == 0)
        throw domain_error("bandwidth grid size must be positive");
    std::vector<double> pd = pairwise_positive_distances(sample);
    if (pd.empty())
        throw selection_error("all curves coincide: no positive distances for the bandwidth grid");
    std::sort(pd.begin(), pd.end());
    const double lo = percentile(pd, 0.05);
    const double hi = percentile(pd, 0.95);
    if (!(hi > lo) || size == 1)
        return make_bandwidth_grid({lo});
    std::vector<double> vals(size);
    const double ratio = hi / lo;
    for (std::size_t g = 0; g < size; ++g)
        vals[g] = lo * std::pow(ratio, static_cast<double>(g) / static_cast<double>(size - 1));
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return make_bandwidth_grid(std::move(vals));
}

double eval_ccdf(double y, const Curve& x0, const CurveSample& sample,
                 const std::vector<double>& responses, double h_F,
                 const KernelSpec& kernel) {
    check_responses(sample, responses);
    if (!(h_F > 0.0))
        throw domain_error("bandwidth must be positive");
    double tw = 0.0, num = 0.0;
    for (std::size_t i = 0; i < sample.n(); ++i) {
        const double kw = kernel(l2_distance(sample.curves[i], x0) / h_F);
        tw += kw;
        if (responses[i] <= y)
            num += kw;
    }
    if (!(tw > 0.0))
        throw empty_neighborhood_error("all kernel weights vanish at this bandwidth");
    return num / tw;
}

double small_ball_hat(const Curve& x0, double h, const CurveSample& sample) {
    if (!(h > 0.0))
        throw domain_error("ball radius must be positive");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < sample.n(); ++i)
        if (l2_distance(sample.curves[i], x0) <= h)
            ++inside;
    return static_cast<double>(inside) / static_cast<double>(sample.n());
}

double v_hat(double h_F, const Curve& x0, const CurveSample& sample,
             double kappa, VhatForm form) {
    if (sample.n() < 2)
        throw insufficient_sample_error("v_hat needs at least 2 curves");
    if (!(kappa > 0.0))
        throw domain_error("kappa must be positive");
    return v_hat_from(kappa, form, small_ball_hat(x0, h_F, sample), sample.n());
}

double a_hat(double h_F, const Curve& x0, const CurveSample& sample,
             const std::vector<double>& responses, const BandwidthGrid& grid_HF,
             const KernelSpec& kernel, double kappa, VhatForm form) {
    check_responses(sample, responses);
    std::size_t g = grid_HF.values.size();
    for (std::size_t i = 0; i < grid_HF.values.size(); ++i)
        if (grid_HF.values[i] == h_F) {
            g = i;
            break;
        }
    if (g == grid_HF.values.size())
        throw domain_error("a_hat bandwidth must belong to the grid");
    const SelectionTables t = build_tables(distance_matrix(sample, x0), responses,
                                           grid_HF, kernel, kappa, form);
    return a_from_tables(t, g);
}

double select_hf_opt(const Curve& x0, const CurveSample& sample,
                     const std::vector<double>& responses,
                     const BandwidthGrid& grid_HF, const KernelSpec& kernel,
                     double kappa, VhatForm form) {
    check_responses(sample, responses);
    const SelectionTables t = build_tables(distance_matrix(sample, x0), responses,
                                           grid_HF, kernel, kappa, form);
    return select_from_tables(t, grid_HF);
}

std::vector<double> loo_bandwidths(const CurveSample& sample,
                                   const std::vector<double>& responses,
                                   const BandwidthGrid& grid_HF,
                                   const KernelSpec& kernel, double kappa,
                                   VhatForm form) {
    check_responses(sample, responses);
    const std::size_t n = sample.n();
    if (n < 3)
        throw insufficient_sample_error("leave-one-out selection needs n >= 3");

    std::vector<double> out(n);
    std::vector<double> d(n - 1), Y(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            d[p] = l2_distance(sample.curves[j], sample.curves[i]);
            Y[p] = responses[j];
            ++p;
        }
        const SelectionTables t = build_tables(d, Y, grid_HF, kernel, kappa, form);
        try {
            out[i] = select_from_tables(t, grid_HF);
        } catch (const selection_error&) {
            throw selection_error("leave-one-out bandwidth selection failed at observation " +
                                  std::to_string(i));
        }
    }
    return out;
}

std::vector<double> loo_cdf_values(const CurveSample& sample,
                                   const std::vector<double>& responses,
                                   const std::vector<double>& loo_bw,
                                   const KernelSpec& kernel) {
    check_responses(sample, responses);
    const std::size_t n = sample.n();
    if (loo_bw.size() != n)
        throw data_error("bandwidth vector does not match sample size");
    const double eps_f = 1.0 / (2.0 * static_cast<double>(n));

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double tw = 0.0, num = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            const double kw =
                kernel(l2_distance(sample.curves[j], sample.curves[i]) / loo_bw[i]);
            tw += kw;
            if (responses[j] <= responses[i])
                num += kw;
        }
        if (!(tw > 0.0))
            throw empty_neighborhood_error(
                "empty neighborhood in leave-one-out CDF at observation " + std::to_string(i));
        out[i] = std::clamp(num / tw, eps_f, 1.0 - eps_f);
    }
    return out;
}

std::vector<double> ccdf_weights_at_responses(const CurveSample& sample,
                                              const std::vector<double>& responses,
                                              const std::vector<double>& loo_bw,
                                              const KernelSpec& kernel,
                                              ExtremileLevel tau) {
    std::vector<double> F = loo_cdf_values(sample, responses, loo_bw, kernel);
    for (double& f : F)
        f = little_j(f, tau);
    return F;
}

} // namespace efr
