#include "efr/grid.hpp"

#include <cmath>
#include <utility>

namespace efr {

GridPtr make_grid(std::vector<double> points) {
    const std::size_t S = points.size();
    if (S < 2)
        throw domain_error("grid needs at least 2 points");
    for (std::size_t j = 0; j < S; ++j) {
        if (!std::isfinite(points[j]))
            throw data_error("grid point not finite");
        if (j > 0 && points[j] <= points[j - 1])
            throw domain_error("grid points must be strictly increasing");
    }
    std::vector<double> w(S, 0.0);
    for (std::size_t j = 0; j + 1 < S; ++j) {
        const double half = 0.5 * (points[j + 1] - points[j]);
        w[j] += half;
        w[j + 1] += half;
    }
    auto g = std::make_shared<Grid>();
    g->points = std::move(points);
    g->quad_weights = std::move(w);
    return g;
}

GridPtr uniform_grid01(std::size_t S) {
    if (S < 2)
        throw domain_error("grid needs at least 2 points");
    std::vector<double> pts(S);
    for (std::size_t j = 0; j < S; ++j)
        pts[j] = static_cast<double>(j) / static_cast<double>(S - 1);
    return make_grid(std::move(pts));
}

bool same_grid(const Grid& a, const Grid& b) {
    if (&a == &b)
        return true;
    return a.points == b.points;
}

Curve make_curve(GridPtr grid, std::vector<double> values) {
    if (!grid)
        throw domain_error("curve needs a grid");
    if (values.size() != grid->size())
        throw grid_mismatch_error("curve length does not match grid");
    for (double v : values)
        if (!std::isfinite(v))
            throw data_error("curve value not finite");
    return Curve{std::move(grid), std::move(values)};
}

CurveSample make_sample(GridPtr grid, std::vector<Curve> curves,
                        std::vector<std::string> ids) {
    if (!grid)
        throw domain_error("sample needs a grid");
    if (curves.empty())
        throw insufficient_sample_error("sample needs at least one curve");
    for (const Curve& c : curves)
        if (!same_grid(*c.grid, *grid))
            throw grid_mismatch_error("sample curves must share the grid");
    if (!ids.empty() && ids.size() != curves.size())
        throw data_error("id count does not match curve count");
    return CurveSample{std::move(grid), std::move(curves), std::move(ids)};
}

static void check_same_grid(const Curve& f, const Curve& g) {
    if (!same_grid(*f.grid, *g.grid))
        throw grid_mismatch_error("curves live on different grids");
}

double inner_product(const Curve& f, const Curve& g) {
    check_same_grid(f, g);
    const std::vector<double>& w = f.grid->quad_weights;
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        acc += w[j] * f.values[j] * g.values[j];
    return acc;
}

double l2_norm(const Curve& f) {
    const std::vector<double>& w = f.grid->quad_weights;
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
        acc += w[j] * f.values[j] * f.values[j];
    return std::sqrt(acc);
}

double l2_distance(const Curve& f, const Curve& g) {
    check_same_grid(f, g);
    const std::vector<double>& w = f.grid->quad_weights;
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double d = f.values[j] - g.values[j];
        acc += w[j] * d * d;
    }
    return std::sqrt(acc);
}

std::vector<double> distance_matrix(const CurveSample& sample, const Curve& x0) {
    if (!same_grid(*sample.grid, *x0.grid))
        throw grid_mismatch_error("evaluation curve not on sample grid");
    std::vector<double> d(sample.n());
    for (std::size_t i = 0; i < sample.n(); ++i)
        d[i] = l2_distance(sample.curves[i], x0);
    return d;
}

double integrate(const Grid& grid, const std::vector<double>& values) {
    if (values.size() != grid.size())
        throw grid_mismatch_error("value vector does not match grid");
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
        acc += grid.quad_weights[j] * values[j];
    return acc;
}

} // namespace efr
