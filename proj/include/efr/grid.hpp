#pragma once

#include <memory>
#include <string>
#include <vector>

#include "efr/errors.hpp"

namespace efr {

// Shared abscissa grid with trapezoidal quadrature weights.  All L2
// geometry (inner products, norms, distances) runs through these weights,
// so non-uniform grids are handled transparently.
struct Grid {
    std::vector<double> points;       // strictly increasing, size >= 2
    std::vector<double> quad_weights; // trapezoid weights, sum = b - a

    std::size_t size() const { return points.size(); }
    double a() const { return points.front(); }
    double b() const { return points.back(); }
};

using GridPtr = std::shared_ptr<const Grid>;

// Validates the point vector and attaches trapezoid weights.
GridPtr make_grid(std::vector<double> points);

// Uniform grid of S points on [0,1].
GridPtr uniform_grid01(std::size_t S);

// Two grids are interchangeable if they are the same object or have
// identical points (curve files loaded separately must still match).
bool same_grid(const Grid& a, const Grid& b);

struct Curve {
    GridPtr grid;
    std::vector<double> values;
};

Curve make_curve(GridPtr grid, std::vector<double> values);

struct CurveSample {
    GridPtr grid;
    std::vector<Curve> curves;
    std::vector<std::string> ids; // optional, empty or size n

    std::size_t n() const { return curves.size(); }
};

CurveSample make_sample(GridPtr grid, std::vector<Curve> curves,
                        std::vector<std::string> ids = {});

// ---- L2 geometry ------------------------------------------------------

double inner_product(const Curve& f, const Curve& g);
double l2_norm(const Curve& f);
double l2_distance(const Curve& f, const Curve& g);

// Entry i = l2_distance(sample.curves[i], x0).
std::vector<double> distance_matrix(const CurveSample& sample, const Curve& x0);

// Quadrature of a plain value vector against the grid weights.
double integrate(const Grid& grid, const std::vector<double>& values);

} // namespace efr
