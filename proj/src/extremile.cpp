#include "efr/extremile.hpp"

#include <cmath>

namespace efr {

ExtremileLevel::ExtremileLevel(double t) : tau(t) {
    if (!(t > 0.0) || !(t < 1.0))
        throw domain_error("extremile level must lie strictly in (0,1)");
}

double exponent_r(ExtremileLevel tau) {
    return std::log(0.5) / std::log(tau.tau);
}

double exponent_s(ExtremileLevel tau) {
    return exponent_r(ExtremileLevel(1.0 - tau.tau));
}

double big_k(double t, ExtremileLevel tau) {
    if (!(t >= 0.0) || !(t <= 1.0))
        throw domain_error("K_tau argument must lie in [0,1]");
    if (tau.tau <= 0.5)
        return 1.0 - std::pow(1.0 - t, exponent_s(tau));
    return std::pow(t, exponent_r(tau));
}

double little_j(double t, ExtremileLevel tau) {
    if (!(t >= 0.0) || !(t <= 1.0))
        throw domain_error("J_tau argument must lie in [0,1]");
    if (tau.tau <= 0.5) {
        const double s = exponent_s(tau);
        return s * std::pow(1.0 - t, s - 1.0);
    }
    const double r = exponent_r(tau);
    return r * std::pow(t, r - 1.0);
}

// ---- standard normal quantile (AS241 rational approximations) ---------

double std_normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw domain_error("quantile argument must lie strictly in (0,1)");

    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return q < 0.0 ? -val : val;
}

// ---- fixed quadrature rule on (0,1) ------------------------------------

namespace {

// 20-point Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on
// the Legendre recurrence.
void gauss_legendre20(double* x, double* w) {
    constexpr int N = 20;
    for (int i = 0; i < (N + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (N + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < N; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = N * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::fabs(z - z1) < 1e-15)
                break;
        }
        x[i] = -z;
        x[N - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[N - 1 - i] = w[i];
    }
}

QuadRule build_unit_rule() {
    // Panel edges: 0, 2^-38 .. 2^-1, then mirrored 1-2^-2 .. 1-2^-38, 1.
    // The depth stops at 2^-38 so every mapped node stays strictly inside
    // (0,1) and distinct in double precision (near 1 the spacing is 2^-53);
    // the truncated endpoint mass is O(2^-38 * sqrt(ln 2^38)), far below
    // the 1e-10 accuracy the integrands here need.
    std::vector<double> edges;
    edges.push_back(0.0);
    for (int k = 38; k >= 1; --k)
        edges.push_back(std::ldexp(1.0, -k));
    for (int k = 2; k <= 38; ++k)
        edges.push_back(1.0 - std::ldexp(1.0, -k));
    edges.push_back(1.0);

    double gx[20], gw[20];
    gauss_legendre20(gx, gw);

    QuadRule rule;
    rule.nodes.reserve(20 * (edges.size() - 1));
    rule.weights.reserve(20 * (edges.size() - 1));
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < 20; ++i) {
            rule.nodes.push_back(mid + half * gx[i]);
            rule.weights.push_back(half * gw[i]);
        }
    }
    return rule;
}

} // namespace

const QuadRule& unit_quad_rule() {
    static const QuadRule rule = build_unit_rule();
    return rule;
}

double gaussian_extremile(ExtremileLevel tau) {
    const QuadRule& q = unit_quad_rule();
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
        acc += q.weights[i] * std_normal_quantile(q.nodes[i]) * little_j(q.nodes[i], tau);
    return acc;
}

double adaptive_factor(ExtremileLevel tau) {
    const QuadRule& q = unit_quad_rule();
    const double mu = gaussian_extremile(tau);
    double v = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double d = std_normal_quantile(q.nodes[i]) - mu;
        v += q.weights[i] * d * d * little_j(q.nodes[i], tau);
    }
    const double jt = little_j(tau.tau, tau);
    return std::pow(4.0 * tau.tau * (1.0 - tau.tau) * v * jt * jt, 0.2);
}

} // namespace efr
