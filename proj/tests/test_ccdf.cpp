#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "efr/ccdf.hpp"
#include "efr/errors.hpp"
#include "efr/extremile.hpp"
#include "efr/grid.hpp"
#include "oracles.hpp"

using namespace efr;

namespace {

oracles::CcdfOracle oracle_for(const Curve& x0, const CurveSample& sample,
                               const std::vector<double>& Y,
                               const BandwidthGrid& grid, const KernelSpec& kernel,
                               double kappa, VhatForm form) {
    oracles::CcdfOracle o;
    o.d = distance_matrix(sample, x0);
    o.Y = Y;
    o.grid = grid.values;
    o.kernel = kernel;
    o.kappa = kappa;
    o.printed_form = form == VhatForm::printed;
    return o;
}

} // namespace

TEST_SUITE("bandwidth grids") {
    TEST_CASE("make_bandwidth_grid validation") {
        CHECK_THROWS_AS(make_bandwidth_grid({}), domain_error);
        CHECK_THROWS_AS(make_bandwidth_grid({0.0, 1.0}), domain_error);
        CHECK_THROWS_AS(make_bandwidth_grid({1.0, 1.0}), domain_error);
        CHECK_THROWS_AS(make_bandwidth_grid({2.0, 1.0}), domain_error);
        auto g = make_bandwidth_grid({0.5, 1.0, 2.0});
        CHECK(g.values.size() == 3);
    }

    TEST_CASE("default grid spans the distance percentiles") {
        auto inst = oracles::make_instance(41, 25, 9);
        auto grid = default_hf_grid(inst.sample, 20);
        REQUIRE(grid.values.size() == 20);
        for (std::size_t g = 1; g < grid.values.size(); ++g)
            CHECK(grid.values[g] > grid.values[g - 1]);

        // Endpoints are the 5th/95th percentile of positive pairwise distances.
        std::vector<double> pd;
        for (std::size_t i = 0; i < inst.sample.n(); ++i)
            for (std::size_t j = i + 1; j < inst.sample.n(); ++j) {
                const double d =
                    l2_distance(inst.sample.curves[i], inst.sample.curves[j]);
                if (d > 0.0)
                    pd.push_back(d);
            }
        std::sort(pd.begin(), pd.end());
        auto pct = [&](double p) {
            const double idx = p * static_cast<double>(pd.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(idx);
            const double frac = idx - static_cast<double>(lo);
            return lo + 1 < pd.size() ? pd[lo] * (1 - frac) + pd[lo + 1] * frac
                                      : pd.back();
        };
        CHECK(grid.values.front() == doctest::Approx(pct(0.05)).epsilon(1e-12));
        CHECK(grid.values.back() == doctest::Approx(pct(0.95)).epsilon(1e-12));
    }

    TEST_CASE("degenerate distances collapse to one bandwidth") {
        auto grid_pts = uniform_grid01(5);
        std::vector<Curve> cs;
        for (int i = 0; i < 4; ++i)
            cs.push_back(make_curve(grid_pts, std::vector<double>(5, i % 2 ? 1.0 : 0.0)));
        auto sample = make_sample(grid_pts, std::move(cs));
        auto grid = default_hf_grid(sample, 20);
        CHECK(grid.values.size() == 1);
    }

    TEST_CASE("coinciding curves cannot build a grid") {
        auto grid_pts = uniform_grid01(5);
        std::vector<Curve> cs;
        for (int i = 0; i < 4; ++i)
            cs.push_back(make_curve(grid_pts, std::vector<double>(5, 2.0)));
        auto sample = make_sample(grid_pts, std::move(cs));
        CHECK_THROWS_AS(default_hf_grid(sample, 20), selection_error);
    }
}

TEST_SUITE("conditional cdf evaluation") {
    TEST_CASE("hand example with the uniform kernel") {
        // Three curves at distances {0.1, 0.2, 0.6} from x0, h = 0.5:
        // the first two get weight 0.5 each, the third is outside.
        auto g = uniform_grid01(2);
        std::vector<Curve> cs;
        for (double c : {0.1, 0.2, 0.6})
            cs.push_back(make_curve(g, {c, c}));
        auto sample = make_sample(g, std::move(cs));
        Curve x0 = make_curve(g, {0.0, 0.0});
        std::vector<double> Y = {1.0, 3.0, 5.0};
        KernelSpec uni{KernelFamily::uniform};
        CHECK(eval_ccdf(0.5, x0, sample, Y, 0.5, uni) == doctest::Approx(0.0));
        CHECK(eval_ccdf(2.0, x0, sample, Y, 0.5, uni) == doctest::Approx(0.5));
        CHECK(eval_ccdf(4.0, x0, sample, Y, 0.5, uni) == doctest::Approx(1.0));
        CHECK(eval_ccdf(9.0, x0, sample, Y, 0.5, uni) == doctest::Approx(1.0));
    }

    TEST_CASE("monotone in y, bounded, with full range") {
        std::mt19937 eng(7);
        std::uniform_real_distribution<double> U(-2.0, 2.0);
        for (int rep = 0; rep < 40; ++rep) {
            auto inst = oracles::make_instance(100 + rep, 12 + rep % 9, 6);
            Curve x0 = inst.sample.curves[rep % inst.sample.n()];
            const KernelSpec kernel{rep % 2 ? KernelFamily::gaussian
                                            : KernelFamily::epanechnikov};
            auto grid = default_hf_grid(inst.sample, 8);
            const double h = grid.values[rep % grid.values.size()];
            double prev = 0.0;
            for (double y = -4.0; y <= 4.0; y += 0.25) {
                const double F = eval_ccdf(y, x0, inst.sample, inst.responses, h, kernel);
                CHECK(F >= prev - 1e-14);
                CHECK(F >= 0.0);
                CHECK(F <= 1.0);
                prev = F;
            }
            const double lo = *std::min_element(inst.responses.begin(),
                                                inst.responses.end());
            const double hi = *std::max_element(inst.responses.begin(),
                                                inst.responses.end());
            CHECK(eval_ccdf(lo - 1.0, x0, inst.sample, inst.responses, h, kernel) == 0.0);
            CHECK(eval_ccdf(hi, x0, inst.sample, inst.responses, h, kernel) == 1.0);
            (void)U;
        }
    }

    TEST_CASE("empty neighborhood throws for compact kernels") {
        auto g = uniform_grid01(2);
        std::vector<Curve> cs;
        cs.push_back(make_curve(g, {5.0, 5.0}));
        cs.push_back(make_curve(g, {6.0, 6.0}));
        auto sample = make_sample(g, std::move(cs));
        Curve x0 = make_curve(g, {0.0, 0.0});
        std::vector<double> Y = {1.0, 2.0};
        CHECK_THROWS_AS(
            eval_ccdf(0.0, x0, sample, Y, 0.01, KernelSpec{KernelFamily::epanechnikov}),
            empty_neighborhood_error);
        // The gaussian kernel keeps support as long as the weight does not
        // underflow to zero (distance 5, h 0.2 gives exp(-312.5) > 0).
        CHECK(eval_ccdf(10.0, x0, sample, Y, 0.2, KernelSpec{KernelFamily::gaussian}) ==
              doctest::Approx(1.0));
    }
}

TEST_SUITE("small ball and variance proxy") {
    TEST_CASE("closed-ball boundary counts") {
        auto g = uniform_grid01(2);
        std::vector<Curve> cs;
        for (double c : {0.3, 0.4, 0.8, 1.6})
            cs.push_back(make_curve(g, {c, c}));
        auto sample = make_sample(g, std::move(cs));
        Curve x0 = make_curve(g, {0.0, 0.0});
        CHECK(small_ball_hat(x0, 0.4, sample) == doctest::Approx(0.5));
        CHECK(small_ball_hat(x0, 0.39999, sample) == doctest::Approx(0.25));
        CHECK(small_ball_hat(x0, 2.0, sample) == doctest::Approx(1.0));
    }

    TEST_CASE("adopted and printed forms against direct formulas") {
        auto g = uniform_grid01(2);
        std::vector<Curve> cs;
        for (double c : {0.1, 0.2, 0.9, 1.4})
            cs.push_back(make_curve(g, {c, c}));
        auto sample = make_sample(g, std::move(cs));
        Curve x0 = make_curve(g, {0.0, 0.0});
        const double m = 4.0, pi = 0.5, kap = 1.7;
        CHECK(v_hat(0.25, x0, sample, kap, VhatForm::adopted) ==
              doctest::Approx(kap * std::log(m) / (m * pi)).epsilon(1e-15));
        CHECK(v_hat(0.25, x0, sample, kap, VhatForm::printed) ==
              doctest::Approx(kap * std::log(m) / (m * std::log(pi))).epsilon(1e-15));
        CHECK(std::isinf(v_hat(0.05, x0, sample, kap, VhatForm::adopted)));
    }
}

TEST_SUITE("bandwidth selection against the brute-force oracle") {
    TEST_CASE("a_hat, v_hat and select_hf_opt match on random instances") {
        int checked = 0;
        for (int rep = 0; rep < 50; ++rep) {
            auto inst = oracles::make_instance(500 + rep, 10 + rep % 14, 5 + rep % 5);
            Curve x0 = inst.sample.curves[rep % inst.sample.n()];
            const KernelSpec kernel{rep % 3 == 0 ? KernelFamily::gaussian
                                                 : KernelFamily::epanechnikov};
            const double kappa = rep % 2 ? 1.0 : 0.5;
            const VhatForm form = rep % 5 == 0 ? VhatForm::printed : VhatForm::adopted;
            auto grid = default_hf_grid(inst.sample, 6 + rep % 6);
            auto o = oracle_for(x0, inst.sample, inst.responses, grid, kernel,
                                kappa, form);

            for (double h : grid.values) {
                if (!o.usable(h))
                    continue;
                const double av = a_hat(h, x0, inst.sample, inst.responses, grid,
                                        kernel, kappa, form);
                CHECK(av == doctest::Approx(o.a(h)).epsilon(1e-9));
                const double vv = v_hat(h, x0, inst.sample, kappa, form);
                if (std::isinf(o.v(h)))
                    CHECK(std::isinf(vv));
                else
                    CHECK(vv == doctest::Approx(o.v(h)).epsilon(1e-12));
            }

            const double sel = select_hf_opt(x0, inst.sample, inst.responses, grid,
                                             kernel, kappa, form);
            auto osel = o.select();
            REQUIRE(osel.has_value());
            if (sel != *osel) {
                // Tie at floating-point noise level: both criteria must agree.
                CHECK(o.crit(sel) ==
                      doctest::Approx(o.crit(*osel)).epsilon(1e-9));
            } else {
                CHECK(sel == *osel);
            }
            ++checked;
        }
        CHECK(checked == 50);
    }

    TEST_CASE("a_hat requires a grid member") {
        auto inst = oracles::make_instance(900, 10, 5);
        auto grid = default_hf_grid(inst.sample, 5);
        Curve x0 = inst.sample.curves[0];
        CHECK_THROWS_AS(a_hat(grid.values[0] * 1.0000001, x0, inst.sample,
                              inst.responses, grid, KernelSpec{}, 1.0),
                        domain_error);
    }

    TEST_CASE("selection fails when no bandwidth is usable") {
        auto g = uniform_grid01(2);
        std::vector<Curve> cs;
        cs.push_back(make_curve(g, {4.0, 4.0}));
        cs.push_back(make_curve(g, {5.0, 5.0}));
        auto sample = make_sample(g, std::move(cs));
        Curve x0 = make_curve(g, {0.0, 0.0});
        std::vector<double> Y = {0.0, 1.0};
        auto grid = make_bandwidth_grid({0.01, 0.02});
        CHECK_THROWS_AS(select_hf_opt(x0, sample, Y, grid,
                                      KernelSpec{KernelFamily::epanechnikov}, 1.0),
                        selection_error);
    }
}

TEST_SUITE("leave-one-out plumbing") {
    TEST_CASE("loo bandwidths equal selection on the reduced sample") {
        auto inst = oracles::make_instance(321, 12, 6);
        const KernelSpec kernel{KernelFamily::epanechnikov};
        auto grid = default_hf_grid(inst.sample, 8);
        auto loo = loo_bandwidths(inst.sample, inst.responses, grid, kernel, 1.0);
        REQUIRE(loo.size() == inst.sample.n());

        for (std::size_t i = 0; i < inst.sample.n(); ++i) {
            std::vector<Curve> cs;
            std::vector<double> Y;
            for (std::size_t j = 0; j < inst.sample.n(); ++j) {
                if (j == i)
                    continue;
                cs.push_back(inst.sample.curves[j]);
                Y.push_back(inst.responses[j]);
            }
            auto reduced = make_sample(inst.sample.grid, std::move(cs));
            const double expect = select_hf_opt(inst.sample.curves[i], reduced, Y,
                                                grid, kernel, 1.0);
            CHECK(loo[i] == expect);
        }
    }

    TEST_CASE("loo cdf values are clamped and reproducible") {
        auto inst = oracles::make_instance(654, 14, 5);
        const KernelSpec kernel{KernelFamily::gaussian};
        auto grid = default_hf_grid(inst.sample, 8);
        auto loo = loo_bandwidths(inst.sample, inst.responses, grid, kernel, 1.0);
        auto F = loo_cdf_values(inst.sample, inst.responses, loo, kernel);
        const double n = static_cast<double>(inst.sample.n());
        for (std::size_t i = 0; i < inst.sample.n(); ++i) {
            CHECK(F[i] >= 1.0 / (2.0 * n));
            CHECK(F[i] <= 1.0 - 1.0 / (2.0 * n));

            std::vector<Curve> cs;
            std::vector<double> Y;
            for (std::size_t j = 0; j < inst.sample.n(); ++j) {
                if (j == i)
                    continue;
                cs.push_back(inst.sample.curves[j]);
                Y.push_back(inst.responses[j]);
            }
            auto reduced = make_sample(inst.sample.grid, std::move(cs));
            double raw = eval_ccdf(inst.responses[i], inst.sample.curves[i], reduced,
                                   Y, loo[i], kernel);
            raw = std::min(std::max(raw, 1.0 / (2.0 * n)), 1.0 - 1.0 / (2.0 * n));
            CHECK(F[i] == doctest::Approx(raw).epsilon(1e-14));
        }
    }

    TEST_CASE("median-level weights are exactly one") {
        auto inst = oracles::make_instance(777, 10, 5);
        const KernelSpec kernel{KernelFamily::epanechnikov};
        auto grid = default_hf_grid(inst.sample, 6);
        auto loo = loo_bandwidths(inst.sample, inst.responses, grid, kernel, 1.0);
        auto w = ccdf_weights_at_responses(inst.sample, inst.responses, loo, kernel,
                                           ExtremileLevel(0.5));
        for (double wi : w)
            CHECK(wi == 1.0);
    }

    TEST_CASE("weights are the density applied to the loo cdf values") {
        auto inst = oracles::make_instance(888, 11, 6);
        const KernelSpec kernel{KernelFamily::gaussian};
        auto grid = default_hf_grid(inst.sample, 7);
        auto loo = loo_bandwidths(inst.sample, inst.responses, grid, kernel, 1.0);
        auto F = loo_cdf_values(inst.sample, inst.responses, loo, kernel);
        for (double tau : {0.1, 0.35, 0.8}) {
            auto w = ccdf_weights_at_responses(inst.sample, inst.responses, loo,
                                               kernel, ExtremileLevel(tau));
            for (std::size_t i = 0; i < w.size(); ++i)
                CHECK(w[i] ==
                      doctest::Approx(little_j(F[i], ExtremileLevel(tau)))
                          .epsilon(1e-14));
        }
    }

    TEST_CASE("loo needs at least three curves") {
        auto inst = oracles::make_instance(999, 2, 5);
        auto grid = make_bandwidth_grid({1.0});
        CHECK_THROWS_AS(
            loo_bandwidths(inst.sample, inst.responses, grid, KernelSpec{}, 1.0),
            insufficient_sample_error);
    }
}
