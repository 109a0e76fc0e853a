#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "efr/csvio.hpp"
#include "efr/errors.hpp"
#include "efr/grid.hpp"

using namespace efr;

namespace {

// Hand-computed trapezoid weights for {0, 0.5, 1}: {0.25, 0.5, 0.25}.
const std::vector<double> kTriPoints = {0.0, 0.5, 1.0};
const std::vector<double> kTriWeights = {0.25, 0.5, 0.25};

std::filesystem::path tmp_dir() {
    auto p = std::filesystem::temp_directory_path() / "efr_curves_test";
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_SUITE("grid") {
    TEST_CASE("trapezoid weights on a hand example") {
        auto g = make_grid(kTriPoints);
        REQUIRE(g->size() == 3);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(g->quad_weights[j] == doctest::Approx(kTriWeights[j]).epsilon(1e-15));
    }

    TEST_CASE("weights sum to the interval length") {
        auto g = make_grid({-2.0, -0.5, 0.25, 1.0, 3.0});
        double s = 0.0;
        for (double w : g->quad_weights)
            s += w;
        CHECK(s == doctest::Approx(5.0).epsilon(1e-15));
    }

    TEST_CASE("uniform grid endpoints and spacing") {
        auto g = uniform_grid01(5);
        CHECK(g->points.front() == 0.0);
        CHECK(g->points.back() == 1.0);
        CHECK(g->points[2] == doctest::Approx(0.5));
        CHECK(g->a() == 0.0);
        CHECK(g->b() == 1.0);
    }

    TEST_CASE("validation") {
        CHECK_THROWS_AS(make_grid({0.0}), domain_error);
        CHECK_THROWS_AS(make_grid({0.0, 0.0}), domain_error);
        CHECK_THROWS_AS(make_grid({1.0, 0.5}), domain_error);
        CHECK_THROWS_AS(make_grid({0.0, std::nan("")}), data_error);
        CHECK_THROWS_AS(uniform_grid01(1), domain_error);
    }

    TEST_CASE("same_grid semantics") {
        auto g1 = uniform_grid01(4);
        auto g2 = uniform_grid01(4);
        auto g3 = uniform_grid01(5);
        CHECK(same_grid(*g1, *g1));
        CHECK(same_grid(*g1, *g2));
        CHECK_FALSE(same_grid(*g1, *g3));
    }
}

TEST_SUITE("l2 geometry") {
    TEST_CASE("norm of the constant one is one on [0,1]") {
        auto g = uniform_grid01(17);
        Curve one = make_curve(g, std::vector<double>(17, 1.0));
        CHECK(l2_norm(one) == doctest::Approx(1.0).epsilon(1e-15));
    }

    TEST_CASE("inner product against a hand computation") {
        auto g = make_grid(kTriPoints);
        Curve f = make_curve(g, {1.0, 2.0, 3.0});
        Curve h = make_curve(g, {2.0, 0.0, -1.0});
        // sum w_j f_j h_j = 0.25*2 + 0.5*0 + 0.25*(-3) = -0.25
        CHECK(inner_product(f, h) == doctest::Approx(-0.25).epsilon(1e-15));
        CHECK(inner_product(h, f) == doctest::Approx(-0.25).epsilon(1e-15));
    }

    TEST_CASE("trapezoid is exact for affine integrands") {
        auto g = make_grid({0.0, 0.1, 0.35, 0.8, 1.0});
        std::vector<double> v(5);
        for (std::size_t j = 0; j < 5; ++j)
            v[j] = 3.0 * g->points[j] - 1.0;
        CHECK(integrate(*g, v) == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("distance properties on random curves") {
        std::mt19937 eng(11);
        std::normal_distribution<double> N;
        auto g = uniform_grid01(9);
        auto rnd = [&]() {
            std::vector<double> v(9);
            for (auto& x : v)
                x = N(eng);
            return make_curve(g, std::move(v));
        };
        for (int it = 0; it < 25; ++it) {
            Curve a = rnd(), b = rnd(), c = rnd();
            CHECK(l2_distance(a, b) == doctest::Approx(l2_distance(b, a)).epsilon(1e-14));
            CHECK(l2_distance(a, a) == 0.0);
            CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
        }
    }

    TEST_CASE("distance_matrix matches per-element distances") {
        auto inst_grid = uniform_grid01(6);
        std::vector<Curve> cs;
        for (int i = 0; i < 4; ++i) {
            std::vector<double> v(6, static_cast<double>(i));
            cs.push_back(make_curve(inst_grid, std::move(v)));
        }
        auto sample = make_sample(inst_grid, std::move(cs));
        Curve x0 = make_curve(inst_grid, std::vector<double>(6, 0.5));
        auto d = distance_matrix(sample, x0);
        REQUIRE(d.size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(d[i] == doctest::Approx(l2_distance(sample.curves[i], x0)));
    }

    TEST_CASE("grid mismatch is rejected") {
        Curve f = make_curve(uniform_grid01(4), {0, 0, 0, 0});
        Curve h = make_curve(uniform_grid01(5), {0, 0, 0, 0, 0});
        CHECK_THROWS_AS(inner_product(f, h), grid_mismatch_error);
        CHECK_THROWS_AS(make_curve(uniform_grid01(4), {1.0, 2.0}), grid_mismatch_error);
    }
}

TEST_SUITE("csv io") {
    TEST_CASE("curves round-trip bit-exactly") {
        auto dir = tmp_dir();
        auto g = make_grid({0.0, 0.125, 1.0 / 3.0, 0.77});
        std::mt19937 eng(5);
        std::normal_distribution<double> N;
        std::vector<Curve> cs;
        std::vector<std::string> ids;
        for (int i = 0; i < 7; ++i) {
            std::vector<double> v(4);
            for (auto& x : v)
                x = N(eng) * 1e3;
            cs.push_back(make_curve(g, std::move(v)));
            ids.push_back("row" + std::to_string(i));
        }
        auto sample = make_sample(g, std::move(cs), std::move(ids));
        const auto path = (dir / "c.csv").string();
        write_curves(path, sample);
        auto back = read_curves(path);
        REQUIRE(back.n() == sample.n());
        CHECK(same_grid(*back.grid, *sample.grid));
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(back.grid->points[j] == sample.grid->points[j]);
        for (std::size_t i = 0; i < sample.n(); ++i) {
            CHECK(back.ids[i] == sample.ids[i]);
            for (std::size_t j = 0; j < 4; ++j)
                CHECK(back.curves[i].values[j] == sample.curves[i].values[j]);
        }
    }

    TEST_CASE("responses join on ids in any file order") {
        auto dir = tmp_dir();
        auto g = uniform_grid01(3);
        std::vector<Curve> cs;
        for (int i = 0; i < 3; ++i)
            cs.push_back(make_curve(g, {0.0, double(i), 0.0}));
        auto sample = make_sample(g, std::move(cs), {"a", "b", "c"});
        const auto path = (dir / "r.csv").string();
        {
            std::ofstream out(path);
            out << "id,y\nc,3.5\na,1.5\nb,-2.5\n";
        }
        auto y = read_responses(path, sample);
        CHECK(y == std::vector<double>{1.5, -2.5, 3.5});
    }

    TEST_CASE("schema violations carry context") {
        auto dir = tmp_dir();
        auto write = [&](const char* name, const char* body) {
            std::ofstream out(dir / name);
            out << body;
            return (dir / name).string();
        };
        CHECK_THROWS_AS(read_curves(write("bad1.csv", "id,0.0\nr1,1\n")), data_error);
        CHECK_THROWS_AS(read_curves(write("bad2.csv", "x,0.0,1.0\nr1,1,2\n")), data_error);
        CHECK_THROWS_AS(read_curves(write("bad3.csv", "id,0.0,1.0\nr1,1\n")), data_error);
        CHECK_THROWS_AS(read_curves(write("bad4.csv", "id,0.0,1.0\nr1,1,oops\n")), data_error);
        CHECK_THROWS_AS(read_curves(write("bad5.csv", "id,0.0,1.0\n")), data_error);
        CHECK_THROWS_AS(read_curves(write("bad6.csv", "")), data_error);

        auto g = uniform_grid01(2);
        std::vector<Curve> cs;
        cs.push_back(make_curve(g, {0.0, 0.0}));
        cs.push_back(make_curve(g, {1.0, 1.0}));
        auto sample = make_sample(g, std::move(cs), {"a", "b"});
        CHECK_THROWS_AS(read_responses(write("r1.csv", "id,y\na,1\n"), sample), data_error);
        CHECK_THROWS_AS(read_responses(write("r2.csv", "id,y\na,1\na,2\nb,3\n"), sample),
                        data_error);
        CHECK_THROWS_AS(read_responses(write("r3.csv", "id,y\na,1\nb,2\nzz,3\n"), sample),
                        data_error);
        CHECK_THROWS_AS(read_responses(write("r4.csv", "id,value\na,1\nb,2\n"), sample),
                        data_error);
    }

    TEST_CASE("format_full round-trips doubles") {
        std::mt19937_64 eng(17);
        for (int i = 0; i < 200; ++i) {
            double x = static_cast<double>(eng()) / 1e4 - 9e14;
            CHECK(std::strtod(format_full(x).c_str(), nullptr) == x);
        }
        CHECK(std::strtod(format_full(0.1).c_str(), nullptr) == 0.1);
    }
}
