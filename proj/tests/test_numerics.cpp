#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maxconv/errors.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/rng.hpp"

using namespace maxconv;
using namespace maxconv::numerics;

TEST_CASE("gauss_legendre basic rules") {
    const auto r1 = gauss_legendre(1);
    CHECK(r1.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

    const auto r2 = gauss_legendre(2);
    CHECK(r2.nodes[0] == doctest::Approx(-0.5773502691896257).epsilon(1e-12));
    CHECK(r2.nodes[1] == doctest::Approx(+0.5773502691896257).epsilon(1e-12));
    CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_legendre(257), std::invalid_argument);
}

TEST_CASE("gauss_legendre invariants across orders") {
    for (int order : {3, 10, 35, 64, 128, 256}) {
        const auto r = gauss_legendre(order);
        double sw = 0.0;
        for (double w : r.weights) {
            CHECK(w > 0.0);
            sw += w;
        }
        CHECK(std::abs(sw - 2.0) < 1e-12);
        for (int i = 1; i < order; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
        for (int i = 0; i < order; ++i)
            CHECK(r.nodes[i] == doctest::Approx(-r.nodes[order - 1 - i]).epsilon(1e-13));
    }
}

TEST_CASE("order-35 rule integrates x^69 exactly on [0,1]") {
    const auto r = gauss_legendre(35);
    std::vector<double> x, w;
    map_rule(r, 0.0, 1.0, x, w);
    double acc = 0.0;
    for (int i = 0; i < r.order; ++i) acc += w[i] * std::pow(x[i], 69);
    CHECK(std::abs(acc - 1.0 / 70.0) < 1e-12);
}

TEST_CASE("integrate_2d") {
    const auto r = gauss_legendre(8);
    CHECK(integrate_2d([](double, double) { return 1.0; }, {0, 1}, {0, 1}, r) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(integrate_2d([](double x, double y) { return x * y; }, {0, 1},
                                {0, 1}, r) - 0.25) < 1e-12);
    const auto r64 = gauss_legendre(64);
    const double gauss2d = integrate_2d(
        [](double x, double y) { return bvn_pdf(x, y, 0.0); }, {-8, 8}, {-8, 8}, r64);
    CHECK(std::abs(gauss2d - 1.0) < 1e-6);
    CHECK_THROWS_AS(integrate_2d([](double x, double) { return std::log(x); },
                                 {-1, 1}, {0, 1}, gauss_legendre(4)),
                    numeric_error);

    // doubling the order changes a smooth integral by < 1e-10
    auto f = [](double x, double y) { return std::exp(-x * x - 0.5 * y * y + x * y * 0.3); };
    const double a35 = integrate_2d(f, {-3, 3}, {-3, 3}, gauss_legendre(35));
    const double a70 = integrate_2d(f, {-3, 3}, {-3, 3}, gauss_legendre(70));
    CHECK(std::abs(a35 - a70) < 1e-10);
}

TEST_CASE("bisect_inverse") {
    CHECK(bisect_inverse([](double z) { return z; }, 0.3, {0, 1}, 1e-12) ==
          doctest::Approx(0.3).epsilon(1e-10));
    // standard Frechet median: F(z) = exp(-1/z), F^{-1}(0.5) = 1/ln 2
    const double z = bisect_inverse([](double t) { return std::exp(-1.0 / t); }, 0.5,
                                    {1e-6, 100}, 1e-13);
    CHECK(z == doctest::Approx(1.4426950408889634).epsilon(1e-9));
    // mixture marginal forward evaluation: q=0.2, gaussian Y
    auto F = [](double t) { return std::exp(-0.2 / t) * norm_cdf(t / 0.8); };
    CHECK(F(1.0) == doctest::Approx(0.7322335).epsilon(1e-5));
    const double z2 = bisect_inverse(F, F(1.0), {1e-6, 50}, 1e-13);
    CHECK(z2 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(bisect_inverse([](double t) { return t; }, 2.0, {0, 1}, 1e-12),
                    bracketing_error);

    // round trip on 100 random targets
    Rng rng(99);
    for (int i = 0; i < 100; ++i) {
        const double u = rng.uniform();
        const double zz = bisect_inverse(F, u, {1e-9, 1e4}, 1e-12);
        CHECK(std::abs(F(zz) - u) <= 1e-12);
    }
}

TEST_CASE("normal distribution helpers") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    for (double p : {1e-10, 1e-4, 0.3, 0.5, 0.77, 1 - 1e-6}) {
        CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("student t distribution") {
    // nu=1 is Cauchy: F(1) = 3/4
    CHECK(student_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(student_t_cdf(0.0, 7.3) == doctest::Approx(0.5).epsilon(1e-14));
    // reference value: F_{t,4}(2) = 1/2 + (3/8)*(2/sqrt(6))*(1 - (1/3)*(2/3)... use known 0.941941
    CHECK(student_t_cdf(2.0, 4.0) == doctest::Approx(0.9419417).epsilon(1e-6));
    for (double p : {0.001, 0.2, 0.5, 0.9, 0.9999}) {
        for (double nu : {1.0, 3.0, 4.0, 25.0}) {
            const double t = student_t_quantile(p, nu);
            CHECK(student_t_cdf(t, nu) == doctest::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("bvn_cdf") {
    CHECK(bvn_cdf(0, 0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    // Sheppard's median formula
    CHECK(bvn_cdf(0, 0, 0.5) ==
          doctest::Approx(0.25 + std::asin(0.5) / (2 * M_PI)).epsilon(1e-10));
    CHECK(std::abs(bvn_cdf(8, 8, 0.3) - 1.0) < 1e-7);
    CHECK(bvn_cdf(1.2, -0.4, 0.3) == doctest::Approx(0.3246542294).epsilon(1e-8));
    CHECK(bvn_cdf(-1.0, 2.0, -0.7) == doctest::Approx(0.1402198542).epsilon(1e-8));
    CHECK_THROWS_AS(bvn_cdf(0, 0, 1.0), std::invalid_argument);
    // symmetry and monotonicity
    for (double r : {-0.8, 0.0, 0.6}) {
        CHECK(bvn_cdf(0.7, -0.3, r) == doctest::Approx(bvn_cdf(-0.3, 0.7, r)).epsilon(1e-14));
        double prev = 0.0;
        for (double z = -3.0; z <= 3.0; z += 0.5) {
            const double v = bvn_cdf(z, 0.4, r);
            CHECK(v >= prev - 1e-14);
            prev = v;
        }
    }
}

TEST_CASE("bvt_cdf") {
    CHECK(bvt_cdf(0, 0, 0, 4) == doctest::Approx(0.25).epsilon(1e-9));
    // the median-orthant value is nu-free
    CHECK(bvt_cdf(0, 0, 0.5, 4) ==
          doctest::Approx(0.25 + std::asin(0.5) / (2 * M_PI)).epsilon(1e-7));
    // upper saturation: at nu=3 the marginal tails decay like t^-3, so the
    // deficit at t=30 is ~7e-5; saturation to 1e-6 needs a much larger point
    CHECK(std::abs(bvt_cdf(1000, 1000, -0.2, 3) - 1.0) < 1e-6);
    // inclusion-exclusion cross-check at (30,30): the joint upper tail at
    // rho=-0.2 is negligible next to the marginal deficits
    const double marg_deficit = 1.0 - student_t_cdf(30.0, 3.0);
    CHECK(bvt_cdf(30, 30, -0.2, 3) ==
          doctest::Approx(1.0 - 2.0 * marg_deficit).epsilon(3e-6));
    CHECK(bvt_cdf(1.0, -0.5, 0.3, 3) == doctest::Approx(0.2825801).epsilon(1e-5));
    CHECK(bvt_cdf(0.7, -0.3, 0.4, 5) ==
          doctest::Approx(bvt_cdf(-0.3, 0.7, 0.4, 5)).epsilon(1e-12));
}
