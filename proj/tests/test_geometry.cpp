#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maxconv/geometry.hpp"
#include "maxconv/rng.hpp"

using namespace maxconv;
using geom::DiskPair;
using geom::delta;
using geom::lens_area;

namespace {

// Monte Carlo rejection estimate of the lens area over the bounding box of
// the first disk (independent oracle for lens_area).
double lens_mc(double r1, double r2, double h, std::size_t n, Rng& rng, double* se = nullptr) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(-r1, r1);
        const double y = rng.uniform(-r1, r1);
        if (x * x + y * y <= r1 * r1) {
            const double dx = x - h;
            if (dx * dx + y * y <= r2 * r2) ++hits;
        }
    }
    const double box = 4.0 * r1 * r1;
    const double ph = static_cast<double>(hits) / n;
    if (se) *se = box * std::sqrt(ph * (1.0 - ph) / n);
    return box * ph;
}

}  // namespace

TEST_CASE("lens_area branch values") {
    CHECK(lens_area(1.0, 1.0, 2.0) == 0.0);                       // externally tangent
    CHECK(lens_area(1.0, 1.0, 3.0) == 0.0);                       // disjoint
    CHECK(lens_area(0.3, 0.1, 0.1) ==
          doctest::Approx(M_PI * 0.01).epsilon(1e-14));           // containment
    // equal radii closed form 2 r^2 acos(h/2r) - (h/2) sqrt(4r^2 - h^2)
    const double want = 2.0 * std::acos(0.5) - 0.5 * std::sqrt(3.0);
    CHECK(lens_area(1.0, 1.0, 1.0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(lens_area(1.0, 1.0, 1.0) == doctest::Approx(1.2283697).epsilon(1e-6));
}

TEST_CASE("lens_area symmetry, bounds, monotonicity, continuity") {
    Rng rng(2024);
    for (int k = 0; k < 200; ++k) {
        const double r1 = rng.uniform(0.05, 1.5);
        const double r2 = rng.uniform(0.05, 1.5);
        const double h = rng.uniform(0.0, 3.0);
        const double a = lens_area(r1, r2, h);
        CHECK(a == lens_area(r2, r1, h));
        CHECK(a >= 0.0);
        CHECK(a <= M_PI * std::min(r1, r2) * std::min(r1, r2) + 1e-14);
    }
    // nonincreasing in h
    for (double r1 : {0.3, 0.7}) {
        for (double r2 : {0.4, 1.1}) {
            double prev = lens_area(r1, r2, 0.0);
            for (double h = 0.01; h < 2.0; h += 0.01) {
                const double a = lens_area(r1, r2, h);
                CHECK(a <= prev + 1e-12);
                prev = a;
            }
        }
    }
    // continuity across branch boundaries
    for (double r1 : {0.25, 0.6}) {
        for (double r2 : {0.4, 0.9}) {
            const double hb1 = std::abs(r1 - r2);  // containment boundary
            const double hb2 = r1 + r2;            // disjoint boundary
            if (hb1 > 1e-6) {
                CHECK(std::abs(lens_area(r1, r2, hb1 - 1e-10) -
                               lens_area(r1, r2, hb1 + 1e-10)) < 1e-9);
            }
            CHECK(std::abs(lens_area(r1, r2, hb2 - 1e-10) -
                           lens_area(r1, r2, hb2 + 1e-10)) < 1e-9);
        }
    }
}

TEST_CASE("lens_area against Monte Carlo rejection oracle") {
    Rng rng(77);
    int bad = 0;
    for (int k = 0; k < 60; ++k) {
        const double r1 = rng.uniform(0.1, 1.2);
        const double r2 = rng.uniform(0.1, 1.2);
        const double h = rng.uniform(0.0, r1 + r2 + 0.3);
        double se = 0.0;
        const double est = lens_mc(r1, r2, h, 200000, rng, &se);
        const double err = std::abs(est - lens_area(r1, r2, h));
        if (err > 3.0 * se + 1e-9) ++bad;
    }
    CHECK(bad <= 2);  // ~99.7% coverage per draw
}

TEST_CASE("delta") {
    CHECK(delta({0.5, 0.5, 0.0}, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(delta({0.5, 0.5, 0.0}, 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(delta({1.0, 1.0, 3.0}, 1) == 0.0);
    // analytic value; the lens MC oracle confirms to its noise level
    CHECK(delta({0.3, 0.3, 0.3}, 1) == doctest::Approx(0.3910022).epsilon(1e-6));
    Rng rng(5);
    double se = 0.0;
    const double mc = lens_mc(0.3, 0.3, 0.3, 2000000, rng, &se) / (M_PI * 0.09);
    CHECK(std::abs(delta({0.3, 0.3, 0.3}, 1) - mc) < 3.0 * se / (M_PI * 0.09));
    CHECK_THROWS_AS(delta({-0.1, 0.3, 0.3}, 1), std::invalid_argument);
    CHECK_THROWS_AS(delta({0.1, 0.3, 0.3}, 3), std::invalid_argument);
}
