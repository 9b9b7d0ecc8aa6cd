#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "maxconv/errors.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/randomfields.hpp"

using namespace maxconv;
using namespace maxconv::rf;

namespace {

double ks_uniform(std::vector<double> x, double lo, double hi) {
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = (x[i] - lo) / (hi - lo);
        ks = std::max(ks, std::max(std::abs((i + 1) / n - f), std::abs(i / n - f)));
    }
    return ks;
}

}  // namespace

TEST_CASE("sample_gp basics") {
    SiteSet one{{{0.0, 0.0}}};
    CovarianceSpec cov{CovFamily::exponential, 0.25, 1.0};
    GpSampler gp(one, cov);
    Rng rng(11);
    double mean = 0.0, var = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double v = gp.draw(rng)[0];
        mean += v;
        var += v * v;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("coincident sites draw identical values") {
    SiteSet s{{{0.3, 0.3}, {0.3, 0.3}, {0.7, 0.1}}};
    CovarianceSpec cov{CovFamily::exponential, 1.0, 1.0};
    GpSampler gp(s, cov);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto z = gp.draw(rng);
        CHECK(z[0] == z[1]);
    }
}

TEST_CASE("empirical correlation matches rho(h)") {
    SiteSet s{{{0.0, 0.0}, {0.25, 0.0}}};
    CovarianceSpec cov{CovFamily::exponential, 0.25, 1.0};
    GpSampler gp(s, cov);
    Rng rng(7);
    const int n = 100000;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = gp.draw(rng);
        sxy += z[0] * z[1];
        sxx += z[0] * z[0];
        syy += z[1] * z[1];
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    CHECK(std::abs(corr - std::exp(-1.0)) < 0.01);
}

TEST_CASE("stationarity: correlation depends only on distance") {
    CovarianceSpec cov{CovFamily::powered_exponential, 0.5, 1.5};
    SiteSet s{{{0.0, 0.0}, {0.2, 0.0}, {0.55, 0.4}, {0.75, 0.4}}};  // two pairs at h=0.2
    GpSampler gp(s, cov);
    Rng rng(13);
    const int n = 60000;
    double c1 = 0.0, c2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = gp.draw(rng);
        c1 += z[0] * z[1];
        c2 += z[2] * z[3];
    }
    // 3 standard errors of a correlation estimate at this n
    CHECK(std::abs(c1 / n - c2 / n) < 3.0 * 2.0 / std::sqrt(n));
}

TEST_CASE("sample_radius marginals and degenerate case") {
    SiteSet one{{{0.0, 0.0}}};
    RadiusSpec spec{0.0, 0.4, {CovFamily::exponential, 1.0, 1.0}};
    Rng rng(97);
    GpSampler gp(one, spec.cov);
    std::vector<double> draws;
    for (int i = 0; i < 100000; ++i)
        draws.push_back(radius_from_gauss(spec, gp.draw(rng))[0]);
    CHECK(ks_uniform(draws, 0.0, 0.4) < 0.006);

    RadiusSpec degen{0.3, 0.3, {CovFamily::exponential, 1.0, 1.0}};
    const auto r = sample_radius(one, degen, 4);
    CHECK(r[0] == 0.3);
}

TEST_CASE("radius_pair_density") {
    RadiusSpec spec{0.1, 0.4, {CovFamily::exponential, 1.0, 1.0}};
    // independence at infinite distance: flat density 1/(rU-rL)^2
    const double flat = 1.0 / (0.3 * 0.3);
    CHECK(radius_pair_density(0.2, 0.3, 1e9, spec) ==
          doctest::Approx(flat).epsilon(1e-9));
    // symmetry
    CHECK(radius_pair_density(0.15, 0.33, 0.2, spec) ==
          doctest::Approx(radius_pair_density(0.33, 0.15, 0.2, spec)).epsilon(1e-12));
    // normalization by tensor quadrature
    const auto rule = numerics::gauss_legendre(64);
    const double total = numerics::integrate_2d(
        [&](double a, double b) { return radius_pair_density(a, b, 0.2, spec); },
        {0.1 + 1e-12, 0.4 - 1e-12}, {0.1 + 1e-12, 0.4 - 1e-12}, rule);
    CHECK(std::abs(total - 1.0) < 1e-4);
    // zero outside the square
    CHECK(radius_pair_density(0.05, 0.2, 0.2, spec) == 0.0);
    RadiusSpec degen{0.3, 0.3, {CovFamily::exponential, 1.0, 1.0}};
    CHECK_THROWS_AS(radius_pair_density(0.3, 0.3, 0.1, degen), degenerate_error);
}

TEST_CASE("companion marginals") {
    SiteSet one{{{0.0, 0.0}}};
    // gaussian family: N(0,1) margins
    CompanionSpec g{CompanionFamily::gaussian, {CovFamily::exponential, 0.5, 1.0}};
    GpSampler gp(one, g.cov);
    Rng rng(3);
    std::vector<double> u;
    for (int i = 0; i < 100000; ++i) {
        auto z = gp.draw(rng);
        auto y = companion_from_gauss(g, z, rng);
        u.push_back(numerics::norm_cdf(y[0]));
    }
    CHECK(ks_uniform(u, 0.0, 1.0) < 0.006);

    // t family: Frechet(beta) margins, P(Y <= 1) = exp(-1)
    CompanionSpec t{CompanionFamily::student_t_frechet,
                    {CovFamily::exponential, 0.5, 1.0}, 4.0, 1.2};
    Rng rng2(30);
    int below = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        auto z = gp.draw(rng2);
        auto y = companion_from_gauss(t, z, rng2);
        if (y[0] <= 1.0) ++below;
    }
    CHECK(std::abs(static_cast<double>(below) / n - std::exp(-1.0)) < 0.005);
}

TEST_CASE("large-nu student companion approaches the gaussian copula") {
    SiteSet s{{{0.0, 0.0}, {0.2, 0.0}}};
    CompanionSpec t{CompanionFamily::student_t_frechet,
                    {CovFamily::exponential, 0.5, 1.0}, 1e6, 1.2};
    CompanionSpec g{CompanionFamily::gaussian, t.cov};
    GpSampler gp(s, t.cov);
    Rng rng(71);
    const int n = 100000;
    // Spearman of the two coordinates under each family
    auto spearman = [&](const CompanionSpec& spec, Rng& r) {
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            auto z = gp.draw(r);
            auto y = companion_from_gauss(spec, z, r);
            a[i] = y[0];
            b[i] = y[1];
        }
        // ranks via sort
        auto rank = [](std::vector<double> v) {
            std::vector<std::size_t> idx(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(),
                      [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) out[idx[i]] = i + 1.0;
            return out;
        };
        auto ra = rank(a), rb = rank(b);
        double sxy = 0, sxx = 0, syy = 0;
        const double m = 0.5 * (n + 1);
        for (int i = 0; i < n; ++i) {
            sxy += (ra[i] - m) * (rb[i] - m);
            sxx += (ra[i] - m) * (ra[i] - m);
            syy += (rb[i] - m) * (rb[i] - m);
        }
        return sxy / std::sqrt(sxx * syy);
    };
    Rng r1(100), r2(100);
    CHECK(std::abs(spearman(t, r1) - spearman(g, r2)) < 0.01);
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(validate(CovarianceSpec{CovFamily::exponential, -1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(CovarianceSpec{CovFamily::powered_exponential, 1.0, 2.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(validate(RadiusSpec{0.5, 0.4, {}}), std::invalid_argument);
    CHECK_THROWS_AS(
        validate(CompanionSpec{CompanionFamily::student_t_frechet, {}, -1.0, 1.0}),
        std::invalid_argument);
}
