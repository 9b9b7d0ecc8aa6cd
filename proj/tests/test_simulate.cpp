#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "maxconv/copula.hpp"
#include "maxconv/errors.hpp"
#include "maxconv/measures.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/simulate.hpp"
#include "maxconv/tailtheory.hpp"

using namespace maxconv;
using namespace maxconv::sim;

namespace {

rf::RadiusSpec disk_spec(double rL, double rU, double thetaR) {
    return {rL, rU, {rf::CovFamily::exponential, thetaR, 1.0}};
}

double ks_against(std::vector<double> x, const std::function<double(double)>& F) {
    std::sort(x.begin(), x.end());
    double ks = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = F(x[i]);
        ks = std::max(ks, std::max(std::abs((i + 1) / n - f), std::abs(i / n - f)));
    }
    return ks;
}

}  // namespace

TEST_CASE("raster margins are standard Frechet") {
    rf::SiteSet one{{{0.0, 0.0}}};
    const DiskModelParams dp{disk_spec(0.1, 0.4, 1.0)};
    const auto grid = make_grid(one, 0.4);
    const RasterSimulator s(one, dp, grid);
    Rng rng(1234);
    std::vector<double> z(100000);
    for (auto& v : z) v = s.replicate(rng)[0];
    const double ks = ks_against(z, [](double t) { return std::exp(-1.0 / t); });
    CHECK(ks < 0.01);
}

TEST_CASE("coincident sites give identical values; distant sites are independent") {
    rf::SiteSet s2{{{0.0, 0.0}, {0.0, 0.0}}};
    const DiskModelParams dp{disk_spec(0.1, 0.4, 1.0)};
    const RasterSimulator sim2(s2, dp, make_grid(s2, 0.4));
    Rng rng(55);
    for (int i = 0; i < 30; ++i) {
        const auto z = sim2.replicate(rng);
        CHECK(z[0] == z[1]);
    }
    // h = 0.9 > 2 rU = 0.8: empirical Spearman ~ 0
    rf::SiteSet far{{{0.0, 0.0}, {0.9, 0.0}}};
    const RasterSimulator simf(far, dp, make_grid(far, 0.4));
    const int n = 20000;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const auto z = simf.replicate(rng);
        a[i] = z[0];
        b[i] = z[1];
    }
    CHECK(std::abs(measures::spearman_of_sample(a, b)) < 0.02);
}

TEST_CASE("grid validation") {
    rf::SiteSet one{{{0.0, 0.0}}};
    const DiskModelParams dp{disk_spec(0.1, 0.4, 1.0)};
    RasterGrid coarse = make_grid(one, 0.4, 5);  // 5 cells per rU
    CHECK_THROWS_AS(RasterSimulator(one, dp, coarse), std::invalid_argument);
    // grid not covering the disks
    RasterGrid g = make_grid(one, 0.4);
    g.nx /= 4;
    CHECK_THROWS_AS(RasterSimulator(one, dp, g), std::invalid_argument);
}

TEST_CASE("exact pair sampler matches quadrature cdf and margins") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    const PairSampler ps(0.2, spec);
    Rng rng(777);
    const int n = 200000;
    std::vector<double> u1(n), u2(n);
    for (int i = 0; i < n; ++i) ps.draw_uniform(rng, u1[i], u2[i]);
    // margins uniform
    const double ks = ks_against(u1, [](double t) { return t; });
    CHECK(ks < 0.01);
    // joint cdf against quadrature at a few points (3 MC standard errors)
    const copula::DiskCopula cop(spec, 0.2);
    for (const auto& [a, b] : {std::pair{0.3, 0.6}, std::pair{0.8, 0.8}, std::pair{0.5, 0.2}}) {
        int cnt = 0;
        for (int i = 0; i < n; ++i)
            if (u1[i] <= a && u2[i] <= b) ++cnt;
        const double emp = static_cast<double>(cnt) / n;
        const double c = cop.cdf(a, b);
        CHECK(std::abs(emp - c) < 3.0 * std::sqrt(c * (1.0 - c) / n));
    }
}

TEST_CASE("raster pair simulation agrees with the exact pair law") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    rf::SiteSet pair{{{0.0, 0.0}, {0.2, 0.0}}};
    const DiskModelParams dp{spec};
    const RasterSimulator sim(pair, dp, make_grid(pair, 0.4));
    Rng rng(31);
    const int n = 100000;
    std::vector<double> u1(n), u2(n);
    for (int i = 0; i < n; ++i) {
        const auto z = sim.replicate(rng);
        u1[i] = std::exp(-1.0 / z[0]);
        u2[i] = std::exp(-1.0 / z[1]);
    }
    const copula::DiskCopula cop(spec, 0.2);
    double sup = 0.0;
    for (double a = 0.1; a <= 0.91; a += 0.1)
        for (double b = 0.1; b <= 0.91; b += 0.1) {
            int cnt = 0;
            for (int i = 0; i < n; ++i)
                if (u1[i] <= a && u2[i] <= b) ++cnt;
            sup = std::max(sup, std::abs(static_cast<double>(cnt) / n - cop.cdf(a, b)));
        }
    CHECK(sup < 0.01);
}

TEST_CASE("mixture simulation: q=1 equals the disk process distribution") {
    copula::MixtureParams mp;
    mp.radius = disk_spec(0.1, 0.4, 1.0);
    mp.q = 1.0;
    mp.companion = {rf::CompanionFamily::gaussian, {rf::CovFamily::exponential, 0.5, 1.0}};
    rf::SiteSet one{{{0.0, 0.0}}};
    const MixtureSimulator sim(one, mp, make_grid(one, 0.4));
    Rng rng(909);
    std::vector<double> z(50000);
    for (auto& v : z) v = sim.replicate(rng)[0];
    CHECK(ks_against(z, [](double t) { return std::exp(-1.0 / t); }) < 0.012);
}

TEST_CASE("mixture margins match the mixture marginal cdf") {
    copula::MixtureParams mp;
    mp.radius = disk_spec(0.1, 0.4, 1.0);
    mp.q = 0.2;
    mp.companion = {rf::CompanionFamily::gaussian, {rf::CovFamily::exponential, 0.5, 1.0}};
    rf::SiteSet one{{{0.0, 0.0}}};
    const MixtureSimulator sim(one, mp, make_grid(one, 0.4));
    const copula::MixtureMarginal marg{0.2, mp.companion};
    Rng rng(2718);
    std::vector<double> z(100000);
    for (auto& v : z) v = sim.replicate(rng)[0];
    CHECK(ks_against(z, [&](double t) { return marg.cdf(t); }) < 0.01);
    // qZ > 0 dominates negative companion draws
    for (double v : z) CHECK(v > 0.0);
}

TEST_CASE("generic Monte Carlo evaluators: degenerate sources") {
    auto comonotone = []() { return std::optional<AreaVectorSample>({0.0, 0.0, 1.0}); };
    auto indep = []() { return std::optional<AreaVectorSample>({1.0, 1.0, 0.0}); };
    auto unit = [](double) { return 1.0; };
    CHECK(generic_bivariate_cdf(2.0, 3.0, unit, comonotone, 10000) ==
          doctest::Approx(std::exp(-std::max(1.0 / 2.0, 1.0 / 3.0))).epsilon(1e-12));
    CHECK(generic_bivariate_cdf(2.0, 3.0, unit, indep, 10000) ==
          doctest::Approx(std::exp(-1.0 / 2.0) * std::exp(-1.0 / 3.0)).epsilon(1e-12));
    CHECK(generic_stdf(0.7, 1.3, unit, indep, 10000) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(generic_stdf(0.7, 1.3, unit, comonotone, 10000) ==
          doctest::Approx(1.3).epsilon(1e-12));
    CHECK_THROWS_AS(generic_bivariate_cdf(2.0, 3.0, unit, comonotone, 100),
                    std::invalid_argument);
    // exhaustion
    int left = 50000;
    auto finite = [&]() -> std::optional<AreaVectorSample> {
        if (left-- <= 0) return std::nullopt;
        return AreaVectorSample{1.0, 1.0, 0.0};
    };
    CHECK_THROWS_AS(generic_bivariate_cdf(1.0, 1.0, unit, finite, 100000), numeric_error);
}

TEST_CASE("disk-induced source: cdf cross-check and stdf identities") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    auto hfn = [](double a) { return 1.0 / a; };
    const std::size_t n = 400000;
    // MC joint cdf vs quadrature copula with Frechet margins
    const copula::DiskCopula cop(spec, 0.2);
    for (const auto& [v1, v2] : {std::pair{0.4, 0.7}, std::pair{0.6, 0.6}}) {
        const double z1 = -1.0 / std::log(v1), z2 = -1.0 / std::log(v2);
        const double mc =
            generic_bivariate_cdf(z1, z2, hfn, disk_area_source(0.2, spec, 99), n);
        const double c = cop.cdf(v1, v2);
        CHECK(std::abs(mc - c) < 3.0 * std::sqrt(c * (1.0 - c) / n));
    }
    // marginal consistency: z2 -> infinity recovers exp(-1/z1)
    const double m = generic_bivariate_cdf(1.0, 1e12, hfn,
                                           disk_area_source(0.2, spec, 7), n);
    CHECK(std::abs(m - std::exp(-1.0)) < 3.0 * 0.5 / std::sqrt(n));
    // 2 - stdf(1,1) agrees with lambda_U within MC noise
    const auto rule = numerics::gauss_legendre(35);
    const double lam = tail::lambda_U(0.2, spec, rule);
    const double ell = generic_stdf(1.0, 1.0, hfn, disk_area_source(0.2, spec, 5), n);
    CHECK(std::abs((2.0 - ell) - lam) < 0.01);
    // homogeneity within noise
    const double l1 = generic_stdf(0.5, 1.0, hfn, disk_area_source(0.2, spec, 6), n);
    const double l2 = generic_stdf(1.0, 2.0, hfn, disk_area_source(0.2, spec, 6), n);
    CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(0.01));
}

TEST_CASE("mixture pair sampler margins") {
    copula::MixtureParams mp;
    mp.radius = disk_spec(0.1, 0.4, 1.0);
    mp.q = 0.2;
    mp.companion = {rf::CompanionFamily::student_t_frechet,
                    {rf::CovFamily::exponential, 0.5, 1.0}, 3.0, 1.2};
    const MixturePairSampler ps(0.2, mp);
    Rng rng(404);
    const int n = 100000;
    std::vector<double> u(n);
    double dummy;
    for (int i = 0; i < n; ++i) ps.draw_uniform(rng, u[i], dummy);
    double ks = 0.0;
    std::sort(u.begin(), u.end());
    for (int i = 0; i < n; ++i)
        ks = std::max(ks, std::abs((i + 1.0) / n - u[i]));
    CHECK(ks < 0.01);
}
