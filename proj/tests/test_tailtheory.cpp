#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "maxconv/geometry.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/tailtheory.hpp"

using namespace maxconv;
using namespace maxconv::tail;

namespace {
rf::RadiusSpec disk_spec(double rL, double rU, double thetaR) {
    return {rL, rU, {rf::CovFamily::exponential, thetaR, 1.0}};
}
const auto kRule = numerics::gauss_legendre(35);
}  // namespace

TEST_CASE("lambda_U limits and frozen values") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    CHECK(lambda_U(0.0, spec, kRule) == 1.0);
    CHECK(lambda_U(0.85, spec, kRule) == doctest::Approx(0.0).epsilon(1e-12));
    // quadrature values cross-validated against pair Monte Carlo
    CHECK(lambda_U(0.1, spec, kRule) == doctest::Approx(0.623450).epsilon(1e-4));
    CHECK(lambda_U(0.2, spec, kRule) == doctest::Approx(0.385732).epsilon(1e-4));
    CHECK(lambda_U(0.3, spec, kRule) == doctest::Approx(0.220224).epsilon(1e-4));
}

TEST_CASE("spearman limits and frozen values") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    CHECK(spearman(0.0, spec, kRule) == 1.0);
    CHECK(spearman(0.9, spec, kRule) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(spearman(0.2, spec, kRule) == doctest::Approx(0.380116).epsilon(1e-4));
    CHECK(spearman(0.3, spec, kRule) == doctest::Approx(0.209984).epsilon(1e-4));
}

TEST_CASE("stable tail-dependence function") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    // marginal property: w2 -> 0 recovers w1
    CHECK(stdf_disk(0.7, 1e-14, 0.2, spec, kRule) == doctest::Approx(0.7).epsilon(1e-9));
    // Corollary-1 identity at quadrature precision
    for (double h : {0.05, 0.15, 0.25, 0.35}) {
        CHECK(2.0 - stdf_disk(1.0, 1.0, h, spec, kRule) ==
              doctest::Approx(lambda_U(h, spec, kRule)).epsilon(1e-10));
    }
    // positive homogeneity
    for (double h : {0.1, 0.3}) {
        const double a = stdf_disk(2.0 * 0.8, 2.0 * 1.3, h, spec, kRule);
        const double b = 2.0 * stdf_disk(0.8, 1.3, h, spec, kRule);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
}

TEST_CASE("kappa_L") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    CHECK(kappa_L(0.0, spec) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kappa_L(0.85, spec) == doctest::Approx(2.0).epsilon(1e-14));
    double d1, d2;
    geom::deltas(0.4, 0.4, 0.3, d1, d2);
    CHECK(kappa_L(0.3, spec) == doctest::Approx(2.0 - d1).epsilon(1e-13));
    CHECK(kappa_L(0.3, spec) == doctest::Approx(1.4660255).epsilon(1e-6));
}

TEST_CASE("local bound") {
    const auto spec = disk_spec(0.0, 0.4, 1.0);
    CHECK(local_bound(0.0, spec, 0.5) == 1.0);
    CHECK(local_bound(0.1, spec, 0.0) == 1.0);
    // K0 from quadrature; bound never violated on an h grid
    for (int i = 1; i <= 20; ++i) {
        const double h = 0.85 * i / 20.0;
        const double K0 = radius_gap_probability(h, spec, kRule);
        CHECK(K0 >= 0.0);
        CHECK(K0 <= 1.0);
        CHECK(lambda_U(h, spec, kRule) <= local_bound(h, spec, K0) + 1e-12);
    }
}

TEST_CASE("radius gap probability sanity") {
    const auto spec = disk_spec(0.0, 0.4, 1.0);
    // at large h the radii are nearly independent uniforms on (0, 0.4):
    // P(|U1 - U2| > h) = (1 - h/0.4)^2
    const double K0 = radius_gap_probability(0.2, spec, kRule);
    const double indep = (1.0 - 0.2 / 0.4) * (1.0 - 0.2 / 0.4);
    CHECK(K0 < indep);  // positive correlation shrinks the gap probability
    const auto far = radius_gap_probability(0.39, disk_spec(0.0, 0.4, 0.01), kRule);
    CHECK(far == doctest::Approx((1.0 - 0.39 / 0.4) * (1.0 - 0.39 / 0.4)).epsilon(0.01));
}

TEST_CASE("classify_mixture_tail: full case table") {
    const double inf = std::numeric_limits<double>::infinity();
    auto dep = [](double lam) { return lam; };
    // both dependent
    {
        RegimeInput in{TailClass::dependent, TailClass::dependent, 0.8, 0.2, 0.5, 0.3, 2.0};
        CHECK(classify_mixture_tail(in).lambda_tilde == dep(0.3));
        in.beta = 1.0;
        CHECK(classify_mixture_tail(in).lambda_tilde ==
              doctest::Approx(0.2 * 0.5 + 0.8 * 0.3).epsilon(1e-15));
        CHECK(classify_mixture_tail(in).lambda_tilde == doctest::Approx(0.34));
        in.beta = 1.2;
        CHECK(classify_mixture_tail(in).lambda_tilde == 0.5);
    }
    // Z dependent, Y independent
    {
        RegimeInput in{TailClass::dependent, TailClass::independent, 0.8, 0.2, 0.5, 0.0, 1.5};
        auto out = classify_mixture_tail(in);
        CHECK(out.lambda_tilde == 0.0);
        CHECK(out.kappa_tilde == doctest::Approx(std::min(1.0 / 0.8, 1.5)).epsilon(1e-15));
        in.beta = 1.0;
        CHECK(classify_mixture_tail(in).lambda_tilde == doctest::Approx(0.1));
        in.beta = 1.2;
        CHECK(classify_mixture_tail(in).lambda_tilde == 0.5);
        in.beta = inf;  // gaussian-marginal limit behaves as beta > 1
        CHECK(classify_mixture_tail(in).lambda_tilde == 0.5);
    }
    // Z independent, Y dependent
    {
        RegimeInput in{TailClass::independent, TailClass::dependent, 0.8, 0.2, 0.0, 0.3, 2.0};
        CHECK(classify_mixture_tail(in).lambda_tilde == 0.3);
        in.beta = 1.0;
        CHECK(classify_mixture_tail(in).lambda_tilde == doctest::Approx(0.8 * 0.3));
        in.beta = 1.7;
        auto out = classify_mixture_tail(in);
        CHECK(out.lambda_tilde == 0.0);
        CHECK(out.kappa_tilde == doctest::Approx(1.7));
        in.beta = 3.0;
        CHECK(classify_mixture_tail(in).kappa_tilde == 2.0);
    }
    // both independent
    {
        RegimeInput in{TailClass::independent, TailClass::independent, 0.8, 0.2, 0.0, 0.0, 1.6};
        auto out = classify_mixture_tail(in);
        CHECK(out.lambda_tilde == 0.0);
        CHECK(out.kappa_tilde == doctest::Approx(std::min(1.6, 2.0 / 0.8)).epsilon(1e-15));
        in.beta = 1.5;
        in.kappaY = 2.0;
        CHECK(classify_mixture_tail(in).kappa_tilde == doctest::Approx(2.0));  // min(3, 2)
        in.beta = 1.2;
        in.kappaY = 1.3;
        CHECK(classify_mixture_tail(in).kappa_tilde ==
              doctest::Approx(std::min(1.2 * 1.3, 2.0)).epsilon(1e-15));
    }
    // invariant violations
    RegimeInput bad{TailClass::dependent, TailClass::independent, 1.2, 0.2, 0.0, 0.0, 2.0};
    CHECK_THROWS_AS(classify_mixture_tail(bad), std::invalid_argument);
    RegimeInput bad2{TailClass::independent, TailClass::independent, 1.2, 0.2, 0.0, 0.4, 2.0};
    CHECK_THROWS_AS(classify_mixture_tail(bad2), std::invalid_argument);
}

TEST_CASE("mixture lower tail order lookup") {
    double out = 0.0;
    // companion with positive mass at zero inherits the disk order
    CHECK(mixture_lower_tail_order(0.5, false, 1.2, 1.47, 1.3, out));
    CHECK(out == doctest::Approx(1.47));
    // lower-tail-dependent companion with mass at zero: order 1
    CHECK(mixture_lower_tail_order(0.5, true, 1.2, 1.47, 1.3, out));
    CHECK(out == 1.0);
    // Frechet companion with beta > 1 inherits the companion order
    CHECK(mixture_lower_tail_order(0.0, false, 1.2, 1.47, 1.3, out));
    CHECK(out == doctest::Approx(1.3));
    // undetermined otherwise
    CHECK_FALSE(mixture_lower_tail_order(0.0, false, 0.9, 1.47, 1.3, out));
}

TEST_CASE("summary row structure") {
    const auto spec = disk_spec(0.1, 0.4, 1.0);
    const auto s0 = summarize(0.0, spec, kRule);
    CHECK(s0.lambda_U == 1.0);
    CHECK(s0.spearman == 1.0);
    CHECK(s0.kappa_L == doctest::Approx(1.0));
    const auto far = summarize(0.85, spec, kRule);
    CHECK(far.lambda_U == doctest::Approx(0.0));
    CHECK(far.spearman == doctest::Approx(0.0));
    CHECK(far.kappa_L == doctest::Approx(2.0));
}
