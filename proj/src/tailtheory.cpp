#include "maxconv/tailtheory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "maxconv/errors.hpp"
#include "maxconv/geometry.hpp"

namespace maxconv::tail {

using numerics::norm_cdf;
using numerics::norm_pdf;
using numerics::norm_quantile;

namespace {

constexpr double kZmax = 8.0;

// One quadrature node of the radius-pair law with its overlap fractions.
struct Node {
    double w, r1, r2, d1, d2;
};

// z-space tensor table for E[f(R1,R2)] at distance h, with inner panels at
// the lens kinks and the diagonal (for min/max integrands). Falls back to a
// 1-D table over the common radius when rho(h) ~ 1, and to a single point
// when rL == rU.
struct PairTable {
    std::vector<Node> nodes;
    double mass = 0.0;

    PairTable(double h, const rf::RadiusSpec& spec, const numerics::QuadratureRule& rule) {
        rf::validate(spec);
        const double rho = spec.cov.rho(h);
        if (spec.rL == spec.rU) {
            double d1, d2;
            geom::deltas(spec.rL, spec.rU, h, d1, d2);
            nodes.push_back({1.0, spec.rL, spec.rU, d1, d2});
            mass = 1.0;
            return;
        }
        const double w = spec.rU - spec.rL;
        auto r_of_z = [&](double z) { return spec.rL + w * norm_cdf(z); };
        auto z_of_r = [&](double r) {
            const double v = (r - spec.rL) / w;
            if (v <= norm_cdf(-kZmax)) return -kZmax;
            if (v >= norm_cdf(kZmax)) return kZmax;
            return norm_quantile(v);
        };
        auto panels = [&](double lo, double hi, const std::vector<double>& brk,
                          std::vector<double>& z, std::vector<double>& wts) {
            z.clear();
            wts.clear();
            double a = lo;
            auto emit = [&](double p0, double p1) {
                const double mid = 0.5 * (p0 + p1), half = 0.5 * (p1 - p0);
                for (int i = 0; i < rule.order; ++i) {
                    z.push_back(mid + half * rule.nodes[i]);
                    wts.push_back(half * rule.weights[i]);
                }
            };
            for (double b : brk)
                if (b > a && b < hi) {
                    emit(a, b);
                    a = b;
                }
            if (hi > a) emit(a, hi);
        };
        if (rho >= 1.0 - 1e-12) {
            // comonotone radii: 1-D over the shared radius
            std::vector<double> brk;
            if (0.5 * h > spec.rL && 0.5 * h < spec.rU) brk.push_back(z_of_r(0.5 * h));
            std::vector<double> zs, ws;
            panels(-kZmax, kZmax, brk, zs, ws);
            for (std::size_t i = 0; i < zs.size(); ++i) {
                const double r = r_of_z(zs[i]);
                double d1, d2;
                geom::deltas(r, r, h, d1, d2);
                const double wt = ws[i] * norm_pdf(zs[i]);
                nodes.push_back({wt, r, r, d1, d2});
                mass += wt;
            }
            return;
        }
        const double s2 = 1.0 - rho * rho;
        auto phi2 = [&](double z1, double z2) {
            const double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / s2;
            return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(s2));
        };
        std::vector<double> zo, wo, zi, wi, brk;
        panels(-kZmax, kZmax, {}, zo, wo);
        for (std::size_t j = 0; j < zo.size(); ++j) {
            const double r2 = r_of_z(zo[j]);
            brk.clear();
            for (double rk : {r2 - h, r2 + h, h - r2, r2})
                if (rk > spec.rL && rk < spec.rU) brk.push_back(z_of_r(rk));
            std::sort(brk.begin(), brk.end());
            panels(-kZmax, kZmax, brk, zi, wi);
            for (std::size_t i = 0; i < zi.size(); ++i) {
                const double r1 = r_of_z(zi[i]);
                double d1, d2;
                geom::deltas(r1, r2, h, d1, d2);
                const double wt = wi[i] * wo[j] * phi2(zi[i], zo[j]);
                nodes.push_back({wt, r1, r2, d1, d2});
                mass += wt;
            }
        }
    }

    template <class F>
    double expect(F f) const {
        double acc = 0.0;
        for (const auto& nd : nodes) acc += nd.w * f(nd);
        return acc / mass;
    }
};

}  // namespace

double lambda_U(double h, const rf::RadiusSpec& spec,
                const numerics::QuadratureRule& rule) {
    if (!(h >= 0.0)) throw std::invalid_argument("lambda_U: h must be >= 0");
    if (h == 0.0) return 1.0;
    return PairTable(h, spec, rule).expect(
        [](const Node& n) { return std::min(n.d1, n.d2); });
}

double spearman(double h, const rf::RadiusSpec& spec,
                const numerics::QuadratureRule& rule) {
    if (!(h >= 0.0)) throw std::invalid_argument("spearman: h must be >= 0");
    if (h == 0.0) return 1.0;
    return PairTable(h, spec, rule).expect([](const Node& n) {
        if (n.d1 <= 0.0 || n.d2 <= 0.0) return 0.0;  // A12 = 0: independent pair
        return 3.0 / (2.0 / n.d1 + 2.0 / n.d2 - 1.0);
    });
}

double stdf_disk(double w1, double w2, double h, const rf::RadiusSpec& spec,
                 const numerics::QuadratureRule& rule) {
    if (!(w1 >= 0.0 && w2 >= 0.0))
        throw std::invalid_argument("stdf_disk: weights must be >= 0");
    if (h == 0.0) return std::max(w1, w2);
    const double m = PairTable(h, spec, rule).expect([&](const Node& n) {
        return std::min(w1 * n.d1, w2 * n.d2);
    });
    return w1 + w2 - m;
}

double kappa_L(double h, const rf::RadiusSpec& spec) {
    rf::validate(spec);
    if (!(h >= 0.0)) throw std::invalid_argument("kappa_L: h must be >= 0");
    double d1, d2;
    geom::deltas(spec.rU, spec.rU, h, d1, d2);
    return 2.0 - d1;
}

double local_bound(double h, const rf::RadiusSpec& spec, double K0) {
    rf::validate(spec);
    if (!(K0 >= 0.0 && K0 <= 1.0))
        throw std::invalid_argument("local_bound: K0 must be in [0,1]");
    return std::min(1.0, 1.0 - K0 * h * (2.0 * spec.rL + h) / (spec.rU * spec.rU));
}

double radius_gap_probability(double h, const rf::RadiusSpec& spec,
                              const numerics::QuadratureRule& rule) {
    if (h <= 0.0) return 0.0;  // rho(0) = 1: the two radii coincide
    if (spec.rL == spec.rU) return 0.0;
    if (spec.cov.rho(h) >= 1.0 - 1e-12) return 0.0;  // comonotone radii coincide
    return PairTable(h, spec, rule).expect(
        [&](const Node& n) { return std::abs(n.r1 - n.r2) > h ? 1.0 : 0.0; });
}

TailSummary summarize(double h, const rf::RadiusSpec& spec,
                      const numerics::QuadratureRule& rule) {
    return {h, lambda_U(h, spec, rule), spearman(h, spec, rule), kappa_L(h, spec)};
}

RegimeOutput classify_mixture_tail(const RegimeInput& in) {
    if ((in.z_tail == TailClass::dependent) != (in.lamZ > 0.0))
        throw std::invalid_argument("classify_mixture_tail: lamZ inconsistent with z_tail");
    if ((in.y_tail == TailClass::dependent) != (in.lamY > 0.0))
        throw std::invalid_argument("classify_mixture_tail: lamY inconsistent with y_tail");
    if (!(in.q > 0.0 && in.q <= 1.0))
        throw std::invalid_argument("classify_mixture_tail: q must be in (0,1]");
    if (!(in.beta > 0.0))
        throw std::invalid_argument("classify_mixture_tail: beta must be > 0");
    if (!(in.kappaY >= 1.0 && in.kappaY <= 2.0))
        throw std::invalid_argument("classify_mixture_tail: kappaY must be in [1,2]");
    const bool zdep = in.z_tail == TailClass::dependent;
    const bool ydep = in.y_tail == TailClass::dependent;
    // beta = infinity behaves as the beta > 1 branch
    const bool lighter = in.beta > 1.0 || std::isinf(in.beta);
    RegimeOutput out;
    auto dependent = [&](double lam) {
        out.lambda_tilde = lam;
        out.kappa_tilde = 1.0;
        out.has_kappa = true;
    };
    auto independent = [&](double kap) {
        out.lambda_tilde = 0.0;
        out.kappa_tilde = kap;
        out.has_kappa = true;
    };
    if (zdep && ydep) {
        if (in.beta < 1.0)
            dependent(in.lamY);
        else if (lighter)
            dependent(in.lamZ);
        else
            dependent(in.q * in.lamZ + (1.0 - in.q) * in.lamY);
    } else if (zdep && !ydep) {
        if (in.beta < 1.0)
            independent(std::min(1.0 / in.beta, in.kappaY));
        else if (lighter)
            dependent(in.lamZ);
        else
            dependent(in.q * in.lamZ);
    } else if (!zdep && ydep) {
        if (in.beta < 1.0)
            dependent(in.lamY);
        else if (lighter)
            independent(std::min(in.beta, 2.0));
        else
            dependent((1.0 - in.q) * in.lamY);
    } else {
        if (lighter)
            independent(std::min(in.beta * in.kappaY, 2.0));
        else
            independent(std::min(in.kappaY, 2.0 / in.beta));
    }
    return out;
}

bool mixture_lower_tail_order(double FY_at_zero, bool y_lower_dependent, double beta,
                              double kappaLZ, double kappaLY, double& out) {
    if (y_lower_dependent && FY_at_zero > 0.0) {
        out = 1.0;
        return true;
    }
    if (FY_at_zero > 0.0) {
        out = kappaLZ;
        return true;
    }
    if (FY_at_zero == 0.0 && beta > 1.0) {
        out = kappaLY;
        return true;
    }
    return false;
}

}  // namespace maxconv::tail
