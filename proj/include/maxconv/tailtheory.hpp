#ifndef MAXCONV_TAILTHEORY_HPP
#define MAXCONV_TAILTHEORY_HPP

#include <vector>

#include "maxconv/numerics.hpp"
#include "maxconv/randomfields.hpp"

namespace maxconv::tail {

// Dependence summaries of the disk model at one distance.
struct TailSummary {
    double h;
    double lambda_U;  // upper tail-dependence coefficient
    double spearman;  // Spearman's rho of the pair copula
    double kappa_L;   // lower tail order, 2 - delta1(rU,rU;h)
};

// lambda_U(h) = E[min(delta1, delta2)] under the radius-pair law.
double lambda_U(double h, const rf::RadiusSpec& spec,
                const numerics::QuadratureRule& rule);

// S_rho(h) = E[3 / (2/delta1 + 2/delta2 - 1)], integrand 0 where A12 = 0.
double spearman(double h, const rf::RadiusSpec& spec,
                const numerics::QuadratureRule& rule);

// Stable tail-dependence function: w1 + w2 - E[min(w1 delta1, w2 delta2)].
double stdf_disk(double w1, double w2, double h, const rf::RadiusSpec& spec,
                 const numerics::QuadratureRule& rule);

// Lower tail order 2 - delta1(rU, rU; h).
double kappa_L(double h, const rf::RadiusSpec& spec);

// Upper bound 1 - K0 h (2 rL + h) / rU^2 on lambda_U(h).
double local_bound(double h, const rf::RadiusSpec& spec, double K0);

// K0 = P(|R1 - R2| > h) under the radius-pair law, by quadrature.
double radius_gap_probability(double h, const rf::RadiusSpec& spec,
                              const numerics::QuadratureRule& rule);

TailSummary summarize(double h, const rf::RadiusSpec& spec,
                      const numerics::QuadratureRule& rule);

// ---- max-mixture tail-regime classifier ----

enum class TailClass { dependent, independent };

// Inputs for one (h-implicit) pair: marginal tail index beta of Y
// (infinity allowed for, e.g., Gaussian marginals), mixing weight q, and the
// component tail summaries.
struct RegimeInput {
    TailClass z_tail = TailClass::dependent;
    TailClass y_tail = TailClass::independent;
    double beta = 1.2;   // may be +infinity
    double q = 0.2;
    double lamZ = 0.0;   // lambda_U of C_Z; > 0 iff z_tail == dependent
    double lamY = 0.0;   // lambda_U of C_Y; > 0 iff y_tail == dependent
    double kappaY = 2.0; // upper tail order of C_Y (used when y_tail indep)
};

struct RegimeOutput {
    double lambda_tilde = 0.0;
    double kappa_tilde = 1.0;   // meaningful only when has_kappa
    bool has_kappa = false;     // set when lambda_tilde == 0
};

// The four-case taxonomy of the max-mixture upper tail. beta = infinity is
// treated as the beta > 1 branch.
RegimeOutput classify_mixture_tail(const RegimeInput& in);

// Mixture lower tail order. Mirrors the stated cases: companion with mass at
// or below zero inherits the disk order; Frechet companion with beta > 1
// inherits the companion order; lower-tail-dependent companion with positive
// mass at zero gives order 1. Returns false when undetermined.
bool mixture_lower_tail_order(double FY_at_zero, bool y_lower_dependent,
                              double beta, double kappaLZ, double kappaLY,
                              double& out);

}  // namespace maxconv::tail

#endif
