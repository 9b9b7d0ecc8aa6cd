#ifndef MAXCONV_NUMERICS_HPP
#define MAXCONV_NUMERICS_HPP

#include <cmath>
#include <functional>
#include <vector>

namespace maxconv::numerics {

struct Interval {
    double lo;
    double hi;
};

// Gauss-Legendre rule on [-1,1]; nodes strictly increasing, symmetric about 0,
// weights positive and summing to 2.
struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes by Newton iteration on P_n; any order in [1,256].
QuadratureRule gauss_legendre(int order);

// Nodes/weights of `rule` mapped onto [a,b].
void map_rule(const QuadratureRule& rule, double a, double b,
              std::vector<double>& x, std::vector<double>& w);

// Tensor-product quadrature of f over box. Throws numeric_error on a
// non-finite integrand value, reporting the offending node.
double integrate_2d(const std::function<double(double, double)>& f,
                    const Interval& bx, const Interval& by,
                    const QuadratureRule& rule);

// Inverse of a nondecreasing F by bisection: returns z with |F(z)-target|<=tol.
// Throws bracketing_error if [bracket.lo, bracket.hi] does not straddle target.
double bisect_inverse(const std::function<double(double)>& F, double target,
                      Interval bracket, double tol);

// ---- univariate distributions ----

inline double norm_pdf(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
}
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865476); }

// Wichura's PPND16; |error| ~ 1e-15 on (0,1).
double norm_quantile(double p);

// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double inc_beta(double a, double b, double x);

double student_t_pdf(double t, double nu);
double student_t_cdf(double t, double nu);
double student_t_quantile(double p, double nu);

// ---- bivariate distributions ----

// P(X1<=z1, X2<=z2), standard bivariate normal; 1-D quadrature of the
// conditional decomposition, tails truncated at |t|=8.
double bvn_cdf(double z1, double z2, double rho);

// Bivariate Student-t CDF by conditional quadrature in probability space,
// lower tail truncated at the 1e-9 quantile.
double bvt_cdf(double z1, double z2, double rho, double nu);

// density helpers used by the mixture copulas
double bvn_pdf(double z1, double z2, double rho);
double bvt_pdf(double z1, double z2, double rho, double nu);

// conditional scale for the bivariate t: T2 | T1=t is rho*t + s(t)*T_{nu+1}
inline double bvt_cond_scale(double t, double rho, double nu) {
    return std::sqrt((nu + t * t) * (1.0 - rho * rho) / (nu + 1.0));
}

}  // namespace maxconv::numerics

#endif
