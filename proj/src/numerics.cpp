#include "maxconv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "maxconv/errors.hpp"

namespace maxconv::numerics {

QuadratureRule gauss_legendre(int order) {
    if (order < 1 || order > 256)
        throw std::invalid_argument("gauss_legendre: order must be in [1,256]");
    QuadratureRule r;
    r.order = order;
    r.nodes.assign(order, 0.0);
    r.weights.assign(order, 0.0);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double p1 = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            p1 = 1.0;
            double p2 = 0.0;
            for (int k = 0; k < order; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k + 1.0) * x * p2 - k * p3) / (k + 1.0);
            }
            dp = order * (x * p1 - p2) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // recompute derivative at the converged node
        {
            p1 = 1.0;
            double p2 = 0.0;
            for (int k = 0; k < order; ++k) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * k + 1.0) * x * p2 - k * p3) / (k + 1.0);
            }
            dp = order * (x * p1 - p2) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[order - 1 - i] = x;
        r.weights[i] = w;
        r.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) r.nodes[order / 2] = 0.0;
    return r;
}

void map_rule(const QuadratureRule& rule, double a, double b,
              std::vector<double>& x, std::vector<double>& w) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    x.resize(rule.order);
    w.resize(rule.order);
    for (int i = 0; i < rule.order; ++i) {
        x[i] = mid + half * rule.nodes[i];
        w[i] = half * rule.weights[i];
    }
}

double integrate_2d(const std::function<double(double, double)>& f,
                    const Interval& bx, const Interval& by,
                    const QuadratureRule& rule) {
    std::vector<double> xs, wx, ys, wy;
    map_rule(rule, bx.lo, bx.hi, xs, wx);
    map_rule(rule, by.lo, by.hi, ys, wy);
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        double row = 0.0;
        for (int j = 0; j < rule.order; ++j) {
            const double v = f(xs[i], ys[j]);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "integrate_2d: non-finite integrand at (" << xs[i] << ", "
                   << ys[j] << ")";
                throw numeric_error(os.str());
            }
            row += wy[j] * v;
        }
        acc += wx[i] * row;
    }
    return acc;
}

double bisect_inverse(const std::function<double(double)>& F, double target,
                      Interval bracket, double tol) {
    double lo = bracket.lo, hi = bracket.hi;
    double flo = F(lo), fhi = F(hi);
    if (!(flo <= target && target <= fhi)) {
        std::ostringstream os;
        os << "bisect_inverse: bracket [" << lo << ", " << hi
           << "] does not straddle target " << target;
        throw bracketing_error(os.str());
    }
    double mid = 0.5 * (lo + hi), fmid = F(mid);
    for (int it = 0; it < 200 && std::abs(fmid - target) > tol; ++it) {
        if (fmid < target)
            lo = mid;
        else
            hi = mid;
        mid = 0.5 * (lo + hi);
        fmid = F(mid);
    }
    return mid;
}

double norm_quantile(double p) {
    // Wichura (1988), algorithm AS 241, PPND16
    if (p <= 0.0) return -INFINITY;
    if (p >= 1.0) return INFINITY;
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

namespace {

// continued fraction for the incomplete beta (Lentz)
double betacf(double a, double b, double x) {
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace

double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
    // x^a (1-x)^b / B(a,b) is symmetric under (a,b,x) -> (b,a,1-x)
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_pdf(double t, double nu) {
    const double lc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                      0.5 * std::log(nu * M_PI);
    return std::exp(lc - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double student_t_cdf(double t, double nu) {
    if (nu <= 0.0) throw std::invalid_argument("student_t_cdf: nu must be > 0");
    if (t == 0.0) return 0.5;
    const double x = nu / (nu + t * t);
    const double half_tail = 0.5 * inc_beta(0.5 * nu, 0.5, x);
    return t > 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_quantile(double p, double nu) {
    if (p <= 0.0) return -INFINITY;
    if (p >= 1.0) return INFINITY;
    if (p == 0.5) return 0.0;
    // Newton from a normal-quantile-based start, bisection fallback
    double t = norm_quantile(p);
    if (nu < 30.0) {
        // Hill-type inflation of the start for heavy tails
        const double g = (t * t * t + t) / (4.0 * nu);
        t += g;
    }
    for (int it = 0; it < 60; ++it) {
        const double f = student_t_cdf(t, nu) - p;
        const double d = student_t_pdf(t, nu);
        if (d <= 0.0) break;
        const double step = f / d;
        t -= step;
        if (std::abs(step) < 1e-12 * (1.0 + std::abs(t))) return t;
    }
    // fall back to bisection on an expanding bracket
    double lo = -1.0, hi = 1.0;
    while (student_t_cdf(lo, nu) > p) lo *= 2.0;
    while (student_t_cdf(hi, nu) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, nu) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {
const QuadratureRule& bv_rule() {
    static const QuadratureRule r = gauss_legendre(64);
    return r;
}
}  // namespace

double bvn_cdf(double z1, double z2, double rho) {
    if (std::abs(rho) > 1.0 - 1e-12)
        throw std::invalid_argument("bvn_cdf: |rho| must be <= 1 - 1e-12");
    if (z1 > z2) std::swap(z1, z2);  // canonical order: symmetry holds exactly
    const double hi = std::min(z1, 8.0);
    if (hi <= -8.0) return 0.0;
    if (z2 <= -8.0) return 0.0;
    if (z2 >= 8.0) return norm_cdf(z1);
    const double s = std::sqrt(1.0 - rho * rho);
    const QuadratureRule& r = bv_rule();
    const double mid = 0.5 * (-8.0 + hi), half = 0.5 * (hi + 8.0);
    double acc = 0.0;
    for (int i = 0; i < r.order; ++i) {
        const double t = mid + half * r.nodes[i];
        acc += half * r.weights[i] * norm_pdf(t) * norm_cdf((z2 - rho * t) / s);
    }
    return acc;
}

double bvt_cdf(double z1, double z2, double rho, double nu) {
    if (std::abs(rho) > 1.0 - 1e-12)
        throw std::invalid_argument("bvt_cdf: |rho| must be <= 1 - 1e-12");
    if (nu <= 0.0) throw std::invalid_argument("bvt_cdf: nu must be > 0");
    if (z1 > z2) std::swap(z1, z2);  // canonical order: symmetry holds exactly
    const double p1 = student_t_cdf(z1, nu);
    const double plo = 1e-9;
    if (p1 <= plo) return 0.0;
    // The conditional probability has boundary layers of width ~t^{-nu} near
    // v = 0 and v = 1 (the conditional scale grows like |t|), so the
    // probability-space integral is paneled geometrically at both ends.
    std::vector<double> edges{plo};
    for (double e : {1e-7, 1e-5, 1e-3, 1e-2})
        if (e < p1) edges.push_back(e);
    for (double e : {1e-2, 1e-3, 1e-5, 1e-7})
        if (p1 - e > edges.back()) edges.push_back(p1 - e);
    edges.push_back(p1);
    const QuadratureRule& r = bv_rule();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double mid = 0.5 * (edges[k] + edges[k + 1]);
        const double half = 0.5 * (edges[k + 1] - edges[k]);
        if (half <= 0.0) continue;
        for (int i = 0; i < r.order; ++i) {
            const double v = mid + half * r.nodes[i];
            const double t = student_t_quantile(v, nu);
            const double s = bvt_cond_scale(t, rho, nu);
            acc += half * r.weights[i] * student_t_cdf((z2 - rho * t) / s, nu + 1.0);
        }
    }
    return acc;
}

double bvn_pdf(double z1, double z2, double rho) {
    const double s2 = 1.0 - rho * rho;
    const double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / s2;
    return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(s2));
}

double bvt_pdf(double z1, double z2, double rho, double nu) {
    const double s2 = 1.0 - rho * rho;
    const double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / s2;
    const double lc = std::lgamma(0.5 * nu + 1.0) - std::lgamma(0.5 * nu) -
                      std::log(nu * M_PI * std::sqrt(s2));
    return std::exp(lc - (0.5 * nu + 1.0) * std::log1p(q / nu));
}

}  // namespace maxconv::numerics
