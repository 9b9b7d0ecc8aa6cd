#include "maxconv/copula.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <unordered_map>
#include <sstream>
#include <stdexcept>

#include "maxconv/errors.hpp"
#include "maxconv/geometry.hpp"

namespace maxconv::copula {

using numerics::norm_cdf;
using numerics::norm_pdf;
using numerics::norm_quantile;

namespace {

constexpr double kZmax = 8.0;
constexpr double kUeps = 1e-12;
constexpr double kComonotoneRho = 1.0 - 1e-12;

enum Want { kCdf = 0, kD1 = 1, kD2 = 2, kPdf = 3 };

double clamp_u(double u) { return std::clamp(u, kUeps, 1.0 - kUeps); }

// Geometry of the z-space reparameterization r = rL + (rU-rL)*Phi(z).
struct Geom {
    double rL, rU, w, rho, h;

    double r_of_z(double z) const { return rL + w * norm_cdf(z); }
    double z_of_r(double r) const {
        const double v = (r - rL) / w;
        if (v <= norm_cdf(-kZmax)) return -kZmax;
        if (v >= norm_cdf(kZmax)) return kZmax;
        return norm_quantile(v);
    }
    double phi2(double z1, double z2) const {
        const double s2 = 1.0 - rho * rho;
        const double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / s2;
        return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(s2));
    }
    // z1-locations of the lens-area kink curves for fixed r2
    void lens_breaks(double r2, std::vector<double>& out) const {
        out.clear();
        for (const double r1 : {r2 - h, r2 + h, h - r2})
            if (r1 > rL && r1 < rU) out.push_back(z_of_r(r1));
        std::sort(out.begin(), out.end());
    }
    // r2-locations where a kink curve enters or leaves the square
    void outer_breaks(std::vector<double>& out) const {
        out.clear();
        for (const double r2 : {rL + h, rU - h, h - rL})
            if (r2 > rL && r2 < rU) out.push_back(z_of_r(r2));
        std::sort(out.begin(), out.end());
    }
};

// GL nodes over [lo,hi] split into panels at the given breakpoints.
void panel_nodes(const numerics::QuadratureRule& rule, double lo, double hi,
                 const std::vector<double>& breaks, std::vector<double>& z,
                 std::vector<double>& w) {
    z.clear();
    w.clear();
    double a = lo;
    auto emit = [&](double p0, double p1) {
        const double mid = 0.5 * (p0 + p1), half = 0.5 * (p1 - p0);
        for (int i = 0; i < rule.order; ++i) {
            z.push_back(mid + half * rule.nodes[i]);
            w.push_back(half * rule.weights[i]);
        }
    };
    for (const double b : breaks) {
        if (b > a && b < hi) {
            emit(a, b);
            a = b;
        }
    }
    if (hi > a) emit(a, hi);
}

// region-D / full-square integrands, u1 >= u2
inline double region_integrand(int want, double d1, double d2, double u1, double u2,
                               double lu1, double lu2) {
    switch (want) {
        case kCdf:
            return u1 * std::exp(-(1.0 - d2) * lu2) - u2 * std::exp(-(1.0 - d1) * lu1);
        case kD1:
            return std::exp(-(1.0 - d2) * lu2) - (1.0 - d1) * u2 * std::exp(d1 * lu1);
        case kD2:
            return (1.0 - d2) * u1 * std::exp(d2 * lu2) - std::exp(-(1.0 - d1) * lu1);
        default:
            return (1.0 - d2) * std::exp(d2 * lu2) - (1.0 - d1) * std::exp(d1 * lu1);
    }
}

inline double square_integrand(int want, double d1, double u1, double u2,
                               double lu1, double /*lu2*/) {
    switch (want) {
        case kCdf:
            return u2 * std::exp(-(1.0 - d1) * lu1);
        case kD1:
            return (1.0 - d1) * u2 * std::exp(d1 * lu1);
        case kD2:
            return std::exp(-(1.0 - d1) * lu1);
        default:
            return (1.0 - d1) * std::exp(d1 * lu1);
    }
}

// Boundary line integral of the density along r1 = r2 * ell, z2-parametrized.
double line_term_impl(const Geom& g, const numerics::QuadratureRule& rule,
                      double u1, double u2) {
    const double lu1 = -std::log(u1), lu2 = -std::log(u2);
    const double ell = std::sqrt(lu1 / lu2);
    if (ell <= 0.0) return 0.0;
    const double r2lo = std::max(g.rL, g.rL / ell);
    if (r2lo >= g.rU) return 0.0;
    const double zlo = g.z_of_r(r2lo);
    std::vector<double> brk;
    if (ell < 1.0) {
        const double rk = g.h / (1.0 - ell);
        if (rk > r2lo && rk < g.rU) brk.push_back(g.z_of_r(rk));
    }
    {
        const double rk = g.h / (1.0 + ell);
        if (rk > r2lo && rk < g.rU) brk.push_back(g.z_of_r(rk));
    }
    std::sort(brk.begin(), brk.end());
    std::vector<double> z2s, w2s;
    panel_nodes(rule, zlo, kZmax, brk, z2s, w2s);
    double acc = 0.0;
    for (std::size_t i = 0; i < z2s.size(); ++i) {
        const double r2 = g.r_of_z(z2s[i]);
        const double r1 = r2 * ell;
        const double z1 = g.z_of_r(r1);
        double d1, d2;
        geom::deltas(r1, r2, g.h, d1, d2);
        if (d1 <= 0.0) continue;
        const double gdr = g.phi2(z1, z2s[i]) / (g.w * norm_pdf(z1));
        acc += w2s[i] * d1 * std::exp(-(1.0 - d2) * lu2) * gdr * r2;
    }
    return ell / (2.0 * u2 * lu2) * acc;
}

}  // namespace

double marshall_olkin_cdf(double u1, double u2, double d1, double d2) {
    return std::min(u1 * std::pow(u2, 1.0 - d2), u2 * std::pow(u1, 1.0 - d1));
}

// ---------------------------------------------------------------------------
// DiskCopula
// ---------------------------------------------------------------------------

DiskCopula::DiskCopula(const rf::RadiusSpec& spec, double h, int order)
    : spec_(spec), h_(h), order_(order) {
    rf::validate(spec);
    if (!(h >= 0.0)) throw std::invalid_argument("DiskCopula: h must be >= 0");
    rho_ = spec.cov.rho(h);
    if (spec.rL == spec.rU) {
        degenerate_ = true;
        geom::deltas(spec.rL, spec.rU, h, mo_d1_, mo_d2_);
        return;
    }
    rule_ = numerics::gauss_legendre(order);
    if (rho_ >= kComonotoneRho) {
        // comonotone radii: 1-D mixture over the common radius r ~ U(rL,rU)
        comonotone_ = true;
        const Geom g{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_};
        std::vector<double> brk;
        if (h_ * 0.5 > spec_.rL && h_ * 0.5 < spec_.rU)
            brk.push_back(g.z_of_r(h_ * 0.5));
        std::vector<double> zs, ws;
        panel_nodes(rule_, -kZmax, kZmax, brk, zs, ws);
        cmass_ = 0.0;
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const double r = g.r_of_z(zs[i]);
            const double w = ws[i] * norm_pdf(zs[i]);
            cw_.push_back(w);
            cd_.push_back(geom::lens_area(r, r, h_) / (M_PI * r * r));
            cmass_ += w;
        }
        return;
    }
    const Geom g{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_};
    std::vector<double> zouter, wouter, obrk, brk, z1s, w1s;
    g.outer_breaks(obrk);
    panel_nodes(rule_, -kZmax, kZmax, obrk, zouter, wouter);
    for (std::size_t j = 0; j < zouter.size(); ++j) {
        const double r2 = g.r_of_z(zouter[j]);
        g.lens_breaks(r2, brk);
        panel_nodes(rule_, -kZmax, kZmax, brk, z1s, w1s);
        for (std::size_t i = 0; i < z1s.size(); ++i) {
            const double r1 = g.r_of_z(z1s[i]);
            double d1, d2;
            geom::deltas(r1, r2, h_, d1, d2);
            tw_.push_back(w1s[i] * wouter[j] * g.phi2(z1s[i], zouter[j]));
            td1_.push_back(d1);
            td2_.push_back(d2);
        }
    }
    mass_ = 0.0;
    for (const double w : tw_) mass_ += w;
}

double DiskCopula::z_of_r(double r) const {
    return Geom{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_}.z_of_r(r);
}
double DiskCopula::r_of_z(double z) const {
    return Geom{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_}.r_of_z(z);
}
double DiskCopula::phi2(double z1, double z2) const {
    return Geom{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_}.phi2(z1, z2);
}
void DiskCopula::lens_breaks(double r2, std::vector<double>& zbrk) const {
    Geom{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_}.lens_breaks(r2, zbrk);
}

double DiskCopula::region_term(double u1, double u2, int want) const {
    const Geom g{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_};
    const double lu1 = -std::log(u1), lu2 = -std::log(u2);
    const double ell = std::sqrt(lu1 / lu2);
    if (ell <= 0.0) return 0.0;
    // outer breaks: where the moving boundary r1 = r2*ell crosses the kink
    // curves or enters the square, plus the fixed kink entry lines
    std::vector<double> ob;
    g.outer_breaks(ob);
    if (g.rL > 0.0) {
        const double rk = g.rL / ell;
        if (rk > g.rL && rk < g.rU) ob.push_back(g.z_of_r(rk));
    }
    if (ell < 1.0) {
        const double rk = g.h / (1.0 - ell);
        if (rk > g.rL && rk < g.rU) ob.push_back(g.z_of_r(rk));
    }
    {
        const double rk = g.h / (1.0 + ell);
        if (rk > g.rL && rk < g.rU) ob.push_back(g.z_of_r(rk));
    }
    std::sort(ob.begin(), ob.end());
    std::vector<double> z2s, w2s, brk, z1s, w1s;
    panel_nodes(rule_, -kZmax, kZmax, ob, z2s, w2s);
    double acc = 0.0;
    for (std::size_t j = 0; j < z2s.size(); ++j) {
        const double r2 = g.r_of_z(z2s[j]);
        const double r1max = r2 * ell;
        if (r1max <= g.rL) continue;
        const double hi = g.z_of_r(std::min(r1max, g.rU));
        if (hi <= -kZmax) continue;
        g.lens_breaks(r2, brk);
        panel_nodes(rule_, -kZmax, hi, brk, z1s, w1s);
        double row = 0.0;
        for (std::size_t i = 0; i < z1s.size(); ++i) {
            const double r1 = g.r_of_z(z1s[i]);
            double d1, d2;
            geom::deltas(r1, r2, h_, d1, d2);
            row += w1s[i] * g.phi2(z1s[i], z2s[j]) *
                   region_integrand(want, d1, d2, u1, u2, lu1, lu2);
        }
        acc += w2s[j] * row;
    }
    return acc;
}

double DiskCopula::square_term(double u1, double u2, int want) const {
    const double lu1 = -std::log(u1), lu2 = -std::log(u2);
    double acc = 0.0;
    for (std::size_t k = 0; k < tw_.size(); ++k)
        acc += tw_[k] * square_integrand(want, td1_[k], u1, u2, lu1, lu2);
    return acc;
}

double DiskCopula::line_term(double u1, double u2) const {
    const Geom g{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_};
    return line_term_impl(g, rule_, u1, u2);
}

double DiskCopula::cdf(double u1, double u2) const {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    if (degenerate_) return marshall_olkin_cdf(u1, u2, mo_d1_, mo_d2_);
    if (comonotone_) {
        const double umin = std::min(u1, u2), lmax = -std::log(std::max(u1, u2));
        double acc = 0.0;
        for (std::size_t k = 0; k < cw_.size(); ++k)
            acc += cw_[k] * std::exp(-(1.0 - cd_[k]) * lmax);
        return umin * acc / cmass_;
    }
    if (u1 < u2) std::swap(u1, u2);
    return (region_term(u1, u2, kCdf) + square_term(u1, u2, kCdf)) / mass_;
}

std::pair<double, double> DiskCopula::partials(double u1, double u2) const {
    if (degenerate_)
        throw degenerate_error("DiskCopula::partials: rL == rU (Marshall-Olkin branch)");
    if (comonotone_)
        throw degenerate_error("DiskCopula::partials: comonotone limit at h ~ 0");
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    const bool sw = u1 < u2;
    if (sw) std::swap(u1, u2);
    double a = (region_term(u1, u2, kD1) + square_term(u1, u2, kD1)) / mass_;
    double b = (region_term(u1, u2, kD2) + square_term(u1, u2, kD2)) / mass_;
    if (sw) std::swap(a, b);
    return {a, b};
}

double DiskCopula::pdf(double u1, double u2) const {
    if (degenerate_)
        throw degenerate_error("DiskCopula::pdf: rL == rU has no density");
    if (comonotone_)
        throw degenerate_error("DiskCopula::pdf: comonotone limit at h ~ 0");
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    if (u1 < u2) std::swap(u1, u2);
    return (region_term(u1, u2, kPdf) + square_term(u1, u2, kPdf) +
            line_term(u1, u2)) / mass_;
}

// ---------------------------------------------------------------------------
// FastDiskEval
// ---------------------------------------------------------------------------

FastDiskEval::FastDiskEval(const rf::RadiusSpec& spec, double h, int order)
    : spec_(spec), h_(h) {
    rf::validate(spec);
    rho_ = spec.cov.rho(h);
    if (spec.rL == spec.rU) {
        degenerate_ = true;
        geom::deltas(spec.rL, spec.rU, h, mo_d1_, mo_d2_);
        return;
    }
    comonotone_ = rho_ >= kComonotoneRho;
    const auto build_rule = numerics::gauss_legendre(order);
    // a compact rule is enough for the 1-D boundary correction
    rule_ = numerics::gauss_legendre(std::min(order, 20));
    if (comonotone_) {
        const Geom g{spec.rL, spec.rU, spec.rU - spec.rL, rho_, h};
        std::vector<double> brk;
        if (h * 0.5 > spec.rL && h * 0.5 < spec.rU) brk.push_back(g.z_of_r(h * 0.5));
        std::vector<double> zs, ws;
        panel_nodes(build_rule, -kZmax, kZmax, brk, zs, ws);
        mass_ = 0.0;
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const double r = g.r_of_z(zs[i]);
            const double d = geom::lens_area(r, r, h) / (M_PI * r * r);
            w_.push_back(ws[i] * norm_pdf(zs[i]));
            d1_.push_back(d);
            d2_.push_back(d);
            mass_ += w_.back();
        }
        return;
    }
    const Geom g{spec.rL, spec.rU, spec.rU - spec.rL, rho_, h};
    mass_ = 0.0;
    for (int j = 0; j < order; ++j) {
        const double z2 = kZmax * build_rule.nodes[j];
        const double w2 = kZmax * build_rule.weights[j];
        const double r2 = g.r_of_z(z2);
        for (int i = 0; i < order; ++i) {
            const double z1 = kZmax * build_rule.nodes[i];
            const double w1 = kZmax * build_rule.weights[i];
            const double r1 = g.r_of_z(z1);
            double d1, d2;
            geom::deltas(r1, r2, h, d1, d2);
            const double w = w1 * w2 * g.phi2(z1, z2);
            mass_ += w;
            if (d1 <= 0.0 && d2 <= 0.0) {
                // zero-overlap nodes act as one aggregated independence atom
                w_indep_ += w;
            } else {
                w_.push_back(w);
                d1_.push_back(d1);
                d2_.push_back(d2);
            }
        }
    }
}

DiskCopula::Eval FastDiskEval::eval(double u1, double u2) const {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    if (degenerate_) {
        // Marshall-Olkin closed form; partials are the a.e. branch values
        DiskCopula::Eval ev;
        ev.cdf = marshall_olkin_cdf(u1, u2, mo_d1_, mo_d2_);
        const bool side1 = std::pow(u1, mo_d1_) < std::pow(u2, mo_d2_);
        ev.d1 = side1 ? std::pow(u2, 1.0 - mo_d2_)
                      : (1.0 - mo_d1_) * u2 * std::pow(u1, -mo_d1_);
        ev.d2 = side1 ? (1.0 - mo_d2_) * u1 * std::pow(u2, -mo_d2_)
                      : std::pow(u1, 1.0 - mo_d1_);
        ev.pdf = std::numeric_limits<double>::quiet_NaN();
        return ev;
    }
    if (comonotone_) {
        const bool sw = u1 < u2;
        double a = sw ? u2 : u1, b = sw ? u1 : u2;  // a >= b
        const double la = -std::log(a);
        double sc = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t k = 0; k < w_.size(); ++k) {
            const double e = std::exp(-(1.0 - d1_[k]) * la);
            sc += w_[k] * e;                              // b * a^{1-d}
            s1 += w_[k] * (1.0 - d1_[k]) * e / a;         // d/da
            s2 += w_[k] * e;                              // d/db
        }
        DiskCopula::Eval ev;
        ev.cdf = b * sc / mass_;
        const double da = b * s1 / mass_;  // sum w (1-d) b a^{-d}
        const double db = sc / mass_;      // sum w a^{1-d}
        ev.d1 = sw ? db : da;
        ev.d2 = sw ? da : db;
        ev.pdf = std::numeric_limits<double>::quiet_NaN();
        return ev;
    }
    const bool sw = u1 < u2;
    if (sw) std::swap(u1, u2);
    const double lu1 = -std::log(u1), lu2 = -std::log(u2);
    double sc = 0.0, s1 = 0.0, s2 = 0.0, sp = 0.0;
    for (std::size_t k = 0; k < w_.size(); ++k) {
        const double e1 = d1_[k] * lu1, e2 = d2_[k] * lu2;
        const double x1 = std::exp(e1), x2 = std::exp(e2);
        const double w = w_[k];
        sc += w * std::min(x1, x2);
        if (e1 > e2) {
            s1 += w * x2;
            s2 += w * (1.0 - d2_[k]) * x2;
            sp += w * (1.0 - d2_[k]) * x2;
        } else {
            s1 += w * (1.0 - d1_[k]) * x1;
            s2 += w * x1;
            sp += w * (1.0 - d1_[k]) * x1;
        }
    }
    // zero-overlap nodes: independence contribution
    sc += w_indep_;
    s1 += w_indep_;
    s2 += w_indep_;
    sp += w_indep_;
    DiskCopula::Eval ev;
    ev.cdf = u1 * u2 * sc / mass_;
    ev.d1 = u2 * s1 / mass_;
    ev.d2 = u1 * s2 / mass_;
    const Geom g{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_};
    ev.pdf = (sp + line_term_impl(g, rule_, u1, u2)) / mass_;
    if (sw) std::swap(ev.d1, ev.d2);
    return ev;
}

double FastDiskEval::pdf(double u1, double u2) const {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    if (degenerate_ || comonotone_)
        throw degenerate_error("FastDiskEval::pdf: no density");
    if (u1 < u2) std::swap(u1, u2);
    const double lu1 = -std::log(u1), lu2 = -std::log(u2);
    double sp = 0.0;
    for (std::size_t k = 0; k < w_.size(); ++k) {
        const double e1 = d1_[k] * lu1, e2 = d2_[k] * lu2;
        if (e1 > e2)
            sp += w_[k] * (1.0 - d2_[k]) * std::exp(e2);
        else
            sp += w_[k] * (1.0 - d1_[k]) * std::exp(e1);
    }
    sp += w_indep_;
    const Geom g{spec_.rL, spec_.rU, spec_.rU - spec_.rL, rho_, h_};
    return (sp + line_term_impl(g, rule_, u1, u2)) / mass_;
}

double FastDiskEval::log_pdf(double u1, double u2) const {
    return std::log(std::max(pdf(u1, u2), 1e-300));
}

// ---------------------------------------------------------------------------
// Mixture marginal and copula
// ---------------------------------------------------------------------------

double MixtureMarginal::cdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (q >= 1.0) return std::exp(-1.0 / z);
    return std::exp(-q / z) * companion.marginal_cdf(z / (1.0 - q));
}

double MixtureMarginal::pdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (q >= 1.0) return std::exp(-1.0 / z) / (z * z);
    const double y = z / (1.0 - q);
    return std::exp(-q / z) * (q / (z * z) * companion.marginal_cdf(y) +
                               companion.marginal_pdf(y) / (1.0 - q));
}

double MixtureMarginal::inv(double u) const {
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("MixtureMarginal::inv: u must be in (0,1)");
    if (q >= 1.0) return -1.0 / std::log(u);
    double lo = 0.5, hi = 2.0;
    int it = 0;
    while (cdf(lo) > u) {
        lo *= 0.5;
        if (++it > 200) throw bracketing_error("MixtureMarginal::inv: lower bracket");
    }
    it = 0;
    while (cdf(hi) < u) {
        hi *= 2.0;
        if (++it > 200) throw bracketing_error("MixtureMarginal::inv: upper bracket");
    }
    double z = numerics::bisect_inverse([this](double t) { return cdf(t); }, u,
                                        {lo, hi}, 1e-12);
    // Newton polish
    for (int k = 0; k < 3; ++k) {
        const double f = cdf(z) - u, d = pdf(z);
        if (d <= 0.0) break;
        z -= f / d;
    }
    return z;
}

void validate(const MixtureParams& p) {
    rf::validate(p.radius);
    rf::validate(p.companion);
    if (!(p.q > 0.0 && p.q <= 1.0))
        throw std::invalid_argument("MixtureParams: q must be in (0,1]");
}

MixtureCopula::MixtureCopula(const MixtureParams& params, double h, int order)
    : params_(params), h_(h), disk_(params.radius, h, order) {
    validate(params);
    marg_.q = params.q;
    marg_.companion = params.companion;
    rhoY_ = params.companion.cov.rho(h);
}

MixtureCopula::CompanionTerms MixtureCopula::companion_terms(double z1, double z2,
                                                             bool density) const {
    CompanionTerms ct{1.0, 0.0, 0.0, 0.0};
    const double q = params_.q;
    const double y1 = z1 / (1.0 - q), y2 = z2 / (1.0 - q);
    const double rho = rhoY_;
    const auto& comp = params_.companion;
    if (comp.family == rf::CompanionFamily::gaussian) {
        const double s = std::sqrt(1.0 - rho * rho);
        ct.B = numerics::bvn_cdf(y1, y2, rho);
        ct.B1 = norm_pdf(y1) * norm_cdf((y2 - rho * y1) / s) / (1.0 - q);
        ct.B2 = norm_pdf(y2) * norm_cdf((y1 - rho * y2) / s) / (1.0 - q);
        if (density) ct.B12 = numerics::bvn_pdf(y1, y2, rho) / ((1.0 - q) * (1.0 - q));
    } else {
        const double nu = comp.nu;
        const double u1 = comp.marginal_cdf(y1), u2 = comp.marginal_cdf(y2);
        const double t1 = numerics::student_t_quantile(std::clamp(u1, 1e-300, 1.0 - 1e-16), nu);
        const double t2 = numerics::student_t_quantile(std::clamp(u2, 1e-300, 1.0 - 1e-16), nu);
        ct.B = numerics::bvt_cdf(t1, t2, rho, nu);
        const double s1 = numerics::bvt_cond_scale(t1, rho, nu);
        const double s2 = numerics::bvt_cond_scale(t2, rho, nu);
        const double f1 = comp.marginal_pdf(y1), f2 = comp.marginal_pdf(y2);
        ct.B1 = numerics::student_t_cdf((t2 - rho * t1) / s1, nu + 1.0) * f1 / (1.0 - q);
        ct.B2 = numerics::student_t_cdf((t1 - rho * t2) / s2, nu + 1.0) * f2 / (1.0 - q);
        if (density) {
            const double ctd = numerics::bvt_pdf(t1, t2, rho, nu) /
                               (numerics::student_t_pdf(t1, nu) *
                                numerics::student_t_pdf(t2, nu));
            ct.B12 = ctd * f1 * f2 / ((1.0 - q) * (1.0 - q));
        }
    }
    return ct;
}

double MixtureCopula::joint_cdf_z(double z1, double z2) const {
    const double q = params_.q;
    if (z1 <= 0.0 || z2 <= 0.0) return 0.0;
    const double a1 = std::exp(-q / z1), a2 = std::exp(-q / z2);
    if (q >= 1.0) return disk_.cdf(a1, a2);
    return disk_.cdf(a1, a2) * companion_terms(z1, z2, false).B;
}

double MixtureCopula::cdf(double u1, double u2) const {
    if (params_.q >= 1.0) return disk_.cdf(u1, u2);
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    return joint_cdf_z(marg_.inv(u1), marg_.inv(u2));
}

double MixtureCopula::pdf(double u1, double u2) const {
    if (params_.q >= 1.0) return disk_.pdf(u1, u2);
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    const double q = params_.q;
    const double z1 = marg_.inv(u1), z2 = marg_.inv(u2);
    const double a1 = std::exp(-q / z1), a2 = std::exp(-q / z2);
    const double da1 = a1 * q / (z1 * z1), da2 = a2 * q / (z2 * z2);
    const double A = disk_.cdf(a1, a2);
    const auto [A1, A2] = disk_.partials(a1, a2);
    const double A12 = disk_.pdf(a1, a2);
    const auto ct = companion_terms(z1, z2, true);
    const double f2 = A12 * da1 * da2 * ct.B + A1 * da1 * ct.B2 + A2 * da2 * ct.B1 +
                      A * ct.B12;
    const double den = marg_.pdf(z1) * marg_.pdf(z2);
    if (!std::isfinite(f2) || !std::isfinite(den) || den <= 0.0) {
        std::ostringstream os;
        os << "MixtureCopula::pdf: non-finite term at u=(" << u1 << "," << u2
           << "), joint=" << f2 << ", marginals=" << den;
        throw numeric_error(os.str());
    }
    return f2 / den;
}

std::pair<double, double> MixtureCopula::partials(double u1, double u2) const {
    if (params_.q >= 1.0) return disk_.partials(u1, u2);
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    const double q = params_.q;
    const double z1 = marg_.inv(u1), z2 = marg_.inv(u2);
    const double a1 = std::exp(-q / z1), a2 = std::exp(-q / z2);
    const double da1 = a1 * q / (z1 * z1), da2 = a2 * q / (z2 * z2);
    const double A = disk_.cdf(a1, a2);
    const auto [A1, A2] = disk_.partials(a1, a2);
    const auto ct = companion_terms(z1, z2, false);
    const double g1 = (A1 * da1 * ct.B + A * ct.B1) / marg_.pdf(z1);
    const double g2 = (A2 * da2 * ct.B + A * ct.B2) / marg_.pdf(z2);
    return {g1, g2};
}

// ---------------------------------------------------------------------------
// Reference copulas
// ---------------------------------------------------------------------------

double gaussian_copula_cdf(double u1, double u2, double rho) {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    return numerics::bvn_cdf(norm_quantile(u1), norm_quantile(u2), rho);
}

double gaussian_copula_pdf(double u1, double u2, double rho) {
    if (std::abs(rho) >= 1.0)
        throw std::invalid_argument("gaussian_copula_pdf: |rho| must be < 1");
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    const double z1 = norm_quantile(u1), z2 = norm_quantile(u2);
    const double s2 = 1.0 - rho * rho;
    const double e = -(rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) /
                     (2.0 * s2);
    return std::exp(e) / std::sqrt(s2);
}

double student_copula_cdf(double u1, double u2, double rho, double nu) {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    return numerics::bvt_cdf(numerics::student_t_quantile(u1, nu),
                             numerics::student_t_quantile(u2, nu), rho, nu);
}

double student_copula_pdf(double u1, double u2, double rho, double nu) {
    if (std::abs(rho) >= 1.0)
        throw std::invalid_argument("student_copula_pdf: |rho| must be < 1");
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    const double t1 = numerics::student_t_quantile(u1, nu);
    const double t2 = numerics::student_t_quantile(u2, nu);
    return numerics::bvt_pdf(t1, t2, rho, nu) /
           (numerics::student_t_pdf(t1, nu) * numerics::student_t_pdf(t2, nu));
}

double reference_copula_pdf(double u1, double u2, double rho, RefFamily fam,
                            double nu) {
    return fam == RefFamily::gaussian ? gaussian_copula_pdf(u1, u2, rho)
                                      : student_copula_pdf(u1, u2, rho, nu);
}

// ---------------------------------------------------------------------------
// Family registry
// ---------------------------------------------------------------------------

const char* family_name(Family f) {
    switch (f) {
        case Family::M1_gaussian: return "M1";
        case Family::M2_student: return "M2";
        case Family::M3_maxconv: return "M3";
        case Family::M4_mix_gaussian: return "M4";
        default: return "M5";
    }
}

Family family_from_name(const std::string& s) {
    if (s == "M1" || s == "m1") return Family::M1_gaussian;
    if (s == "M2" || s == "m2") return Family::M2_student;
    if (s == "M3" || s == "m3") return Family::M3_maxconv;
    if (s == "M4" || s == "m4") return Family::M4_mix_gaussian;
    if (s == "M5" || s == "m5") return Family::M5_mix_student;
    throw std::invalid_argument("unknown model family: " + s);
}

rf::RadiusSpec radius_spec(const ModelParams& p) {
    rf::RadiusSpec rs;
    rs.rL = p.rL;
    rs.rU = p.rU;
    rs.cov = {rf::CovFamily::exponential, p.theta_R, 1.0};
    return rs;
}

MixtureParams mixture_params(const ModelParams& p, Family f) {
    MixtureParams mp;
    mp.radius = radius_spec(p);
    mp.q = p.q;
    mp.companion.cov = {rf::CovFamily::powered_exponential, p.theta_Y, p.alpha_Y};
    if (f == Family::M5_mix_student) {
        mp.companion.family = rf::CompanionFamily::student_t_frechet;
        mp.companion.nu = p.nu;
        mp.companion.beta = p.beta;
    } else {
        mp.companion.family = rf::CompanionFamily::gaussian;
    }
    return mp;
}

PairCopula::PairCopula(Family family, const ModelParams& params, double h, int order)
    : family_(family), params_(params), h_(h) {
    switch (family) {
        case Family::M1_gaussian:
        case Family::M2_student: {
            rf::CovarianceSpec cov{rf::CovFamily::powered_exponential, params.theta,
                                   params.alpha};
            rf::validate(cov);
            rho_ = cov.rho(h);
            break;
        }
        case Family::M3_maxconv:
            disk_ = std::make_unique<DiskCopula>(radius_spec(params), h, order);
            break;
        default:
            mix_ = std::make_unique<MixtureCopula>(mixture_params(params, family), h,
                                                   order);
    }
}

double PairCopula::cdf(double u1, double u2) const {
    switch (family_) {
        case Family::M1_gaussian: return gaussian_copula_cdf(u1, u2, rho_);
        case Family::M2_student: return student_copula_cdf(u1, u2, rho_, params_.nu);
        case Family::M3_maxconv: return disk_->cdf(u1, u2);
        default: return mix_->cdf(u1, u2);
    }
}

double PairCopula::pdf(double u1, double u2) const {
    switch (family_) {
        case Family::M1_gaussian: return gaussian_copula_pdf(u1, u2, rho_);
        case Family::M2_student: return student_copula_pdf(u1, u2, rho_, params_.nu);
        case Family::M3_maxconv: return disk_->pdf(u1, u2);
        default: return mix_->pdf(u1, u2);
    }
}

std::pair<double, double> PairCopula::partials(double u1, double u2) const {
    switch (family_) {
        case Family::M1_gaussian: {
            const double z1 = norm_quantile(clamp_u(u1)), z2 = norm_quantile(clamp_u(u2));
            const double s = std::sqrt(1.0 - rho_ * rho_);
            return {norm_cdf((z2 - rho_ * z1) / s), norm_cdf((z1 - rho_ * z2) / s)};
        }
        case Family::M2_student: {
            const double nu = params_.nu;
            const double t1 = numerics::student_t_quantile(clamp_u(u1), nu);
            const double t2 = numerics::student_t_quantile(clamp_u(u2), nu);
            const double s1 = numerics::bvt_cond_scale(t1, rho_, nu);
            const double s2 = numerics::bvt_cond_scale(t2, rho_, nu);
            return {numerics::student_t_cdf((t2 - rho_ * t1) / s1, nu + 1.0),
                    numerics::student_t_cdf((t1 - rho_ * t2) / s2, nu + 1.0)};
        }
        case Family::M3_maxconv: return disk_->partials(u1, u2);
        default: return mix_->partials(u1, u2);
    }
}

double copula_cdf(double u1, double u2, double h, const rf::RadiusSpec& spec,
                  const numerics::QuadratureRule& rule) {
    return DiskCopula(spec, h, rule.order).cdf(u1, u2);
}
double copula_pdf(double u1, double u2, double h, const rf::RadiusSpec& spec,
                  const numerics::QuadratureRule& rule) {
    return DiskCopula(spec, h, rule.order).pdf(u1, u2);
}
std::pair<double, double> copula_partials(double u1, double u2, double h,
                                          const rf::RadiusSpec& spec,
                                          const numerics::QuadratureRule& rule) {
    return DiskCopula(spec, h, rule.order).partials(u1, u2);
}

}  // namespace maxconv::copula
