#include "maxconv/randomfields.hpp"

#include <cmath>
#include <stdexcept>

#include "maxconv/errors.hpp"
#include "maxconv/numerics.hpp"

namespace maxconv::rf {

using numerics::norm_cdf;
using numerics::norm_pdf;
using numerics::norm_quantile;

SiteSet SiteSet::random_uniform(std::size_t p, double lo, double hi, Rng& rng) {
    SiteSet s;
    s.pts.reserve(p);
    for (std::size_t i = 0; i < p; ++i)
        s.pts.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi)});
    return s;
}

void validate(const CovarianceSpec& c) {
    if (!(c.theta > 0.0)) throw std::invalid_argument("CovarianceSpec: theta must be > 0");
    if (c.family == CovFamily::powered_exponential &&
        !(c.alpha > 0.0 && c.alpha <= 2.0))
        throw std::invalid_argument("CovarianceSpec: alpha must be in (0,2]");
}

void validate(const RadiusSpec& r) {
    validate(r.cov);
    if (!(r.rL >= 0.0 && r.rL <= r.rU && r.rU > 0.0))
        throw std::invalid_argument("RadiusSpec: need 0 <= rL <= rU, rU > 0");
}

void validate(const CompanionSpec& c) {
    validate(c.cov);
    if (c.family == CompanionFamily::student_t_frechet) {
        if (!(c.nu > 0.0)) throw std::invalid_argument("CompanionSpec: nu must be > 0");
        if (!(c.beta > 0.0)) throw std::invalid_argument("CompanionSpec: beta must be > 0");
    }
}

double CompanionSpec::marginal_cdf(double z) const {
    if (family == CompanionFamily::gaussian) return norm_cdf(z);
    return z > 0.0 ? std::exp(-std::pow(z, -beta)) : 0.0;
}

double CompanionSpec::marginal_pdf(double z) const {
    if (family == CompanionFamily::gaussian) return norm_pdf(z);
    if (z <= 0.0) return 0.0;
    return beta * std::pow(z, -beta - 1.0) * std::exp(-std::pow(z, -beta));
}

GpSampler::GpSampler(const SiteSet& sites, const CovarianceSpec& cov) {
    validate(cov);
    const std::size_t p = sites.size();
    if (p == 0) throw std::invalid_argument("GpSampler: empty site set");
    // collapse exactly coincident sites so they share one latent coordinate
    map_.assign(p, 0);
    std::vector<std::size_t> uniq;
    for (std::size_t i = 0; i < p; ++i) {
        bool found = false;
        for (std::size_t k = 0; k < uniq.size() && !found; ++k) {
            const auto& a = sites.pts[uniq[k]];
            if (a.x == sites.pts[i].x && a.y == sites.pts[i].y) {
                map_[i] = k;
                found = true;
            }
        }
        if (!found) {
            map_[i] = uniq.size();
            uniq.push_back(i);
        }
    }
    m_ = uniq.size();
    std::vector<double> corr(m_ * m_);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = 0; j < m_; ++j) {
            const double dx = sites.pts[uniq[i]].x - sites.pts[uniq[j]].x;
            const double dy = sites.pts[uniq[i]].y - sites.pts[uniq[j]].y;
            corr[i * m_ + j] = cov.rho(std::sqrt(dx * dx + dy * dy));
        }
    for (double nugget = 1e-12;; nugget *= 100.0) {
        chol_.assign(m_ * m_, 0.0);
        std::vector<double> a = corr;
        for (std::size_t i = 0; i < m_; ++i) a[i * m_ + i] += nugget;
        bool ok = true;
        for (std::size_t i = 0; i < m_ && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double sum = a[i * m_ + j];
                for (std::size_t k = 0; k < j; ++k)
                    sum -= chol_[i * m_ + k] * chol_[j * m_ + k];
                if (i == j) {
                    if (sum <= 0.0) {
                        ok = false;
                        break;
                    }
                    chol_[i * m_ + i] = std::sqrt(sum);
                } else {
                    chol_[i * m_ + j] = sum / chol_[j * m_ + j];
                }
            }
        }
        if (ok) {
            // renormalize rows so the marginal variance stays exactly 1
            for (std::size_t i = 0; i < m_; ++i) {
                double ss = 0.0;
                for (std::size_t k = 0; k <= i; ++k)
                    ss += chol_[i * m_ + k] * chol_[i * m_ + k];
                const double sc = 1.0 / std::sqrt(ss);
                for (std::size_t k = 0; k <= i; ++k) chol_[i * m_ + k] *= sc;
            }
            return;
        }
        if (nugget >= 1e-8)
            throw ill_conditioned_error(
                "GpSampler: covariance factorization failed after 1e-8 nugget");
    }
}

std::vector<double> GpSampler::draw(Rng& rng) const {
    std::vector<double> g(m_);
    for (auto& v : g) v = rng.normal();
    std::vector<double> z(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += chol_[i * m_ + k] * g[k];
        z[i] = s;
    }
    std::vector<double> out(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) out[i] = z[map_[i]];
    return out;
}

std::vector<double> sample_gp(const SiteSet& sites, const CovarianceSpec& cov,
                              std::uint64_t seed, std::uint64_t stream) {
    GpSampler gp(sites, cov);
    Rng rng(seed, stream);
    return gp.draw(rng);
}

std::vector<double> radius_from_gauss(const RadiusSpec& spec,
                                      const std::vector<double>& g) {
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        r[i] = spec.rL + (spec.rU - spec.rL) * norm_cdf(g[i]);
    return r;
}

std::vector<double> sample_radius(const SiteSet& sites, const RadiusSpec& spec,
                                  std::uint64_t seed, std::uint64_t stream) {
    validate(spec);
    if (spec.rL == spec.rU)  // degenerate uniform: constant field
        return std::vector<double>(sites.size(), spec.rL);
    return radius_from_gauss(spec, sample_gp(sites, spec.cov, seed, stream));
}

std::vector<double> companion_from_gauss(const CompanionSpec& spec,
                                         const std::vector<double>& g, Rng& rng) {
    if (spec.family == CompanionFamily::gaussian) return g;
    // one shared chi-squared mixing variable makes a Student-t process
    const double mix = std::sqrt(rng.chi_squared(spec.nu) / spec.nu);
    std::vector<double> y(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g[i] / mix;
        const double u = numerics::student_t_cdf(t, spec.nu);
        const double uc = std::min(std::max(u, 1e-300), 1.0 - 1e-16);
        y[i] = std::pow(-std::log(uc), -1.0 / spec.beta);
    }
    return y;
}

std::vector<double> sample_companion(const SiteSet& sites, const CompanionSpec& spec,
                                     std::uint64_t seed, std::uint64_t stream) {
    validate(spec);
    GpSampler gp(sites, spec.cov);
    Rng rng(seed, stream);
    auto g = gp.draw(rng);
    return companion_from_gauss(spec, g, rng);
}

double radius_pair_density(double r1, double r2, double h, const RadiusSpec& spec) {
    validate(spec);
    if (spec.rL == spec.rU)
        throw degenerate_error(
            "radius_pair_density: rL == rU has no density; use the "
            "Marshall-Olkin closed form");
    const double w = spec.rU - spec.rL;
    if (r1 <= spec.rL || r1 >= spec.rU || r2 <= spec.rL || r2 >= spec.rU) return 0.0;
    const double rho = spec.cov.rho(h);
    const double z1 = norm_quantile((r1 - spec.rL) / w);
    const double z2 = norm_quantile((r2 - spec.rL) / w);
    if (rho >= 1.0 - 1e-12) {
        // comonotone limit has no planar density; treat as numeric error
        throw degenerate_error("radius_pair_density: rho(h) ~ 1 is degenerate");
    }
    const double s2 = 1.0 - rho * rho;
    const double expo = -(rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) / (2.0 * s2);
    return std::exp(expo) / (std::sqrt(s2) * w * w);
}

}  // namespace maxconv::rf
