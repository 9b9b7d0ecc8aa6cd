#ifndef MAXCONV_RANDOMFIELDS_HPP
#define MAXCONV_RANDOMFIELDS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "maxconv/rng.hpp"

namespace maxconv::rf {

struct Point {
    double x;
    double y;
};

// Planar site collection with Euclidean pairwise distances.
struct SiteSet {
    std::vector<Point> pts;

    std::size_t size() const { return pts.size(); }
    double dist(std::size_t i, std::size_t j) const {
        const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
        return std::sqrt(dx * dx + dy * dy);
    }
    static SiteSet random_uniform(std::size_t p, double lo, double hi, Rng& rng);
};

enum class CovFamily { exponential, powered_exponential };

struct CovarianceSpec {
    CovFamily family = CovFamily::exponential;
    double theta = 1.0;  // range, distance units
    double alpha = 1.0;  // smoothness, powered-exponential only, in (0,2]

    double rho(double h) const {
        if (h <= 0.0) return 1.0;
        if (family == CovFamily::exponential) return std::exp(-h / theta);
        return std::exp(-std::pow(h / theta, alpha));
    }
};

void validate(const CovarianceSpec& c);

// Radius process R(s): trans-Gaussian with U(rL,rU) marginals.
struct RadiusSpec {
    double rL = 0.0;
    double rU = 0.4;
    CovarianceSpec cov;
};

void validate(const RadiusSpec& r);

enum class CompanionFamily { gaussian, student_t_frechet };

// Companion process Y(s) for the max-mixture.
struct CompanionSpec {
    CompanionFamily family = CompanionFamily::gaussian;
    CovarianceSpec cov;
    double nu = 4.0;    // t degrees of freedom (student_t_frechet only)
    double beta = 1.2;  // Frechet tail index (student_t_frechet only)

    double marginal_cdf(double z) const;  // F_Y
    double marginal_pdf(double z) const;  // f_Y
};

void validate(const CompanionSpec& c);

// Cholesky factor of the site correlation matrix, with coincident sites
// deduplicated so they receive identical draws and an escalating nugget
// (1e-12 to 1e-8) if the factorization stalls. Reusable across draws.
class GpSampler {
public:
    GpSampler(const SiteSet& sites, const CovarianceSpec& cov);
    std::vector<double> draw(Rng& rng) const;
    std::size_t size() const { return map_.size(); }

private:
    std::vector<std::size_t> map_;    // site -> unique-site index
    std::vector<double> chol_;        // lower triangular, row-major packed
    std::size_t m_ = 0;               // number of unique sites
};

// One draw of a zero-mean unit-variance Gaussian vector over the sites.
std::vector<double> sample_gp(const SiteSet& sites, const CovarianceSpec& cov,
                              std::uint64_t seed, std::uint64_t stream = 0);

// R_j = rL + (rU-rL) * Phi(G_j).
std::vector<double> sample_radius(const SiteSet& sites, const RadiusSpec& spec,
                                  std::uint64_t seed, std::uint64_t stream = 0);
std::vector<double> radius_from_gauss(const RadiusSpec& spec,
                                      const std::vector<double>& g);

// Gaussian family: the GP itself. Student-t family: G / sqrt(chi2_nu / nu)
// with a single shared mixing variable, pushed to Frechet(beta) marginals.
std::vector<double> sample_companion(const SiteSet& sites, const CompanionSpec& spec,
                                     std::uint64_t seed, std::uint64_t stream = 0);
std::vector<double> companion_from_gauss(const CompanionSpec& spec,
                                         const std::vector<double>& g, Rng& rng);

// Joint density g_R of (R(s1), R(s2)) at distance h. Gaussian-copula density
// at the uniform scores divided by (rU-rL)^2; zero outside (rL,rU)^2.
// Throws degenerate_error when rL == rU (closed-form Marshall-Olkin branch
// applies instead).
double radius_pair_density(double r1, double r2, double h, const RadiusSpec& spec);

}  // namespace maxconv::rf

#endif
