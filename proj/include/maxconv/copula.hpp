#ifndef MAXCONV_COPULA_HPP
#define MAXCONV_COPULA_HPP

#include <memory>
#include <utility>
#include <vector>

#include "maxconv/numerics.hpp"
#include "maxconv/randomfields.hpp"

namespace maxconv::copula {

// Marshall-Olkin copula min(u1 * u2^{1-d2}, u2 * u1^{1-d1}).
double marshall_olkin_cdf(double u1, double u2, double d1, double d2);

// ---------------------------------------------------------------------------
// Copula of the disk max-convolution process at one distance h.
//
// All radius expectations are tensor Gauss-Legendre quadratures over
// (rL,rU)^2, evaluated through the Gaussian reparameterization
// r = rL + (rU-rL) * Phi(z) so the Gaussian-copula weight is handled exactly;
// integration panels are split along the kink curves of the lens area.
// The density and partials follow the region decomposition
//     C = I0 + int u2 u1^{1-d1} g,    I0 over {r1 < r2 * ell12},
// whose mixed partial carries a boundary line integral along r1 = r2*ell12.
// ---------------------------------------------------------------------------
class DiskCopula {
public:
    DiskCopula(const rf::RadiusSpec& spec, double h, int order = 35);

    double cdf(double u1, double u2) const;
    double pdf(double u1, double u2) const;
    std::pair<double, double> partials(double u1, double u2) const;

    // cdf and both partials share one quadrature pass
    struct Eval {
        double cdf;
        double d1;
        double d2;
        double pdf;
    };

    bool degenerate() const { return degenerate_; }  // rL == rU
    bool comonotone() const { return comonotone_; }  // h ~ 0
    double h() const { return h_; }
    const rf::RadiusSpec& spec() const { return spec_; }
    int order() const { return order_; }

    // quadrature mass of g_R on the table (normalization denominator)
    double table_mass() const { return mass_; }

private:
    double region_term(double u1, double u2, int want) const;
    double square_term(double u1, double u2, int want) const;
    double line_term(double u1, double u2) const;
    double z_of_r(double r) const;
    double r_of_z(double z) const;
    double phi2(double z1, double z2) const;
    void lens_breaks(double r2, std::vector<double>& zbrk) const;

    rf::RadiusSpec spec_;
    double h_ = 0.0;
    double rho_ = 0.0;
    int order_ = 35;
    bool degenerate_ = false;
    bool comonotone_ = false;
    double mo_d1_ = 0.0, mo_d2_ = 0.0;  // degenerate-branch parameters
    numerics::QuadratureRule rule_;
    // fixed full-square table (z-space tensor with lens panels)
    std::vector<double> tw_, td1_, td2_;
    double mass_ = 1.0;
    // comonotone-radius branch (rho ~ 1): 1-D mixture over the common radius
    std::vector<double> cw_, cd_;
    double cmass_ = 1.0;
};

// Fitting-path evaluator: fixed-node Marshall-Olkin mixture on a plain
// z-space tensor grid (no panels), with the same boundary line correction
// for the density. Roughly an order of magnitude faster than the split
// scheme at the cost of ~1e-3 relative density accuracy.
class FastDiskEval {
public:
    FastDiskEval(const rf::RadiusSpec& spec, double h, int order = 35);

    DiskCopula::Eval eval(double u1, double u2) const;  // cdf, d1, d2, pdf
    double pdf(double u1, double u2) const;
    double log_pdf(double u1, double u2) const;

private:
    rf::RadiusSpec spec_;
    double h_ = 0.0, rho_ = 0.0;
    bool comonotone_ = false, degenerate_ = false;
    double mo_d1_ = 0.0, mo_d2_ = 0.0;
    numerics::QuadratureRule rule_;
    std::vector<double> w_, d1_, d2_;
    double w_indep_ = 0.0;  // aggregated weight of zero-overlap nodes
    double mass_ = 1.0;
};

// ---------------------------------------------------------------------------
// Max-mixture marginal F~(z) = exp(-q/z) * F_Y(z / (1-q)), its density and
// inverse (bracketed bisection to 1e-12).
// ---------------------------------------------------------------------------
struct MixtureMarginal {
    double q = 0.2;
    rf::CompanionSpec companion;

    double cdf(double z) const;
    double pdf(double z) const;
    double inv(double u) const;
};

// Mixture parameters: disk component + mixing weight + companion process.
struct MixtureParams {
    rf::RadiusSpec radius;
    double q = 0.2;
    rf::CompanionSpec companion;
};

void validate(const MixtureParams& p);

// Copula of the max-mixture process Z~ = max(q Z, (1-q) Y) at distance h.
// Joint cdf factorizes as C_Z(e^{-q/z1}, e^{-q/z2}; h) * F_Y(y1, y2); the
// copula pdf is the mixed partial of that product divided by the marginal
// densities.
class MixtureCopula {
public:
    MixtureCopula(const MixtureParams& params, double h, int order = 35);

    double cdf(double u1, double u2) const;
    double pdf(double u1, double u2) const;
    std::pair<double, double> partials(double u1, double u2) const;

    const MixtureMarginal& marginal() const { return marg_; }
    double joint_cdf_z(double z1, double z2) const;

private:
    struct CompanionTerms {
        double B, B1, B2, B12;  // F_Y2 and partials in z-units
    };
    CompanionTerms companion_terms(double z1, double z2, bool density) const;

    MixtureParams params_;
    MixtureMarginal marg_;
    double h_ = 0.0, rhoY_ = 0.0;
    DiskCopula disk_;
};

// Closed-form reference copulas (models M1 and M2).
double gaussian_copula_cdf(double u1, double u2, double rho);
double gaussian_copula_pdf(double u1, double u2, double rho);
double student_copula_cdf(double u1, double u2, double rho, double nu);
double student_copula_pdf(double u1, double u2, double rho, double nu);

enum class RefFamily { gaussian, student };
double reference_copula_pdf(double u1, double u2, double rho, RefFamily fam,
                            double nu = 4.0);

// ---------------------------------------------------------------------------
// Family-dispatched pair copula for the model registry M1..M5.
// ---------------------------------------------------------------------------
enum class Family { M1_gaussian, M2_student, M3_maxconv, M4_mix_gaussian, M5_mix_student };

const char* family_name(Family f);
Family family_from_name(const std::string& s);

// Family-specific parameter record. Unused fields are ignored per family.
struct ModelParams {
    // M1/M2 reference copulas: powered-exponential correlation
    double theta = 1.0;
    double alpha = 1.0;
    double nu = 4.0;  // M2, M5
    // disk component (M3/M4/M5): U(rL,rU) radii, exponential correlation
    double rL = 0.0;
    double rU = 0.4;
    double theta_R = 1.0;
    // companion component (M4/M5)
    double theta_Y = 0.5;
    double alpha_Y = 1.0;
    double beta = 1.2;  // M5
    double q = 0.2;     // M4/M5
};

rf::RadiusSpec radius_spec(const ModelParams& p);
MixtureParams mixture_params(const ModelParams& p, Family f);

// Point-evaluation facade used by summaries and tests.
class PairCopula {
public:
    PairCopula(Family family, const ModelParams& params, double h, int order = 35);
    double cdf(double u1, double u2) const;
    double pdf(double u1, double u2) const;
    std::pair<double, double> partials(double u1, double u2) const;
    Family family() const { return family_; }

private:
    Family family_;
    ModelParams params_;
    double h_ = 0.0, rho_ = 0.0;
    std::unique_ptr<DiskCopula> disk_;
    std::unique_ptr<MixtureCopula> mix_;
};

// Spec-surface free functions (thin wrappers over DiskCopula).
double copula_cdf(double u1, double u2, double h, const rf::RadiusSpec& spec,
                  const numerics::QuadratureRule& rule);
double copula_pdf(double u1, double u2, double h, const rf::RadiusSpec& spec,
                  const numerics::QuadratureRule& rule);
std::pair<double, double> copula_partials(double u1, double u2, double h,
                                          const rf::RadiusSpec& spec,
                                          const numerics::QuadratureRule& rule);

}  // namespace maxconv::copula

#endif
