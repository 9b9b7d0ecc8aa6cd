#ifndef MAXCONV_FIT_HPP
#define MAXCONV_FIT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "maxconv/copula.hpp"
#include "maxconv/matrix.hpp"
#include "maxconv/measures.hpp"

namespace maxconv::fit {

// Indicator pair weights by distance threshold. scale rescales all retained
// pairs uniformly (the objective is linear in the weights).
struct PairWeightRule {
    double d_max = 0.25;
    double scale = 1.0;
    double weight(double h) const { return h < d_max ? scale : 0.0; }
};

PairWeightRule default_weights(double d_max);

enum class Transform { log_positive, logit_interval };

struct ParamSpec {
    std::string name;
    double lo = 0.0, hi = 1.0;  // box bounds (open interval for the transform)
    Transform transform = Transform::log_positive;
    bool fixed = false;
    double value = 0.0;  // fixed value, or initial hint
};

double to_unconstrained(const ParamSpec& p, double x);
double from_unconstrained(const ParamSpec& p, double t);

struct FitSpec {
    copula::Family family = copula::Family::M3_maxconv;
    std::vector<ParamSpec> params;  // free and fixed, in canonical family order
    int max_iterations = 500;
    double tolerance = 1e-6;  // relative objective change
    int starts = 3;
    int quad_order = 35;      // fitting-path quadrature order
    int threads = 0;          // 0 = hardware concurrency
};

// Canonical free/fixed parameter layout per family (study defaults).
FitSpec default_fit_spec(copula::Family family);

struct FitResult {
    copula::Family family = copula::Family::M3_maxconv;
    std::map<std::string, double> estimates;    // free parameters at optimum
    std::map<std::string, double> fixed;        // fixed parameters
    double objective = 0.0;                     // maximized pairwise log-likelihood
    bool converged = false;
    int iterations = 0;                         // total across starts
    int evaluations = 0;
    std::uint64_t seed = 0;
    double d_max = 0.0;
    std::vector<double> pair_contributions;     // per retained pair, at optimum
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // retained index pairs
    std::string message;

    copula::ModelParams model_params() const;
    std::string to_json() const;
};

// Distances enter only through the pairwise matrix, so callers can supply
// either planar sites or externally computed (e.g. great-circle) distances.
struct PairGeometry {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // j1 < j2, weight 1
    std::vector<double> h;
};

PairGeometry retained_pairs(const Matrix& dist, const PairWeightRule& w);
Matrix distance_matrix(const rf::SiteSet& sites);

// Weighted pairwise log-likelihood for a family at given parameters.
// Pair densities are floored at 1e-300 before the logarithm. Throws
// data_error when no pair has positive weight and numeric_error on a
// non-finite density (naming the pair and row).
double pairwise_loglik(const measures::PseudoObservations& u, const Matrix& dist,
                       copula::Family family, const copula::ModelParams& params,
                       const PairWeightRule& weights, int quad_order = 35,
                       int threads = 0,
                       std::vector<double>* pair_contrib = nullptr);

// Maximize pairwise_loglik by Nelder-Mead in the unconstrained
// reparameterization with 3 deterministic starts. Non-convergence is
// reported in the result, not thrown.
FitResult fit_model(const measures::PseudoObservations& u, const Matrix& dist,
                    const FitSpec& spec, const PairWeightRule& weights,
                    std::uint64_t seed);

// Derivative-free simplex minimizer (exposed for reuse and testing).
struct NmResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};
NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& x0, double step, double tol,
                     int max_iter);

copula::ModelParams assemble_params(const FitSpec& spec,
                                    const std::vector<double>& free_values);

}  // namespace maxconv::fit

#endif
