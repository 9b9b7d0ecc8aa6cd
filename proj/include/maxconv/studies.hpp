#ifndef MAXCONV_STUDIES_HPP
#define MAXCONV_STUDIES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "maxconv/data.hpp"
#include "maxconv/fit.hpp"

namespace maxconv::studies {

// Desk-scale replication of the paper-style simulation studies.
struct StudyConfig {
    int id = 1;  // 1: disk model, 2: gaussian max-mixture, 3: student max-mixture
    std::size_t p = 20;
    std::size_t n = 500;
    int replicates = 30;
    double d_max = 0.0;  // 0 = study default (0.25 for 1-2, 0.5 for 3)
    int quad_order = 35;
    int threads = 0;
    std::uint64_t seed = 20240801;
};

struct StudyResult {
    std::vector<std::string> param_names;       // free parameters
    std::vector<double> true_values;
    std::vector<std::vector<double>> estimates;  // one row per replicate
    std::vector<bool> converged;
    std::vector<double> rmse;

    std::string to_csv() const;
};

copula::ModelParams study_truth(int id);
fit::FitSpec study_fit_spec(int id, int quad_order);
double study_cutoff(int id);

StudyResult replicate_study(const StudyConfig& cfg);

// Dependence-summary discrepancies between a fitted and the true model over
// the pairs of one site layout: mean |Delta| of S_rho and of the lower/upper
// tail-weighted measures, via pair Monte Carlo at fixed seeds.
struct Discrepancy {
    double dS = 0.0;
    double dL = 0.0;
    double dU = 0.0;
};

Discrepancy dependence_discrepancy(copula::Family family,
                                   const copula::ModelParams& fitted,
                                   const copula::ModelParams& truth,
                                   const std::vector<double>& distances,
                                   std::size_t n_mc, std::uint64_t seed,
                                   int threads = 0);

// Study-3 property run: fit N replicates and report per-replicate |Delta|s.
struct Study3Result {
    StudyResult fits;
    std::vector<Discrepancy> discrepancies;
    Discrepancy mean;
};
Study3Result study3_discrepancy(const StudyConfig& cfg, std::size_t n_mc = 100000);

// ---------------------------------------------------------------------------
// Section-5-style pipeline on a station table.
// ---------------------------------------------------------------------------

enum class NegateMode { automatic, on, off };

struct PipelineConfig {
    std::vector<copula::Family> families = {copula::Family::M1_gaussian,
                                            copula::Family::M3_maxconv,
                                            copula::Family::M4_mix_gaussian};
    int splits = 10;
    double train_lo = 0.70, train_hi = 0.90;  // train-station fraction range
    double d_max = 0.5;                       // fit cutoff, distance units
    std::vector<double> bin_edges = {0.2, 0.4};  // discrepancy bins (right-open)
    data::DistanceMode dist_mode = data::DistanceMode::euclidean;
    NegateMode negate = NegateMode::automatic;
    int harmonics = 2;
    int quad_order = 25;
    int threads = 0;
    std::size_t mc_pairs = 20000;
    std::uint64_t seed = 7;
    int tail_power = 6;
};

struct PipelineResult {
    struct BinRow {
        double dS = 0.0, dL = 0.0, dU = 0.0;  // mean(empirical - model)
        std::size_t pairs = 0;
    };
    std::map<std::string, std::vector<BinRow>> per_bin;  // family -> per bin
    std::map<std::string, double> aggregate;             // mean |Delta| overall
    std::map<std::string, std::map<std::string, double>> estimates;
    bool negated = false;
    std::size_t dropped_rows = 0;

    std::string to_csv(const std::vector<double>& bin_edges) const;
};

PipelineResult run_pipeline(const data::StationTable& table, const PipelineConfig& cfg);

// Pairwise empirical dependence table binned by distance (data summary),
// columns: bin, S_rho, rho_L, rho_U, rho_N, lambda_hat(level).
struct SummaryBin {
    double lo, hi;
    std::size_t pairs = 0;
    double S = 0.0, rhoL = 0.0, rhoU = 0.0, rhoN = 0.0;
};
std::vector<SummaryBin> binned_dependence(const measures::PseudoObservations& u,
                                          const Matrix& dist,
                                          const std::vector<double>& edges,
                                          int tail_power = 6);

}  // namespace maxconv::studies

#endif
