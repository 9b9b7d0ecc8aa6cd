#ifndef MAXCONV_MEASURES_HPP
#define MAXCONV_MEASURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "maxconv/matrix.hpp"

namespace maxconv::measures {

enum class Tail { upper, lower };

// Rank-transformed data on the (0,1) scale: u_ij = rank_ij / (n+1).
struct PseudoObservations {
    Matrix values;                      // entries in (0,1)
    std::vector<std::string> site_ids;  // optional, column labels
};

// Average-rank transform per column. Throws data_error on a constant column.
PseudoObservations rank_transform(const Matrix& data);

// Sample correlation of two rank columns.
double empirical_spearman(const PseudoObservations& u, std::size_t j1, std::size_t j2);

// Conditional exceedance ratio at the level; lower tail mirrors with
// thresholds 1 - level. Requires at least 20 marginal exceedances.
double empirical_lambda(const PseudoObservations& u, std::size_t j1, std::size_t j2,
                        double level, Tail tail);

// Correlation of tail-concentrating power transforms a(u) = u^k (upper)
// or (1-u)^k (lower). k >= 1; defaults to 6.
double tail_weighted(const PseudoObservations& u, std::size_t j1, std::size_t j2,
                     Tail tail, int power = 6);

// Gaussian-copula benchmark rho_N: match rho = 2 sin(pi S_rho / 6) from the
// empirical Spearman, simulate the Gaussian copula at that rho (fixed seed),
// and evaluate tail_weighted on the simulated sample.
double gaussian_reference(const PseudoObservations& u, std::size_t j1, std::size_t j2,
                          int power = 6, std::size_t n_sim = 100000,
                          std::uint64_t seed = 0x9d2c5680u);

// Helpers shared with the study/pipeline harnesses.
double pearson(const std::vector<double>& a, const std::vector<double>& b);
double spearman_of_sample(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> average_ranks(const std::vector<double>& col);  // scale 1..n

}  // namespace maxconv::measures

#endif
