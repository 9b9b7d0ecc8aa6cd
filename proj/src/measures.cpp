#include "maxconv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "maxconv/errors.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/rng.hpp"

namespace maxconv::measures {

std::vector<double> average_ranks(const std::vector<double>& col) {
    const std::size_t n = col.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && col[idx[j + 1]] == col[idx[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // ranks are 1-based
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

PseudoObservations rank_transform(const Matrix& data) {
    if (data.n < 2) throw std::invalid_argument("rank_transform: need n >= 2");
    PseudoObservations out;
    out.values = Matrix(data.n, data.p);
    for (std::size_t j = 0; j < data.p; ++j) {
        const auto col = data.column(j);
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        if (*mn == *mx)
            throw data_error("rank_transform: constant column " + std::to_string(j));
        const auto r = average_ranks(col);
        for (std::size_t i = 0; i < data.n; ++i)
            out.values.at(i, j) = r[i] / (data.n + 1.0);
    }
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw data_error("pearson: degenerate (zero-variance) input");
    return sab / std::sqrt(saa * sbb);
}

double spearman_of_sample(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

double empirical_spearman(const PseudoObservations& u, std::size_t j1, std::size_t j2) {
    if (u.values.n < 3) throw std::invalid_argument("empirical_spearman: need n >= 3");
    return pearson(u.values.column(j1), u.values.column(j2));
}

double empirical_lambda(const PseudoObservations& u, std::size_t j1, std::size_t j2,
                        double level, Tail tail) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("empirical_lambda: level must be in (0,1)");
    const auto c1 = u.values.column(j1);
    const auto c2 = u.values.column(j2);
    std::size_t joint = 0, marg = 0;
    for (std::size_t i = 0; i < c1.size(); ++i) {
        const bool e1 = tail == Tail::upper ? c1[i] > level : c1[i] < 1.0 - level;
        const bool e2 = tail == Tail::upper ? c2[i] > level : c2[i] < 1.0 - level;
        if (e2) {
            ++marg;
            if (e1) ++joint;
        }
    }
    if (marg < 20)
        throw data_error("empirical_lambda: fewer than 20 exceedances at level " +
                         std::to_string(level));
    return static_cast<double>(joint) / static_cast<double>(marg);
}

double tail_weighted(const PseudoObservations& u, std::size_t j1, std::size_t j2,
                     Tail tail, int power) {
    if (u.values.n < 50) throw std::invalid_argument("tail_weighted: need n >= 50");
    if (power < 1) throw data_error("tail_weighted: power must be >= 1 (k = 0 is degenerate)");
    auto c1 = u.values.column(j1);
    auto c2 = u.values.column(j2);
    for (auto* c : {&c1, &c2})
        for (auto& x : *c)
            x = tail == Tail::upper ? std::pow(x, power) : std::pow(1.0 - x, power);
    return pearson(c1, c2);
}

double gaussian_reference(const PseudoObservations& u, std::size_t j1, std::size_t j2,
                          int power, std::size_t n_sim, std::uint64_t seed) {
    const double s = empirical_spearman(u, j1, j2);
    const double rho = 2.0 * std::sin(M_PI * s / 6.0);
    Rng rng(seed);
    Matrix sim(n_sim, 2);
    const double sc = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i < n_sim; ++i) {
        const double g1 = rng.normal();
        const double g2 = rho * g1 + sc * rng.normal();
        sim.at(i, 0) = numerics::norm_cdf(g1);
        sim.at(i, 1) = numerics::norm_cdf(g2);
    }
    PseudoObservations ps;
    ps.values = std::move(sim);
    // the Gaussian copula is tail-symmetric; the upper-tail value is the shared one
    return tail_weighted(ps, 0, 1, Tail::upper, power);
}

}  // namespace maxconv::measures
