#include "maxconv/studies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "maxconv/errors.hpp"
#include "maxconv/parallel.hpp"
#include "maxconv/simulate.hpp"

namespace maxconv::studies {

using copula::Family;
using copula::ModelParams;
using measures::PseudoObservations;

copula::ModelParams study_truth(int id) {
    ModelParams mp;
    mp.rL = 0.0;
    mp.rU = 0.4;
    mp.theta_R = 0.25;
    if (id >= 2) {
        mp.theta_Y = 0.5;
        mp.alpha_Y = 1.0;
        mp.q = 0.2;
    }
    if (id == 3) {
        mp.nu = 3.0;
        mp.beta = 1.2;
    }
    return mp;
}

fit::FitSpec study_fit_spec(int id, int quad_order) {
    fit::FitSpec s = fit::default_fit_spec(
        id == 1 ? Family::M3_maxconv
                : (id == 2 ? Family::M4_mix_gaussian : Family::M5_mix_student));
    s.quad_order = quad_order;
    s.threads = 1;  // replicates parallelize one level up
    return s;
}

double study_cutoff(int id) { return id == 3 ? 0.5 : 0.25; }

namespace {

Family study_family(int id) {
    return id == 1 ? Family::M3_maxconv
                   : (id == 2 ? Family::M4_mix_gaussian : Family::M5_mix_student);
}

// one simulated dataset of the study's generating model
PseudoObservations simulate_dataset(int id, const ModelParams& truth, std::size_t p,
                                    std::size_t n, std::uint64_t seed,
                                    std::uint64_t stream, rf::SiteSet& sites_out) {
    Rng rng(seed, stream);
    sites_out = rf::SiteSet::random_uniform(p, 0.0, 1.0, rng);
    Matrix raw(n, p);
    if (id == 1) {
        const sim::DiskModelParams dp{copula::radius_spec(truth)};
        const auto grid = sim::make_grid(sites_out, dp.radius.rU);
        const sim::RasterSimulator s(sites_out, dp, grid);
        for (std::size_t i = 0; i < n; ++i) {
            const auto z = s.replicate(rng);
            for (std::size_t j = 0; j < p; ++j) raw.at(i, j) = z[j];
        }
    } else {
        const auto mp = copula::mixture_params(truth, study_family(id));
        const auto grid = sim::make_grid(sites_out, mp.radius.rU);
        const sim::MixtureSimulator s(sites_out, mp, grid);
        for (std::size_t i = 0; i < n; ++i) {
            const auto z = s.replicate(rng);
            for (std::size_t j = 0; j < p; ++j) raw.at(i, j) = z[j];
        }
    }
    return measures::rank_transform(raw);
}

}  // namespace

StudyResult replicate_study(const StudyConfig& cfg) {
    if (cfg.id < 1 || cfg.id > 3)
        throw std::invalid_argument("replicate_study: study id must be 1, 2 or 3");
    const ModelParams truth = study_truth(cfg.id);
    const fit::FitSpec spec = study_fit_spec(cfg.id, cfg.quad_order);
    const double d_max = cfg.d_max > 0.0 ? cfg.d_max : study_cutoff(cfg.id);
    const fit::PairWeightRule weights{d_max, 1.0};

    StudyResult res;
    for (const auto& ps : spec.params)
        if (!ps.fixed) res.param_names.push_back(ps.name);
    for (const auto& name : res.param_names) {
        ModelParams t = truth;
        (void)t;
        if (name == "r") res.true_values.push_back(truth.rU);
        else if (name == "theta_R") res.true_values.push_back(truth.theta_R);
        else if (name == "theta_Y") res.true_values.push_back(truth.theta_Y);
        else if (name == "beta") res.true_values.push_back(truth.beta);
        else if (name == "q") res.true_values.push_back(truth.q);
        else res.true_values.push_back(0.0);
    }
    res.estimates.assign(cfg.replicates, {});
    res.converged.assign(cfg.replicates, false);

    parallel_for(cfg.replicates, [&](std::size_t r) {
        rf::SiteSet sites;
        const auto u = simulate_dataset(cfg.id, truth, cfg.p, cfg.n, cfg.seed,
                                        1000 + r, sites);
        const Matrix dist = fit::distance_matrix(sites);
        const auto fr = fit::fit_model(u, dist, spec, weights, cfg.seed + r);
        std::vector<double> est;
        for (const auto& name : res.param_names) est.push_back(fr.estimates.at(name));
        res.estimates[r] = std::move(est);
        res.converged[r] = fr.converged;
    }, cfg.threads);

    res.rmse.assign(res.param_names.size(), 0.0);
    for (const auto& est : res.estimates)
        for (std::size_t k = 0; k < est.size(); ++k) {
            const double e = est[k] - res.true_values[k];
            res.rmse[k] += e * e;
        }
    for (auto& v : res.rmse) v = std::sqrt(v / cfg.replicates);
    return res;
}

std::string StudyResult::to_csv() const {
    std::ostringstream os;
    os << "replicate";
    for (const auto& n : param_names) os << "," << n;
    os << ",converged\n";
    os << "truth";
    for (double v : true_values) os << "," << v;
    os << ",\n";
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        os << r;
        for (double v : estimates[r]) os << "," << v;
        os << "," << (converged[r] ? 1 : 0) << "\n";
    }
    os << "rmse";
    for (double v : rmse) os << "," << v;
    os << ",\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// dependence discrepancies via pair Monte Carlo
// ---------------------------------------------------------------------------

namespace {

// uniform-scale pair sample from a fitted family at one distance
void sample_pair_uniform(Family fam, const ModelParams& mp, double h, std::size_t n,
                         Rng& rng, std::vector<double>& u1, std::vector<double>& u2) {
    u1.resize(n);
    u2.resize(n);
    switch (fam) {
        case Family::M1_gaussian: {
            const rf::CovarianceSpec cov{rf::CovFamily::powered_exponential, mp.theta,
                                         mp.alpha};
            const double rho = cov.rho(h);
            const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
            for (std::size_t i = 0; i < n; ++i) {
                const double g1 = rng.normal();
                const double g2 = rho * g1 + s * rng.normal();
                u1[i] = numerics::norm_cdf(g1);
                u2[i] = numerics::norm_cdf(g2);
            }
            break;
        }
        case Family::M2_student: {
            const rf::CovarianceSpec cov{rf::CovFamily::powered_exponential, mp.theta,
                                         mp.alpha};
            const double rho = cov.rho(h);
            const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
            for (std::size_t i = 0; i < n; ++i) {
                const double g1 = rng.normal();
                const double g2 = rho * g1 + s * rng.normal();
                const double mix = std::sqrt(rng.chi_squared(mp.nu) / mp.nu);
                u1[i] = numerics::student_t_cdf(g1 / mix, mp.nu);
                u2[i] = numerics::student_t_cdf(g2 / mix, mp.nu);
            }
            break;
        }
        case Family::M3_maxconv: {
            const sim::PairSampler ps(h, copula::radius_spec(mp));
            for (std::size_t i = 0; i < n; ++i) ps.draw_uniform(rng, u1[i], u2[i]);
            break;
        }
        default: {
            const sim::MixturePairSampler ps(h, copula::mixture_params(mp, fam));
            for (std::size_t i = 0; i < n; ++i) ps.draw_uniform(rng, u1[i], u2[i]);
        }
    }
}

struct PairStats {
    double S, rhoL, rhoU;
};

PairStats stats_of_sample(const std::vector<double>& u1, const std::vector<double>& u2,
                          int power) {
    PairStats st;
    st.S = measures::pearson(measures::average_ranks(u1), measures::average_ranks(u2));
    std::vector<double> a(u1.size()), b(u1.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        a[i] = std::pow(u1[i], power);
        b[i] = std::pow(u2[i], power);
    }
    st.rhoU = measures::pearson(a, b);
    for (std::size_t i = 0; i < u1.size(); ++i) {
        a[i] = std::pow(1.0 - u1[i], power);
        b[i] = std::pow(1.0 - u2[i], power);
    }
    st.rhoL = measures::pearson(a, b);
    return st;
}

PairStats model_pair_stats(Family fam, const ModelParams& mp, double h, std::size_t n,
                           std::uint64_t seed, std::uint64_t stream, int power) {
    std::vector<double> u1, u2;
    Rng rng(seed, stream);
    sample_pair_uniform(fam, mp, h, n, rng, u1, u2);
    return stats_of_sample(u1, u2, power);
}

}  // namespace

Discrepancy dependence_discrepancy(Family family, const ModelParams& fitted,
                                   const ModelParams& truth,
                                   const std::vector<double>& distances,
                                   std::size_t n_mc, std::uint64_t seed, int threads) {
    std::vector<Discrepancy> per(distances.size());
    parallel_for(distances.size(), [&](std::size_t k) {
        const auto a = model_pair_stats(family, fitted, distances[k], n_mc, seed,
                                        2 * k, 6);
        const auto b = model_pair_stats(family, truth, distances[k], n_mc, seed,
                                        2 * k + 1, 6);
        per[k] = {std::abs(a.S - b.S), std::abs(a.rhoL - b.rhoL),
                  std::abs(a.rhoU - b.rhoU)};
    }, threads);
    Discrepancy d;
    for (const auto& x : per) {
        d.dS += x.dS;
        d.dL += x.dL;
        d.dU += x.dU;
    }
    const double m = std::max<std::size_t>(1, per.size());
    d.dS /= m;
    d.dL /= m;
    d.dU /= m;
    return d;
}

Study3Result study3_discrepancy(const StudyConfig& cfg_in, std::size_t n_mc) {
    StudyConfig cfg = cfg_in;
    cfg.id = 3;
    Study3Result out;
    const ModelParams truth = study_truth(3);
    const fit::FitSpec spec = study_fit_spec(3, cfg.quad_order);
    const double d_max = cfg.d_max > 0.0 ? cfg.d_max : study_cutoff(3);
    const fit::PairWeightRule weights{d_max, 1.0};

    for (const auto& ps : spec.params)
        if (!ps.fixed) out.fits.param_names.push_back(ps.name);
    out.fits.true_values = {truth.rU, truth.theta_R, truth.theta_Y, truth.beta, truth.q};
    out.fits.estimates.assign(cfg.replicates, {});
    out.fits.converged.assign(cfg.replicates, false);
    out.discrepancies.assign(cfg.replicates, {});

    parallel_for(cfg.replicates, [&](std::size_t r) {
        rf::SiteSet sites;
        const auto u = simulate_dataset(3, truth, cfg.p, cfg.n, cfg.seed, 1000 + r, sites);
        const Matrix dist = fit::distance_matrix(sites);
        const auto fr = fit::fit_model(u, dist, spec, weights, cfg.seed + r);
        std::vector<double> est;
        for (const auto& name : out.fits.param_names) est.push_back(fr.estimates.at(name));
        out.fits.estimates[r] = std::move(est);
        out.fits.converged[r] = fr.converged;
        // all distinct pairs of this replicate's layout
        std::vector<double> hs;
        for (std::size_t a = 0; a + 1 < sites.size(); ++a)
            for (std::size_t b = a + 1; b < sites.size(); ++b)
                hs.push_back(sites.dist(a, b));
        out.discrepancies[r] = dependence_discrepancy(
            Family::M5_mix_student, fr.model_params(), truth, hs, n_mc,
            cfg.seed + 777 + r, 1);
    }, cfg.threads);

    out.fits.rmse.assign(out.fits.param_names.size(), 0.0);
    for (const auto& est : out.fits.estimates)
        for (std::size_t k = 0; k < est.size(); ++k) {
            const double e = est[k] - out.fits.true_values[k];
            out.fits.rmse[k] += e * e;
        }
    for (auto& v : out.fits.rmse) v = std::sqrt(v / cfg.replicates);
    for (const auto& d : out.discrepancies) {
        out.mean.dS += d.dS / cfg.replicates;
        out.mean.dL += d.dL / cfg.replicates;
        out.mean.dU += d.dU / cfg.replicates;
    }
    return out;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

std::vector<SummaryBin> binned_dependence(const PseudoObservations& u, const Matrix& dist,
                                          const std::vector<double>& edges,
                                          int tail_power) {
    std::vector<SummaryBin> bins(edges.size() + 1);
    for (std::size_t b = 0; b <= edges.size(); ++b) {
        bins[b].lo = b == 0 ? 0.0 : edges[b - 1];
        bins[b].hi = b == edges.size() ? std::numeric_limits<double>::infinity()
                                       : edges[b];
    }
    const std::size_t p = u.values.p;
    for (std::size_t j1 = 0; j1 + 1 < p; ++j1) {
        for (std::size_t j2 = j1 + 1; j2 < p; ++j2) {
            const double h = dist.at(j1, j2);
            std::size_t b = 0;
            while (b < edges.size() && h >= edges[b]) ++b;
            bins[b].pairs++;
            bins[b].S += measures::empirical_spearman(u, j1, j2);
            bins[b].rhoL += measures::tail_weighted(u, j1, j2, measures::Tail::lower,
                                                    tail_power);
            bins[b].rhoU += measures::tail_weighted(u, j1, j2, measures::Tail::upper,
                                                    tail_power);
            bins[b].rhoN += measures::gaussian_reference(u, j1, j2, tail_power);
        }
    }
    for (auto& bin : bins)
        if (bin.pairs > 0) {
            bin.S /= bin.pairs;
            bin.rhoL /= bin.pairs;
            bin.rhoU /= bin.pairs;
            bin.rhoN /= bin.pairs;
        }
    return bins;
}

PipelineResult run_pipeline(const data::StationTable& table, const PipelineConfig& cfg) {
    PipelineResult out;
    const auto deseason = data::deseasonalize(table, cfg.harmonics);
    const auto resid = data::ar2_residuals(deseason);
    auto u = measures::rank_transform(resid.values);
    u.site_ids = resid.ids;

    data::StationTable rt = table;  // station coordinates for distances
    const Matrix dist = data::station_distances(rt, cfg.dist_mode);

    // negation: models capture upper-tail dependence, so lower-tail-heavy
    // data are flipped
    bool negate = cfg.negate == NegateMode::on;
    if (cfg.negate == NegateMode::automatic) {
        double rl = 0.0, ru = 0.0;
        std::size_t cnt = 0;
        const std::size_t p = u.values.p;
        for (std::size_t j1 = 0; j1 + 1 < p && cnt < 200; ++j1)
            for (std::size_t j2 = j1 + 1; j2 < p && cnt < 200; ++j2) {
                rl += measures::tail_weighted(u, j1, j2, measures::Tail::lower,
                                              cfg.tail_power);
                ru += measures::tail_weighted(u, j1, j2, measures::Tail::upper,
                                              cfg.tail_power);
                ++cnt;
            }
        negate = rl > ru;
    }
    if (negate)
        for (auto& v : u.values.v) v = 1.0 - v;
    out.negated = negate;

    const std::size_t p = u.values.p;
    struct Acc {
        double dS = 0.0, dL = 0.0, dU = 0.0;
        std::size_t cnt = 0;
    };
    std::map<std::string, std::vector<Acc>> acc;  // family -> bins
    const std::size_t nbins = cfg.bin_edges.size() + 1;
    for (const auto fam : cfg.families) acc[copula::family_name(fam)].resize(nbins);

    Rng split_rng(cfg.seed, 999);
    for (int s = 0; s < cfg.splits; ++s) {
        // random train subset of 70-90% of the stations
        const double frac = cfg.train_lo + (cfg.train_hi - cfg.train_lo) * split_rng.uniform();
        const std::size_t ntrain =
            std::clamp<std::size_t>(static_cast<std::size_t>(std::round(frac * p)), 2, p - 2);
        std::vector<std::size_t> perm(p);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = p - 1; i > 0; --i)
            std::swap(perm[i], perm[static_cast<std::size_t>(split_rng.next_u64() % (i + 1))]);
        std::vector<std::size_t> train(perm.begin(), perm.begin() + ntrain);
        std::vector<std::size_t> hold(perm.begin() + ntrain, perm.end());
        std::sort(train.begin(), train.end());
        std::sort(hold.begin(), hold.end());

        // train submatrices
        Matrix udtrain(u.values.n, ntrain), dtrain(ntrain, ntrain);
        for (std::size_t i = 0; i < u.values.n; ++i)
            for (std::size_t j = 0; j < ntrain; ++j)
                udtrain.at(i, j) = u.values.at(i, train[j]);
        for (std::size_t a = 0; a < ntrain; ++a)
            for (std::size_t b = 0; b < ntrain; ++b)
                dtrain.at(a, b) = dist.at(train[a], train[b]);
        PseudoObservations utrain;
        utrain.values = std::move(udtrain);

        for (const auto fam : cfg.families) {
            fit::FitSpec spec = fit::default_fit_spec(fam);
            spec.quad_order = cfg.quad_order;
            spec.threads = cfg.threads;
            const fit::PairWeightRule w{cfg.d_max, 1.0};
            const auto fr = fit::fit_model(utrain, dtrain, spec, w,
                                           cfg.seed + 31 * s);
            if (s == 0)
                out.estimates[copula::family_name(fam)] = fr.estimates;
            const ModelParams mp = fr.model_params();
            auto& rows = acc[copula::family_name(fam)];
            // holdout pairs
            for (std::size_t a = 0; a + 1 < hold.size(); ++a) {
                for (std::size_t b = a + 1; b < hold.size(); ++b) {
                    const std::size_t j1 = hold[a], j2 = hold[b];
                    const double h = dist.at(j1, j2);
                    std::size_t bin = 0;
                    while (bin < cfg.bin_edges.size() && h >= cfg.bin_edges[bin]) ++bin;
                    const double eS = measures::empirical_spearman(u, j1, j2);
                    const double eL = measures::tail_weighted(u, j1, j2,
                                                              measures::Tail::lower,
                                                              cfg.tail_power);
                    const double eU = measures::tail_weighted(u, j1, j2,
                                                              measures::Tail::upper,
                                                              cfg.tail_power);
                    const auto ms = model_pair_stats(
                        fam, mp, h, cfg.mc_pairs, cfg.seed + 7777,
                        10000 * s + 100 * j1 + j2, cfg.tail_power);
                    rows[bin].dS += eS - ms.S;
                    rows[bin].dL += eL - ms.rhoL;
                    rows[bin].dU += eU - ms.rhoU;
                    rows[bin].cnt++;
                }
            }
        }
    }

    for (const auto fam : cfg.families) {
        const std::string name = copula::family_name(fam);
        auto& rows = acc[name];
        auto& outrows = out.per_bin[name];
        outrows.resize(nbins);
        double agg = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b < nbins; ++b) {
            if (rows[b].cnt == 0) continue;
            outrows[b].dS = rows[b].dS / rows[b].cnt;
            outrows[b].dL = rows[b].dL / rows[b].cnt;
            outrows[b].dU = rows[b].dU / rows[b].cnt;
            outrows[b].pairs = rows[b].cnt;
            agg += std::abs(outrows[b].dS) + std::abs(outrows[b].dL) +
                   std::abs(outrows[b].dU);
            ++used;
        }
        out.aggregate[name] = used > 0 ? agg / (3.0 * used) : 0.0;
    }
    return out;
}

std::string PipelineResult::to_csv(const std::vector<double>& bin_edges) const {
    std::ostringstream os;
    os << "family,bin_lo,bin_hi,pairs,dS,dL,dU,aggregate\n";
    for (const auto& [name, rows] : per_bin) {
        for (std::size_t b = 0; b < rows.size(); ++b) {
            const double lo = b == 0 ? 0.0 : bin_edges[b - 1];
            const std::string hi = b == bin_edges.size()
                                       ? "inf"
                                       : std::to_string(bin_edges[b]);
            os << name << "," << lo << "," << hi << "," << rows[b].pairs << ","
               << rows[b].dS << "," << rows[b].dL << "," << rows[b].dU << ","
               << aggregate.at(name) << "\n";
        }
    }
    return os.str();
}

}  // namespace maxconv::studies
