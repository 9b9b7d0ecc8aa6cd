#include "maxconv/fit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "maxconv/errors.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/parallel.hpp"

namespace maxconv::fit {

using copula::Family;
using copula::ModelParams;
using measures::PseudoObservations;

PairWeightRule default_weights(double d_max) {
    if (!(d_max > 0.0)) throw std::invalid_argument("default_weights: d_max must be > 0");
    return PairWeightRule{d_max};
}

double to_unconstrained(const ParamSpec& p, double x) {
    if (p.transform == Transform::log_positive) return std::log(x);
    const double v = (x - p.lo) / (p.hi - p.lo);
    const double vc = std::clamp(v, 1e-15, 1.0 - 1e-15);
    return std::log(vc / (1.0 - vc));
}

double from_unconstrained(const ParamSpec& p, double t) {
    if (p.transform == Transform::log_positive) return std::exp(t);
    const double v = 1.0 / (1.0 + std::exp(-t));
    return p.lo + (p.hi - p.lo) * v;
}

FitSpec default_fit_spec(Family family) {
    FitSpec s;
    s.family = family;
    auto logp = [](const std::string& n, double lo, double hi, double init) {
        return ParamSpec{n, lo, hi, Transform::log_positive, false, init};
    };
    auto logit = [](const std::string& n, double lo, double hi, double init) {
        return ParamSpec{n, lo, hi, Transform::logit_interval, false, init};
    };
    auto fixed = [](const std::string& n, double v) {
        return ParamSpec{n, 0.0, 0.0, Transform::log_positive, true, v};
    };
    switch (family) {
        case Family::M1_gaussian:
            s.params = {logp("theta", 0.01, 10.0, 0.5), logit("alpha", 0.0, 2.0, 1.0)};
            break;
        case Family::M2_student:
            s.params = {logp("theta", 0.01, 10.0, 0.5), logit("alpha", 0.0, 2.0, 1.0),
                        fixed("nu", 4.0)};
            break;
        case Family::M3_maxconv:
            s.params = {logp("r", 0.02, 2.0, 0.4), logp("theta_R", 0.01, 5.0, 0.25),
                        fixed("rL", 0.0)};
            break;
        case Family::M4_mix_gaussian:
            s.params = {logp("r", 0.02, 2.0, 0.4), logp("theta_R", 0.01, 5.0, 0.25),
                        logp("theta_Y", 0.01, 5.0, 0.5), logit("q", 0.0, 1.0, 0.2),
                        fixed("rL", 0.0), fixed("alpha_Y", 1.0)};
            break;
        default:
            s.params = {logp("r", 0.02, 2.0, 0.4), logp("theta_R", 0.01, 5.0, 0.25),
                        logp("theta_Y", 0.01, 5.0, 0.5), logp("beta", 0.05, 25.0, 1.2),
                        logit("q", 0.0, 1.0, 0.2), fixed("rL", 0.0),
                        fixed("alpha_Y", 1.0), fixed("nu", 3.0)};
    }
    return s;
}

namespace {

void set_param(ModelParams& mp, const std::string& name, double v) {
    if (name == "theta") mp.theta = v;
    else if (name == "alpha") mp.alpha = v;
    else if (name == "nu") mp.nu = v;
    else if (name == "r" || name == "rU") mp.rU = v;
    else if (name == "rL") mp.rL = v;
    else if (name == "theta_R") mp.theta_R = v;
    else if (name == "theta_Y") mp.theta_Y = v;
    else if (name == "alpha_Y") mp.alpha_Y = v;
    else if (name == "beta") mp.beta = v;
    else if (name == "q") mp.q = v;
    else throw std::invalid_argument("unknown parameter name: " + name);
}

}  // namespace

ModelParams assemble_params(const FitSpec& spec, const std::vector<double>& free_values) {
    ModelParams mp;
    std::size_t k = 0;
    for (const auto& p : spec.params) {
        if (p.fixed) {
            set_param(mp, p.name, p.value);
        } else {
            if (k >= free_values.size())
                throw std::invalid_argument("assemble_params: too few free values");
            set_param(mp, p.name, free_values[k++]);
        }
    }
    if (k != free_values.size())
        throw std::invalid_argument("assemble_params: too many free values");
    return mp;
}

ModelParams FitResult::model_params() const {
    ModelParams mp;
    for (const auto& [k, v] : fixed) set_param(mp, k, v);
    for (const auto& [k, v] : estimates) set_param(mp, k, v);
    return mp;
}

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["family"] = copula::family_name(family);
    j["estimates"] = estimates;
    j["fixed"] = fixed;
    j["objective"] = objective;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["evaluations"] = evaluations;
    j["seed"] = seed;
    j["weight_rule"] = {{"type", "distance-indicator"}, {"d_max", d_max}};
    j["message"] = message;
    nlohmann::json parr = nlohmann::json::array();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        parr.push_back({{"j1", pairs[k].first},
                        {"j2", pairs[k].second},
                        {"loglik", k < pair_contributions.size() ? pair_contributions[k] : 0.0}});
    }
    j["pairs"] = parr;
    return j.dump(2);
}

Matrix distance_matrix(const rf::SiteSet& sites) {
    const std::size_t p = sites.size();
    Matrix d(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) d.at(i, j) = sites.dist(i, j);
    return d;
}

PairGeometry retained_pairs(const Matrix& dist, const PairWeightRule& w) {
    PairGeometry g;
    for (std::size_t j1 = 0; j1 + 1 < dist.p; ++j1)
        for (std::size_t j2 = j1 + 1; j2 < dist.p; ++j2)
            if (w.weight(dist.at(j1, j2)) > 0.0) {
                g.pairs.emplace_back(j1, j2);
                g.h.push_back(dist.at(j1, j2));
            }
    return g;
}

// ---------------------------------------------------------------------------
// tabulated Student-t distribution for the M2/M5 hot path
// ---------------------------------------------------------------------------

namespace {

class TDistTable {
public:
    explicit TDistTable(double nu) : nu_(nu) {
        // quantiles on a uniform log-odds grid
        qx0_ = std::log(1e-9 / (1.0 - 1e-9));
        qx1_ = -qx0_;
        qt_.resize(kN);
        for (int i = 0; i < kN; ++i) {
            const double x = qx0_ + (qx1_ - qx0_) * i / (kN - 1);
            const double v = 1.0 / (1.0 + std::exp(-x));
            qt_[i] = numerics::student_t_quantile(v, nu);
        }
        // cdf of nu and nu+1 on a uniform asinh grid
        cx0_ = std::asinh(qt_.front());
        cx1_ = std::asinh(qt_.back());
        c0_.resize(kN);
        c1_.resize(kN);
        for (int i = 0; i < kN; ++i) {
            const double t = std::sinh(cx0_ + (cx1_ - cx0_) * i / (kN - 1));
            c0_[i] = numerics::student_t_cdf(t, nu);
            c1_[i] = numerics::student_t_cdf(t, nu + 1.0);
        }
    }

    double nu() const { return nu_; }

    double quantile(double u) const {
        const double uc = std::clamp(u, 1e-9, 1.0 - 1e-9);
        const double x = std::log(uc / (1.0 - uc));
        return interp(qt_, qx0_, qx1_, x);
    }
    double cdf(double t) const {
        if (t <= qt_.front()) return 1e-9;
        if (t >= qt_.back()) return 1.0 - 1e-9;
        return interp(c0_, cx0_, cx1_, std::asinh(t));
    }
    double cdf_nu1(double t) const {
        if (t <= qt_.front()) return 0.0;
        if (t >= qt_.back()) return 1.0;
        return interp(c1_, cx0_, cx1_, std::asinh(t));
    }

private:
    static constexpr int kN = 8192;
    static double interp(const std::vector<double>& y, double x0, double x1, double x) {
        const double s = (x - x0) / (x1 - x0) * (kN - 1);
        const int i = std::clamp(static_cast<int>(s), 0, kN - 2);
        const double f = s - i;
        return y[i] * (1.0 - f) + y[i + 1] * f;
    }
    double nu_;
    double qx0_, qx1_, cx0_, cx1_;
    std::vector<double> qt_, c0_, c1_;
};

std::shared_ptr<const TDistTable> tdist_table(double nu) {
    static std::mutex mu;
    static std::unordered_map<double, std::shared_ptr<const TDistTable>> cache;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(nu);
    if (it != cache.end()) return it->second;
    auto ptr = std::make_shared<const TDistTable>(nu);
    cache[nu] = ptr;
    return ptr;
}

// fast bivariate t cdf: probability-space conditional quadrature on tables
double bvt_cdf_fast(const TDistTable& td, double t1, double t2, double rho,
                    const numerics::QuadratureRule& rule) {
    const double nu = td.nu();
    const double p1 = td.cdf(t1);
    const double plo = 1e-9;
    if (p1 <= plo) return 0.0;
    const double mid = 0.5 * (plo + p1), half = 0.5 * (p1 - plo);
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        const double v = mid + half * rule.nodes[i];
        const double t = td.quantile(v);
        const double s = numerics::bvt_cond_scale(t, rho, nu);
        acc += half * rule.weights[i] * td.cdf_nu1((t2 - rho * t) / s);
    }
    return acc;
}

// piecewise-linear inverse of the mixture marginal, Newton-polished
class MarginalInverter {
public:
    explicit MarginalInverter(const copula::MixtureMarginal& m) : m_(m) {
        us_.resize(kN);
        zs_.resize(kN);
        for (int i = 0; i < kN; ++i) {
            const double u = 1e-5 + (1.0 - 2e-5) * i / (kN - 1);
            us_[i] = u;
            zs_[i] = m.inv(u);
        }
    }
    double operator()(double u) const {
        const double uc = std::clamp(u, us_.front(), us_.back());
        auto it = std::lower_bound(us_.begin(), us_.end(), uc);
        std::size_t i = std::min<std::size_t>(
            us_.size() - 2, it == us_.begin() ? 0 : (it - us_.begin() - 1));
        const double f = (uc - us_[i]) / (us_[i + 1] - us_[i]);
        double z = zs_[i] * (1.0 - f) + zs_[i + 1] * f;
        for (int k = 0; k < 3; ++k) {
            const double r = m_.cdf(z) - u, d = m_.pdf(z);
            if (d <= 0.0) break;
            z -= r / d;
        }
        return z;
    }

private:
    static constexpr int kN = 257;
    copula::MixtureMarginal m_;
    std::vector<double> us_, zs_;
};

constexpr double kFloor = 1e-300;

struct PairContext {
    const PseudoObservations& u;
    const PairGeometry& geom;
    const ModelParams& params;
    int order;
};

double gauss_pair_loglik(const PairContext& c, std::size_t k, const Matrix& z) {
    const rf::CovarianceSpec cov{rf::CovFamily::powered_exponential, c.params.theta,
                                 c.params.alpha};
    const double rho = std::clamp(cov.rho(c.geom.h[k]), -1.0 + 1e-9, 1.0 - 1e-9);
    const auto [j1, j2] = c.geom.pairs[k];
    const double s2 = 1.0 - rho * rho;
    double acc = 0.0;
    for (std::size_t i = 0; i < z.n; ++i) {
        const double z1 = z.at(i, j1), z2 = z.at(i, j2);
        acc += -0.5 * std::log(s2) -
               (rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2) / (2.0 * s2);
    }
    return acc;
}

double student_pair_loglik(const PairContext& c, std::size_t k, const Matrix& t) {
    const rf::CovarianceSpec cov{rf::CovFamily::powered_exponential, c.params.theta,
                                 c.params.alpha};
    const double rho = std::clamp(cov.rho(c.geom.h[k]), -1.0 + 1e-9, 1.0 - 1e-9);
    const double nu = c.params.nu;
    const auto [j1, j2] = c.geom.pairs[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < t.n; ++i) {
        const double t1 = t.at(i, j1), t2 = t.at(i, j2);
        const double num = numerics::bvt_pdf(t1, t2, rho, nu);
        const double den =
            numerics::student_t_pdf(t1, nu) * numerics::student_t_pdf(t2, nu);
        acc += std::log(std::max(num / den, kFloor));
    }
    return acc;
}

double m3_pair_loglik(const PairContext& c, std::size_t k) {
    const copula::FastDiskEval fde(copula::radius_spec(c.params), c.geom.h[k], c.order);
    const auto [j1, j2] = c.geom.pairs[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < c.u.values.n; ++i) {
        const double v = fde.pdf(c.u.values.at(i, j1), c.u.values.at(i, j2));
        if (std::isnan(v)) {
            std::ostringstream os;
            os << "pairwise_loglik: non-finite density, pair (" << j1 << "," << j2
               << "), row " << i;
            throw numeric_error(os.str());
        }
        acc += std::log(std::max(v, kFloor));
    }
    return acc;
}

struct MixRows {
    Matrix z;        // marginal quantiles
    Matrix logf;     // log marginal density
    Matrix a;        // exp(-q/z)
    Matrix da;       // d/dz exp(-q/z)
    Matrix y;        // z/(1-q)
    Matrix t;        // companion t-quantiles (M5 only)
};

double mix_pair_loglik(const PairContext& c, std::size_t k, const MixRows& rows,
                       bool student, const copula::MixtureParams& mp,
                       const TDistTable* td, const numerics::QuadratureRule& bvrule) {
    const double h = c.geom.h[k];
    const copula::FastDiskEval fde(mp.radius, h, c.order);
    const double rho = std::clamp(mp.companion.cov.rho(h), -1.0 + 1e-9, 1.0 - 1e-9);
    const double s = std::sqrt(1.0 - rho * rho);
    const double q = mp.q;
    const double omq = 1.0 - q;
    const auto [j1, j2] = c.geom.pairs[k];
    const double nu = mp.companion.nu;
    double acc = 0.0;
    for (std::size_t i = 0; i < c.u.values.n; ++i) {
        const auto ev = fde.eval(rows.a.at(i, j1), rows.a.at(i, j2));
        const double da1 = rows.da.at(i, j1), da2 = rows.da.at(i, j2);
        const double y1 = rows.y.at(i, j1), y2 = rows.y.at(i, j2);
        double B, B1, B2, B12;
        if (!student) {
            B = numerics::bvn_cdf(y1, y2, rho);
            B1 = numerics::norm_pdf(y1) * numerics::norm_cdf((y2 - rho * y1) / s) / omq;
            B2 = numerics::norm_pdf(y2) * numerics::norm_cdf((y1 - rho * y2) / s) / omq;
            B12 = numerics::bvn_pdf(y1, y2, rho) / (omq * omq);
        } else {
            const double t1 = rows.t.at(i, j1), t2 = rows.t.at(i, j2);
            B = bvt_cdf_fast(*td, t1, t2, rho, bvrule);
            const double sc1 = numerics::bvt_cond_scale(t1, rho, nu);
            const double sc2 = numerics::bvt_cond_scale(t2, rho, nu);
            const double fY1 = mp.companion.marginal_pdf(y1);
            const double fY2 = mp.companion.marginal_pdf(y2);
            B1 = td->cdf_nu1((t2 - rho * t1) / sc1) * fY1 / omq;
            B2 = td->cdf_nu1((t1 - rho * t2) / sc2) * fY2 / omq;
            const double ct = numerics::bvt_pdf(t1, t2, rho, nu) /
                              (numerics::student_t_pdf(t1, nu) *
                               numerics::student_t_pdf(t2, nu));
            B12 = ct * fY1 * fY2 / (omq * omq);
        }
        const double f2 = ev.pdf * da1 * da2 * B + ev.d1 * da1 * B2 +
                          ev.d2 * da2 * B1 + ev.cdf * B12;
        const double logden = rows.logf.at(i, j1) + rows.logf.at(i, j2);
        if (std::isnan(f2)) {
            std::ostringstream os;
            os << "pairwise_loglik: non-finite mixture density, pair (" << j1 << ","
               << j2 << "), row " << i;
            throw numeric_error(os.str());
        }
        acc += std::log(std::max(f2, kFloor)) - logden;
    }
    return acc;
}

}  // namespace

double pairwise_loglik(const PseudoObservations& u, const Matrix& dist, Family family,
                       const ModelParams& params, const PairWeightRule& weights,
                       int quad_order, int threads,
                       std::vector<double>* pair_contrib) {
    const PairGeometry geom = retained_pairs(dist, weights);
    if (geom.pairs.empty())
        throw data_error("pairwise_loglik: all pair weights are zero (empty likelihood)");
    const PairContext ctx{u, geom, params, quad_order};
    const std::size_t n = u.values.n, p = u.values.p;
    std::vector<double> contrib(geom.pairs.size(), 0.0);

    if (family == Family::M1_gaussian || family == Family::M2_student) {
        Matrix z(n, p);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j)
                z.at(i, j) = family == Family::M1_gaussian
                                 ? numerics::norm_quantile(u.values.at(i, j))
                                 : numerics::student_t_quantile(u.values.at(i, j),
                                                                params.nu);
        parallel_for(geom.pairs.size(), [&](std::size_t k) {
            contrib[k] = family == Family::M1_gaussian ? gauss_pair_loglik(ctx, k, z)
                                                       : student_pair_loglik(ctx, k, z);
        }, threads);
    } else if (family == Family::M3_maxconv) {
        parallel_for(geom.pairs.size(),
                     [&](std::size_t k) { contrib[k] = m3_pair_loglik(ctx, k); },
                     threads);
    } else {
        const bool student = family == Family::M5_mix_student;
        const copula::MixtureParams mp = copula::mixture_params(params, family);
        copula::validate(mp);
        copula::MixtureMarginal marg{mp.q, mp.companion};
        const MarginalInverter inv(marg);
        MixRows rows{Matrix(n, p), Matrix(n, p), Matrix(n, p), Matrix(n, p),
                     Matrix(n, p), student ? Matrix(n, p) : Matrix()};
        std::shared_ptr<const TDistTable> td;
        if (student) td = tdist_table(mp.companion.nu);
        const double q = mp.q, omq = 1.0 - mp.q;
        parallel_for(n, [&](std::size_t i) {
            for (std::size_t j = 0; j < p; ++j) {
                const double z = inv(u.values.at(i, j));
                rows.z.at(i, j) = z;
                rows.logf.at(i, j) = std::log(std::max(marg.pdf(z), kFloor));
                const double a = std::exp(-q / z);
                rows.a.at(i, j) = a;
                rows.da.at(i, j) = a * q / (z * z);
                const double y = z / omq;
                rows.y.at(i, j) = y;
                if (student)
                    rows.t.at(i, j) = td->quantile(mp.companion.marginal_cdf(y));
            }
        }, threads);
        const auto bvrule = numerics::gauss_legendre(48);
        parallel_for(geom.pairs.size(), [&](std::size_t k) {
            contrib[k] = mix_pair_loglik(ctx, k, rows, student, mp, td.get(), bvrule);
        }, threads);
    }

    // fixed-order reduction keeps the sum bit-reproducible
    double total = 0.0;
    for (std::size_t k = 0; k < contrib.size(); ++k) {
        contrib[k] *= weights.weight(geom.h[k]);
        total += contrib[k];
    }
    if (pair_contrib) *pair_contrib = contrib;
    return total;
}

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& x0, double step, double tol,
                     int max_iter) {
    const std::size_t d = x0.size();
    NmResult res;
    std::vector<std::vector<double>> x(d + 1, x0);
    std::vector<double> fx(d + 1);
    for (std::size_t i = 0; i < d; ++i) x[i + 1][i] += step;
    int evals = 0;
    auto eval = [&](const std::vector<double>& v) {
        ++evals;
        return f(v);
    };
    for (std::size_t i = 0; i <= d; ++i) fx[i] = eval(x[i]);
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        // order: best first
        std::vector<std::size_t> idx(d + 1);
        for (std::size_t i = 0; i <= d; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> xs(d + 1);
        std::vector<double> fs(d + 1);
        for (std::size_t i = 0; i <= d; ++i) {
            xs[i] = x[idx[i]];
            fs[i] = fx[idx[i]];
        }
        x.swap(xs);
        fx.swap(fs);
        if (std::abs(fx[d] - fx[0]) <= tol * (std::abs(fx[0]) + tol)) {
            res.converged = true;
            break;
        }
        std::vector<double> c(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c[j] += x[i][j] / d;
        auto blend = [&](double coef) {
            std::vector<double> v(d);
            for (std::size_t j = 0; j < d; ++j) v[j] = c[j] + coef * (c[j] - x[d][j]);
            return v;
        };
        const auto xr = blend(1.0);
        const double fr = eval(xr);
        if (fr < fx[0]) {
            const auto xe = blend(2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                x[d] = xe;
                fx[d] = fe;
            } else {
                x[d] = xr;
                fx[d] = fr;
            }
        } else if (fr < fx[d - 1]) {
            x[d] = xr;
            fx[d] = fr;
        } else {
            const bool outside = fr < fx[d];
            const auto xc = blend(outside ? 0.5 : -0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, fx[d])) {
                x[d] = xc;
                fx[d] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t j = 0; j < d; ++j)
                        x[i][j] = x[0][j] + 0.5 * (x[i][j] - x[0][j]);
                    fx[i] = eval(x[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (fx[i] < fx[best]) best = i;
    res.x = x[best];
    res.f = fx[best];
    res.iterations = iter;
    res.evaluations = evals;
    return res;
}

// ---------------------------------------------------------------------------
// fit_model
// ---------------------------------------------------------------------------

FitResult fit_model(const PseudoObservations& u, const Matrix& dist, const FitSpec& spec,
                    const PairWeightRule& weights, std::uint64_t seed) {
    if (u.values.n < 30)
        throw std::invalid_argument("fit_model: need at least 30 replicates");
    std::vector<const ParamSpec*> free;
    for (const auto& p : spec.params)
        if (!p.fixed) free.push_back(&p);
    if (free.empty()) throw std::invalid_argument("fit_model: no free parameters");

    auto objective = [&](const std::vector<double>& t) -> double {
        std::vector<double> raw(free.size());
        for (std::size_t i = 0; i < free.size(); ++i)
            raw[i] = from_unconstrained(*free[i], t[i]);
        try {
            const ModelParams mp = assemble_params(spec, raw);
            return -pairwise_loglik(u, dist, spec.family, mp, weights, spec.quad_order,
                                    spec.threads);
        } catch (const data_error&) {
            throw;  // empty likelihood is a caller error, not a bad move
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    // three deterministic starts: box midpoint and +-0.5 half-width
    std::vector<std::vector<double>> starts;
    for (const double shift : {0.0, +0.5, -0.5}) {
        std::vector<double> t(free.size());
        for (std::size_t i = 0; i < free.size(); ++i) {
            const auto& p = *free[i];
            const double mid = 0.5 * (p.lo + p.hi);
            const double hw = 0.5 * (p.hi - p.lo);
            double x = mid + shift * hw;
            const double margin = 1e-3 * (p.hi - p.lo);
            x = std::clamp(x, p.lo + margin, p.hi - margin);
            t[i] = to_unconstrained(p, x);
        }
        starts.push_back(std::move(t));
    }

    FitResult out;
    out.family = spec.family;
    out.seed = seed;
    out.d_max = weights.d_max;
    double best = std::numeric_limits<double>::infinity();
    NmResult bestnm;
    bool any_converged = false;
    for (std::size_t s = 0; s < starts.size() && s < static_cast<std::size_t>(spec.starts); ++s) {
        const auto nm = nelder_mead(objective, starts[s], 0.5, spec.tolerance,
                                    spec.max_iterations);
        out.iterations += nm.iterations;
        out.evaluations += nm.evaluations;
        if (nm.converged) any_converged = true;
        if ((nm.converged && !bestnm.converged) ||
            (nm.converged == bestnm.converged && nm.f < best) ||
            (bestnm.x.empty())) {
            best = nm.f;
            bestnm = nm;
        }
    }
    out.converged = any_converged;
    if (!any_converged) out.message = "no start converged within the iteration budget";

    std::vector<double> raw(free.size());
    for (std::size_t i = 0; i < free.size(); ++i) {
        raw[i] = from_unconstrained(*free[i], bestnm.x[i]);
        out.estimates[free[i]->name] = raw[i];
    }
    for (const auto& p : spec.params)
        if (p.fixed) out.fixed[p.name] = p.value;
    const ModelParams mp = assemble_params(spec, raw);
    const PairGeometry geom = retained_pairs(dist, weights);
    out.pairs = geom.pairs;
    out.objective = pairwise_loglik(u, dist, spec.family, mp, weights, spec.quad_order,
                                    spec.threads, &out.pair_contributions);
    return out;
}

}  // namespace maxconv::fit
