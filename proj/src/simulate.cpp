#include "maxconv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "maxconv/errors.hpp"
#include "maxconv/geometry.hpp"
#include "maxconv/numerics.hpp"

namespace maxconv::sim {

RasterGrid make_grid(const rf::SiteSet& sites, double rU, int cells_per_radius) {
    if (sites.size() == 0) throw std::invalid_argument("make_grid: empty site set");
    if (!(rU > 0.0) || cells_per_radius < 1)
        throw std::invalid_argument("make_grid: bad rU or resolution");
    double xmin = sites.pts[0].x, xmax = xmin, ymin = sites.pts[0].y, ymax = ymin;
    for (const auto& p : sites.pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    RasterGrid g;
    g.cell = rU / cells_per_radius;
    g.x0 = xmin - rU;
    g.y0 = ymin - rU;
    g.nx = static_cast<int>(std::ceil((xmax + rU - g.x0) / g.cell)) + 1;
    g.ny = static_cast<int>(std::ceil((ymax + rU - g.y0) / g.cell)) + 1;
    return g;
}

RasterSimulator::RasterSimulator(const rf::SiteSet& sites, const DiskModelParams& params,
                                 const RasterGrid& grid)
    : sites_(sites), params_(params), grid_(grid), gp_(sites, params.radius.cov) {
    rf::validate(params.radius);
    if (grid.cell <= 0.0 || grid.nx < 2 || grid.ny < 2)
        throw std::invalid_argument("RasterSimulator: bad grid");
    if (params.radius.rL > 0.0) {
        const double cells_in_smallest =
            M_PI * params.radius.rL * params.radius.rL / (grid.cell * grid.cell);
        if (cells_in_smallest < 100.0)
            throw std::invalid_argument(
                "RasterSimulator: grid too coarse, smallest disk holds fewer "
                "than 100 cells");
    }
    // grid must cover every disk
    for (const auto& p : sites.pts) {
        if (p.x - params.radius.rU < grid.x0 - 1e-9 ||
            p.y - params.radius.rU < grid.y0 - 1e-9 ||
            p.x + params.radius.rU > grid.x0 + grid.nx * grid.cell + 1e-9 ||
            p.y + params.radius.rU > grid.y0 + grid.ny * grid.cell + 1e-9)
            throw std::invalid_argument("RasterSimulator: grid does not cover all disks");
    }
    site_cell_.resize(sites.size());
    for (std::size_t j = 0; j < sites.size(); ++j) {
        const int ix = static_cast<int>((sites.pts[j].x - grid.x0) / grid.cell);
        const int iy = static_cast<int>((sites.pts[j].y - grid.y0) / grid.cell);
        site_cell_[j] = iy * grid.nx + ix;
    }
}

std::vector<double> RasterSimulator::replicate(Rng& rng) const {
    std::vector<double> field;
    return replicate_field(rng, field);
}

std::vector<double> RasterSimulator::replicate_field(Rng& rng,
                                                     std::vector<double>& field) const {
    const auto g = gp_.draw(rng);
    const auto radii = rf::radius_from_gauss(params_.radius, g);
    const double area = grid_.cell * grid_.cell;
    field.resize(static_cast<std::size_t>(grid_.nx) * grid_.ny);
    for (auto& v : field) v = rng.frechet_sup(area);
    std::vector<double> z(sites_.size());
    for (std::size_t j = 0; j < sites_.size(); ++j) {
        const double R = radii[j];
        const double cx = sites_.pts[j].x, cy = sites_.pts[j].y;
        const int ix0 = std::max(0, static_cast<int>((cx - R - grid_.x0) / grid_.cell));
        const int ix1 = std::min(grid_.nx - 1,
                                 static_cast<int>((cx + R - grid_.x0) / grid_.cell) + 1);
        const int iy0 = std::max(0, static_cast<int>((cy - R - grid_.y0) / grid_.cell));
        const int iy1 = std::min(grid_.ny - 1,
                                 static_cast<int>((cy + R - grid_.y0) / grid_.cell) + 1);
        const double r2 = R * R;
        // every site sees at least the cell containing it
        double m = field[site_cell_[j]];
        for (int iy = iy0; iy <= iy1; ++iy) {
            const double dy = grid_.y0 + (iy + 0.5) * grid_.cell - cy;
            const double dy2 = dy * dy;
            if (dy2 > r2) continue;
            const double half = std::sqrt(r2 - dy2);
            int jx0 = std::max(ix0, static_cast<int>((cx - half - grid_.x0) / grid_.cell));
            int jx1 = std::min(ix1, static_cast<int>((cx + half - grid_.x0) / grid_.cell) + 1);
            const double* row = field.data() + static_cast<std::size_t>(iy) * grid_.nx;
            for (int ix = jx0; ix <= jx1; ++ix) {
                const double dx = grid_.x0 + (ix + 0.5) * grid_.cell - cx;
                if (dx * dx + dy2 <= r2) m = std::max(m, row[ix]);
            }
        }
        z[j] = m / (M_PI * r2);
    }
    return z;
}

std::vector<double> simulate_z(const rf::SiteSet& sites, const DiskModelParams& params,
                               const RasterGrid& grid, std::uint64_t seed,
                               std::uint64_t stream) {
    RasterSimulator s(sites, params, grid);
    Rng rng(seed, stream);
    return s.replicate(rng);
}

MixtureSimulator::MixtureSimulator(const rf::SiteSet& sites,
                                   const copula::MixtureParams& params,
                                   const RasterGrid& grid)
    : z_(sites, DiskModelParams{params.radius}, grid),
      params_(params),
      gpY_(sites, params.companion.cov) {
    copula::validate(params);
}

std::vector<double> MixtureSimulator::replicate(Rng& rng) const {
    auto z = z_.replicate(rng);
    const double q = params_.q;
    if (q >= 1.0) return z;
    auto g = gpY_.draw(rng);
    const auto y = rf::companion_from_gauss(params_.companion, g, rng);
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = std::max(q * z[j], (1.0 - q) * y[j]);
    return z;
}

std::vector<double> simulate_mixture(const rf::SiteSet& sites,
                                     const copula::MixtureParams& params,
                                     const RasterGrid& grid, std::uint64_t seed,
                                     std::uint64_t stream) {
    MixtureSimulator s(sites, params, grid);
    Rng rng(seed, stream);
    return s.replicate(rng);
}

// ---- exact pair samplers ----

PairSampler::PairSampler(double h, const rf::RadiusSpec& spec)
    : h_(h), rho_(spec.cov.rho(h)), spec_(spec) {
    rf::validate(spec);
    if (!(h >= 0.0)) throw std::invalid_argument("PairSampler: h must be >= 0");
}

void PairSampler::draw(Rng& rng, double& z1, double& z2) const {
    const double g1 = rng.normal();
    const double g2 = rho_ * g1 + std::sqrt(std::max(0.0, 1.0 - rho_ * rho_)) * rng.normal();
    const double w = spec_.rU - spec_.rL;
    const double r1 = spec_.rL + w * numerics::norm_cdf(g1);
    const double r2 = spec_.rL + w * numerics::norm_cdf(g2);
    const double a12 = geom::lens_area(r1, r2, h_);
    const double x1 = M_PI * r1 * r1 - a12;
    const double x2 = M_PI * r2 * r2 - a12;
    const double w12 = a12 > 0.0 ? rng.frechet_sup(a12) : 0.0;
    const double w1 = x1 > 0.0 ? rng.frechet_sup(x1) : 0.0;
    const double w2 = x2 > 0.0 ? rng.frechet_sup(x2) : 0.0;
    z1 = std::max(w1, w12) / (M_PI * r1 * r1);
    z2 = std::max(w2, w12) / (M_PI * r2 * r2);
}

void PairSampler::draw_uniform(Rng& rng, double& u1, double& u2) const {
    double z1, z2;
    draw(rng, z1, z2);
    u1 = std::exp(-1.0 / z1);
    u2 = std::exp(-1.0 / z2);
}

MixturePairSampler::MixturePairSampler(double h, const copula::MixtureParams& params)
    : zpair_(h, params.radius), params_(params),
      rhoY_(params.companion.cov.rho(h)) {
    copula::validate(params);
    marg_.q = params.q;
    marg_.companion = params.companion;
}

void MixturePairSampler::draw(Rng& rng, double& z1, double& z2) const {
    double a, b;
    zpair_.draw(rng, a, b);
    const double q = params_.q;
    if (q >= 1.0) {
        z1 = a;
        z2 = b;
        return;
    }
    const double g1 = rng.normal();
    const double g2 = rhoY_ * g1 + std::sqrt(std::max(0.0, 1.0 - rhoY_ * rhoY_)) * rng.normal();
    double y1 = g1, y2 = g2;
    if (params_.companion.family == rf::CompanionFamily::student_t_frechet) {
        const double nu = params_.companion.nu;
        const double mix = std::sqrt(rng.chi_squared(nu) / nu);
        const double beta = params_.companion.beta;
        auto push = [&](double g) {
            const double u = numerics::student_t_cdf(g / mix, nu);
            const double uc = std::clamp(u, 1e-300, 1.0 - 1e-16);
            return std::pow(-std::log(uc), -1.0 / beta);
        };
        y1 = push(g1);
        y2 = push(g2);
    }
    z1 = std::max(q * a, (1.0 - q) * y1);
    z2 = std::max(q * b, (1.0 - q) * y2);
}

void MixturePairSampler::draw_uniform(Rng& rng, double& u1, double& u2) const {
    double z1, z2;
    draw(rng, z1, z2);
    u1 = marg_.cdf(z1);
    u2 = marg_.cdf(z2);
}

// ---- generic Monte Carlo evaluators ----

double generic_bivariate_cdf(double z1, double z2, const ScaleFn& h_fn,
                             const AreaSource& sampler, std::size_t n_mc) {
    if (n_mc < 10000)
        throw std::invalid_argument("generic_bivariate_cdf: n_mc must be >= 1e4");
    if (!(z1 > 0.0 && z2 > 0.0))
        throw std::invalid_argument("generic_bivariate_cdf: z1, z2 must be > 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
        const auto s = sampler();
        if (!s) throw numeric_error("generic_bivariate_cdf: sampler exhausted");
        const double h1 = h_fn(s->a1 + s->a12);
        const double h2 = h_fn(s->a2 + s->a12);
        acc += std::exp(-s->a1 * h1 / z1 - s->a2 * h2 / z2 -
                        s->a12 * std::max(h1 / z1, h2 / z2));
    }
    return acc / static_cast<double>(n_mc);
}

double generic_stdf(double w1, double w2, const ScaleFn& h_fn,
                    const AreaSource& sampler, std::size_t n_mc) {
    if (n_mc < 10000) throw std::invalid_argument("generic_stdf: n_mc must be >= 1e4");
    if (!(w1 > 0.0 && w2 > 0.0))
        throw std::invalid_argument("generic_stdf: w1, w2 must be > 0");
    std::vector<double> x12h1(n_mc), x12h2(n_mc);
    double n1 = 0.0, n2 = 0.0, d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
        const auto s = sampler();
        if (!s) throw numeric_error("generic_stdf: sampler exhausted");
        const double h1 = h_fn(s->a1 + s->a12);
        const double h2 = h_fn(s->a2 + s->a12);
        n1 += s->a1 * h1;
        n2 += s->a2 * h2;
        d1 += (s->a1 + s->a12) * h1;
        d2 += (s->a2 + s->a12) * h2;
        x12h1[i] = s->a12 * h1;
        x12h2[i] = s->a12 * h2;
    }
    double t = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i)
        t += std::max(w1 * x12h1[i] / d1, w2 * x12h2[i] / d2);
    return w1 * n1 / d1 + w2 * n2 / d2 + t;
}

AreaSource disk_area_source(double h, const rf::RadiusSpec& spec, std::uint64_t seed,
                            std::uint64_t stream) {
    rf::validate(spec);
    auto rng = std::make_shared<Rng>(seed, stream);
    const double rho = spec.cov.rho(h);
    return [rng, spec, rho, h]() -> std::optional<AreaVectorSample> {
        const double g1 = rng->normal();
        const double g2 =
            rho * g1 + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * rng->normal();
        const double w = spec.rU - spec.rL;
        const double r1 = spec.rL + w * numerics::norm_cdf(g1);
        const double r2 = spec.rL + w * numerics::norm_cdf(g2);
        const double a12 = geom::lens_area(r1, r2, h);
        return AreaVectorSample{M_PI * r1 * r1 - a12, M_PI * r2 * r2 - a12, a12};
    };
}

}  // namespace maxconv::sim
