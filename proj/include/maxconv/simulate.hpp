#ifndef MAXCONV_SIMULATE_HPP
#define MAXCONV_SIMULATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "maxconv/copula.hpp"
#include "maxconv/randomfields.hpp"
#include "maxconv/rng.hpp"

namespace maxconv::sim {

struct DiskModelParams {
    rf::RadiusSpec radius;
};

// Rectangular raster discretizing the sup-measure W: each cell carries an
// independent Frechet(cell area) supremum.
struct RasterGrid {
    double cell = 0.0;   // cell side
    double x0 = 0.0, y0 = 0.0;
    int nx = 0, ny = 0;
};

// cell side rU/cells_per_radius, domain = site bounding box padded by rU
RasterGrid make_grid(const rf::SiteSet& sites, double rU, int cells_per_radius = 50);

// Max-convolution process on the raster. One replicate per call; seeds are
// (master seed, stream) so replicates form independent reproducible streams.
// Throws std::invalid_argument when rL > 0 and the smallest possible disk
// holds fewer than 100 cells.
class RasterSimulator {
public:
    RasterSimulator(const rf::SiteSet& sites, const DiskModelParams& params,
                    const RasterGrid& grid);
    std::vector<double> replicate(Rng& rng) const;
    std::vector<double> replicate_field(Rng& rng, std::vector<double>& field) const;
    const RasterGrid& grid() const { return grid_; }

private:
    rf::SiteSet sites_;
    DiskModelParams params_;
    RasterGrid grid_;
    rf::GpSampler gp_;
    std::vector<int> site_cell_;  // cell index containing each site
};

std::vector<double> simulate_z(const rf::SiteSet& sites, const DiskModelParams& params,
                               const RasterGrid& grid, std::uint64_t seed,
                               std::uint64_t stream = 0);

// Max-mixture process max(q Z, (1-q) Y) on the raster.
class MixtureSimulator {
public:
    MixtureSimulator(const rf::SiteSet& sites, const copula::MixtureParams& params,
                     const RasterGrid& grid);
    std::vector<double> replicate(Rng& rng) const;

private:
    RasterSimulator z_;
    copula::MixtureParams params_;
    rf::GpSampler gpY_;
};

std::vector<double> simulate_mixture(const rf::SiteSet& sites,
                                     const copula::MixtureParams& params,
                                     const RasterGrid& grid, std::uint64_t seed,
                                     std::uint64_t stream = 0);

// ---- exact two-site samplers (area decomposition; no rasterization) ----

// Conditional on the radius pair, (Z1, Z2) is Marshall-Olkin: independent
// Frechet sups over the two private regions and the lens.
class PairSampler {
public:
    PairSampler(double h, const rf::RadiusSpec& spec);
    void draw(Rng& rng, double& z1, double& z2) const;
    // uniform-scale margins U = exp(-1/Z)
    void draw_uniform(Rng& rng, double& u1, double& u2) const;

private:
    double h_, rho_;
    rf::RadiusSpec spec_;
};

class MixturePairSampler {
public:
    MixturePairSampler(double h, const copula::MixtureParams& params);
    void draw(Rng& rng, double& z1, double& z2) const;
    // uniform scale via the mixture marginal cdf
    void draw_uniform(Rng& rng, double& u1, double& u2) const;

private:
    PairSampler zpair_;
    copula::MixtureParams params_;
    copula::MixtureMarginal marg_;
    double rhoY_;
};

// ---- generic Monte Carlo evaluators over area-vector samples ----

struct AreaVectorSample {
    double a1;
    double a2;
    double a12;
};

using AreaSource = std::function<std::optional<AreaVectorSample>()>;
using ScaleFn = std::function<double(double)>;  // h(.) applied to |A(s_i)|

// Monte Carlo of the joint cdf: E exp[-x1 h1/z1 - x2 h2/z2 - x12 max(h1/z1, h2/z2)].
double generic_bivariate_cdf(double z1, double z2, const ScaleFn& h_fn,
                             const AreaSource& sampler, std::size_t n_mc);

// Monte Carlo of the stable tail-dependence function; the normalizing
// integrals are estimated from the same sample.
double generic_stdf(double w1, double w2, const ScaleFn& h_fn,
                    const AreaSource& sampler, std::size_t n_mc);

// Disk-induced area-vector source: radii from the Gaussian pair copula,
// a12 the lens area, a_i the private remainders.
AreaSource disk_area_source(double h, const rf::RadiusSpec& spec,
                            std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace maxconv::sim

#endif
