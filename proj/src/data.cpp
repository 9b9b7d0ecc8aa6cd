#include "maxconv/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "maxconv/errors.hpp"
#include "maxconv/numerics.hpp"
#include "maxconv/randomfields.hpp"
#include "maxconv/rng.hpp"
#include "maxconv/simulate.hpp"

namespace maxconv::data {

namespace {

// days from civil date (Howard Hinnant's algorithm)
int days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

int parse_iso_date(const std::string& s) {
    int y, m, d;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 ||
        d < 1 || d > 31)
        throw data_error("bad ISO-8601 date: '" + s + "'");
    return days_from_civil(y, m, d);
}

int day_of_year(int serial_day) {
    int y, m, d;
    civil_from_days(serial_day, y, m, d);
    return serial_day - days_from_civil(y, 1, 1) + 1;
}

std::string format_iso_date(int serial_day) {
    int y, m, d;
    civil_from_days(serial_day, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

StationTable ingest_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw data_error("ingest_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw data_error("ingest_csv: empty file " + path);
    const auto header = split_csv_line(line);
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw data_error("ingest_csv: missing column '" + name + "'");
    };
    const int ci = col(schema.id), cla = col(schema.lat), clo = col(schema.lon),
              cd = col(schema.date), cv = col(schema.value);
    struct Rec {
        double lat, lon;
        std::map<int, double> series;
    };
    std::map<std::string, Rec> recs;
    std::set<int> all_days;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        const int maxc = std::max({ci, cla, clo, cd, cv});
        if (static_cast<int>(f.size()) <= maxc)
            throw data_error("ingest_csv: malformed row at line " +
                             std::to_string(lineno));
        try {
            const std::string id = f[ci];
            const int day = parse_iso_date(f[cd]);
            const double la = std::stod(f[cla]);
            const double lo = std::stod(f[clo]);
            const double v = std::stod(f[cv]);
            auto& r = recs[id];
            r.lat = la;
            r.lon = lo;
            if (!r.series.emplace(day, v).second)
                throw data_error("duplicate date " + f[cd] + " for station " + id);
            all_days.insert(day);
        } catch (const data_error&) {
            throw;
        } catch (const std::exception&) {
            throw data_error("ingest_csv: malformed row at line " +
                             std::to_string(lineno));
        }
    }
    if (recs.empty()) throw data_error("ingest_csv: no data rows in " + path);
    StationTable t;
    t.days.assign(all_days.begin(), all_days.end());
    for (const auto& [id, r] : recs) {
        for (int day : t.days)
            if (!r.series.count(day))
                throw data_error("ingest_csv: station " + id + " missing date " +
                                 format_iso_date(day) + " (alignment)");
        t.ids.push_back(id);
        t.lat.push_back(r.lat);
        t.lon.push_back(r.lon);
    }
    t.values = Matrix(t.days.size(), t.ids.size());
    for (std::size_t j = 0; j < t.ids.size(); ++j) {
        const auto& r = recs.at(t.ids[j]);
        for (std::size_t i = 0; i < t.days.size(); ++i)
            t.values.at(i, j) = r.series.at(t.days[i]);
    }
    return t;
}

StationTable deseasonalize(const StationTable& t, int harmonics) {
    if (harmonics < 0) throw std::invalid_argument("deseasonalize: harmonics >= 0");
    const std::size_t n = t.n(), p = t.p();
    const std::size_t k = 1 + 2 * static_cast<std::size_t>(harmonics);
    if (n <= k) throw data_error("deseasonalize: series shorter than the design");
    // shared design matrix over the day-of-year
    std::vector<double> X(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        const double doy = day_of_year(t.days[i]);
        X[i * k] = 1.0;
        for (int m = 1; m <= harmonics; ++m) {
            const double w = 2.0 * M_PI * m * doy / 365.25;
            X[i * k + 2 * m - 1] = std::sin(w);
            X[i * k + 2 * m] = std::cos(w);
        }
    }
    // normal equations, shared Cholesky
    std::vector<double> xtx(k * k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b <= a; ++b)
                xtx[a * k + b] += X[i * k + a] * X[i * k + b];
    std::vector<double> L(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            double s = xtx[a * k + b];
            for (std::size_t c = 0; c < b; ++c) s -= L[a * k + c] * L[b * k + c];
            if (a == b) {
                if (s <= 1e-10)
                    throw data_error("deseasonalize: rank-deficient seasonal design");
                L[a * k + a] = std::sqrt(s);
            } else {
                L[a * k + b] = s / L[b * k + b];
            }
        }
    }
    StationTable out = t;
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> xty(k, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < k; ++a)
                xty[a] += X[i * k + a] * t.values.at(i, j);
        // solve L L^T beta = xty
        std::vector<double> y(k), beta(k);
        for (std::size_t a = 0; a < k; ++a) {
            double s = xty[a];
            for (std::size_t c = 0; c < a; ++c) s -= L[a * k + c] * y[c];
            y[a] = s / L[a * k + a];
        }
        for (std::size_t a = k; a-- > 0;) {
            double s = y[a];
            for (std::size_t c = a + 1; c < k; ++c) s -= L[c * k + a] * beta[c];
            beta[a] = s / L[a * k + a];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double fit = 0.0;
            for (std::size_t a = 0; a < k; ++a) fit += X[i * k + a] * beta[a];
            out.values.at(i, j) = t.values.at(i, j) - fit;
        }
    }
    return out;
}

ResidualMatrix ar2_residuals(const StationTable& t) {
    const std::size_t n = t.n(), p = t.p();
    if (n < 20) throw data_error("ar2_residuals: need at least 20 time points");
    ResidualMatrix out;
    out.values = Matrix(n - 2, p);
    out.phi1.resize(p);
    out.phi2.resize(p);
    out.nonstationary.assign(p, false);
    out.ids = t.ids;
    for (std::size_t j = 0; j < p; ++j) {
        const auto z = t.values.column(j);
        double mean = 0.0;
        for (double v : z) mean += v;
        mean /= n;
        double c0 = 0.0, c1 = 0.0, c2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = z[i] - mean;
            c0 += a * a;
            if (i + 1 < n) c1 += a * (z[i + 1] - mean);
            if (i + 2 < n) c2 += a * (z[i + 2] - mean);
        }
        if (c0 <= 0.0) throw data_error("ar2_residuals: constant series " + t.ids[j]);
        const double r1 = c1 / c0, r2 = c2 / c0;
        const double den = 1.0 - r1 * r1;
        const double phi1 = den > 1e-12 ? r1 * (1.0 - r2) / den : 0.0;
        const double phi2 = den > 1e-12 ? (r2 - r1 * r1) / den : 0.0;
        out.phi1[j] = phi1;
        out.phi2[j] = phi2;
        // stationarity triangle: phi2 in (-1,1), phi2 +- phi1 < 1
        if (!(std::abs(phi2) < 1.0 && phi1 + phi2 < 1.0 && phi2 - phi1 < 1.0))
            out.nonstationary[j] = true;
        for (std::size_t i = 2; i < n; ++i)
            out.values.at(i - 2, j) = z[i] - mean - phi1 * (z[i - 1] - mean) -
                                      phi2 * (z[i - 2] - mean);
    }
    return out;
}

Matrix station_distances(const StationTable& t, DistanceMode mode) {
    const std::size_t p = t.p();
    Matrix d(p, p);
    if (mode == DistanceMode::great_circle_km) {
        for (std::size_t j = 0; j < p; ++j)
            if (std::abs(t.lat[j]) > 90.0 || std::abs(t.lon[j]) > 180.0)
                throw data_error("station_distances: coordinates out of range for " +
                                 t.ids[j]);
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double dist;
            if (mode == DistanceMode::euclidean) {
                const double dx = t.lon[a] - t.lon[b], dy = t.lat[a] - t.lat[b];
                dist = std::sqrt(dx * dx + dy * dy);
            } else {
                const double la1 = t.lat[a] * M_PI / 180.0, la2 = t.lat[b] * M_PI / 180.0;
                const double dla = la2 - la1;
                const double dlo = (t.lon[b] - t.lon[a]) * M_PI / 180.0;
                const double s = std::sin(0.5 * dla), c = std::sin(0.5 * dlo);
                const double hav = s * s + std::cos(la1) * std::cos(la2) * c * c;
                dist = 2.0 * 6371.0 * std::asin(std::min(1.0, std::sqrt(hav)));
            }
            d.at(a, b) = dist;
            d.at(b, a) = dist;
        }
    }
    return d;
}

StationTable make_fixture(const FixtureSpec& spec, std::uint64_t seed) {
    if (spec.p < 2 || spec.n < 30)
        throw std::invalid_argument("make_fixture: need p >= 2 and n >= 30");
    Rng site_rng(seed, 0);
    const rf::SiteSet sites = rf::SiteSet::random_uniform(spec.p, 0.0, 1.0, site_rng);

    // innovation copula: uniform-scale draws from the generating family
    Matrix uu(spec.n, spec.p);
    switch (spec.family) {
        case copula::Family::M1_gaussian: {
            rf::CovarianceSpec cov{rf::CovFamily::powered_exponential,
                                   spec.params.theta, spec.params.alpha};
            rf::GpSampler gp(sites, cov);
            Rng rng(seed, 1);
            for (std::size_t i = 0; i < spec.n; ++i) {
                const auto g = gp.draw(rng);
                for (std::size_t j = 0; j < spec.p; ++j)
                    uu.at(i, j) = numerics::norm_cdf(g[j]);
            }
            break;
        }
        case copula::Family::M3_maxconv: {
            const sim::DiskModelParams dp{copula::radius_spec(spec.params)};
            const auto grid = sim::make_grid(sites, dp.radius.rU);
            const sim::RasterSimulator sim(sites, dp, grid);
            Rng rng(seed, 1);
            for (std::size_t i = 0; i < spec.n; ++i) {
                const auto z = sim.replicate(rng);
                for (std::size_t j = 0; j < spec.p; ++j)
                    uu.at(i, j) = std::exp(-1.0 / z[j]);
            }
            break;
        }
        case copula::Family::M4_mix_gaussian:
        case copula::Family::M5_mix_student: {
            const auto mp = copula::mixture_params(spec.params, spec.family);
            const auto grid = sim::make_grid(sites, mp.radius.rU);
            const sim::MixtureSimulator sim(sites, mp, grid);
            const copula::MixtureMarginal marg{mp.q, mp.companion};
            Rng rng(seed, 1);
            for (std::size_t i = 0; i < spec.n; ++i) {
                const auto z = sim.replicate(rng);
                for (std::size_t j = 0; j < spec.p; ++j)
                    uu.at(i, j) = marg.cdf(z[j]);
            }
            break;
        }
        default:
            throw std::invalid_argument("make_fixture: unsupported generating family");
    }

    // seasonal + AR(2) filter over the copula innovations
    StationTable t;
    t.values = Matrix(spec.n, spec.p);
    t.days.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) t.days[i] = spec.start_day + static_cast<int>(i);
    Rng rng(seed, 2);
    for (std::size_t j = 0; j < spec.p; ++j) {
        t.ids.push_back("S" + std::to_string(j));
        t.lat.push_back(sites.pts[j].y);
        t.lon.push_back(sites.pts[j].x);
        const double base = 20.0 + 5.0 * rng.uniform();
        double prev1 = 0.0, prev2 = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            double e = numerics::norm_quantile(
                std::clamp(uu.at(i, j), 1e-12, 1.0 - 1e-12));
            if (spec.negate_innovations) e = -e;
            const double x = spec.ar_phi1 * prev1 + spec.ar_phi2 * prev2 +
                             spec.noise_scale * e;
            prev2 = prev1;
            prev1 = x;
            const double doy = day_of_year(t.days[i]);
            const double season =
                spec.seasonal_amplitude * std::sin(2.0 * M_PI * doy / 365.25) +
                0.4 * spec.seasonal_amplitude * std::cos(4.0 * M_PI * doy / 365.25);
            t.values.at(i, j) = base + season + x;
        }
    }
    return t;
}

}  // namespace maxconv::data
