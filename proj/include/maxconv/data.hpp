#ifndef MAXCONV_DATA_HPP
#define MAXCONV_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "maxconv/copula.hpp"
#include "maxconv/matrix.hpp"

namespace maxconv::data {

// Column mapping for station CSV ingestion.
struct CsvSchema {
    std::string id = "station_id";
    std::string lat = "lat";
    std::string lon = "lon";
    std::string date = "date";
    std::string value = "value";
};

// Station panel: p stations sharing one strictly increasing date index.
struct StationTable {
    std::vector<std::string> ids;
    std::vector<double> lat, lon;
    std::vector<int> days;       // serial day numbers (days since 1970-01-01)
    Matrix values;               // n x p

    std::size_t n() const { return values.n; }
    std::size_t p() const { return values.p; }
};

int parse_iso_date(const std::string& s);     // throws data_error on bad input
int day_of_year(int serial_day);              // 1-based
std::string format_iso_date(int serial_day);

// Long-format CSV (station_id, lat, lon, date, value) -> aligned table.
// Malformed rows raise data_error with the line number; stations missing
// dates raise an alignment error naming station and date.
StationTable ingest_csv(const std::string& path, const CsvSchema& schema = {});

// Per-station OLS of intercept + annual sine/cosine pairs on day-of-year;
// returns the residual table.
StationTable deseasonalize(const StationTable& t, int harmonics = 2);

struct ResidualMatrix {
    Matrix values;                       // (n-2) x p AR(2) residuals
    std::vector<double> phi1, phi2;      // Yule-Walker estimates per station
    std::vector<bool> nonstationary;     // root-check warning flags
    std::vector<std::string> ids;
};

// Yule-Walker AR(2) residuals; the first two time points are dropped.
ResidualMatrix ar2_residuals(const StationTable& t);

enum class DistanceMode { euclidean, great_circle_km };

// Pairwise station distances; great-circle via haversine, R = 6371 km.
Matrix station_distances(const StationTable& t, DistanceMode mode);

// Synthetic fixture: seasonal signal + AR(2) noise whose innovation copula
// is simulated from the given model family. negate_innovations moves the
// model's upper-tail dependence into the lower tail.
struct FixtureSpec {
    std::size_t p = 10;
    std::size_t n = 153;
    copula::Family family = copula::Family::M3_maxconv;
    copula::ModelParams params;
    bool negate_innovations = false;
    double seasonal_amplitude = 8.0;
    double ar_phi1 = 0.5;
    double ar_phi2 = 0.2;
    double noise_scale = 3.0;
    int start_day = 19113;  // 2022-05-01
};

StationTable make_fixture(const FixtureSpec& spec, std::uint64_t seed);

}  // namespace maxconv::data

#endif
