#ifndef MAXCONV_GEOMETRY_HPP
#define MAXCONV_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace maxconv::geom {

// Two disks of radii r1, r2 whose centers are h apart.
struct DiskPair {
    double r1;
    double r2;
    double h;
};

inline void validate(const DiskPair& dp) {
    if (!(dp.r1 > 0.0) || !(dp.r2 > 0.0) || !(dp.h >= 0.0))
        throw std::invalid_argument("DiskPair: need r1 > 0, r2 > 0, h >= 0");
}

// Area of the circular lens common to the two disks.
//
// Contained/concentric branch when |r1-r2| >= h, zero when the disks are
// disjoint (h >= r1+r2), otherwise the two-segment lens formula. arccos
// arguments are clamped to [-1,1] to absorb roundoff at branch boundaries.
inline double lens_area(double r1, double r2, double h) {
    const double rmin = std::min(r1, r2);
    if (std::abs(r1 - r2) >= h) return M_PI * rmin * rmin;
    if (h >= r1 + r2) return 0.0;
    const double c1 = std::clamp((h * h + r1 * r1 - r2 * r2) / (2.0 * h * r1), -1.0, 1.0);
    const double c2 = std::clamp((h * h + r2 * r2 - r1 * r1) / (2.0 * h * r2), -1.0, 1.0);
    const double p1 = std::acos(c1);
    const double p2 = std::acos(c2);
    return r1 * r1 * (p1 - 0.5 * std::sin(2.0 * p1)) +
           r2 * r2 * (p2 - 0.5 * std::sin(2.0 * p2));
}

inline double lens_area(const DiskPair& dp) {
    validate(dp);
    return lens_area(dp.r1, dp.r2, dp.h);
}

// Overlap fraction delta_i = A12 / (pi r_i^2).
inline double delta(const DiskPair& dp, int which) {
    validate(dp);
    if (which != 1 && which != 2) throw std::invalid_argument("delta: which must be 1 or 2");
    const double r = which == 1 ? dp.r1 : dp.r2;
    return lens_area(dp) / (M_PI * r * r);
}

// Both overlap fractions at once; the shared lens area is computed once.
inline void deltas(double r1, double r2, double h, double& d1, double& d2) {
    const double a12 = lens_area(r1, r2, h);
    d1 = a12 / (M_PI * r1 * r1);
    d2 = a12 / (M_PI * r2 * r2);
}

}  // namespace maxconv::geom

#endif
