#ifndef MAXCONV_MATRIX_HPP
#define MAXCONV_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace maxconv {

// Dense row-major matrix, n rows x p columns.
struct Matrix {
    std::size_t n = 0, p = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : n(rows), p(cols), v(rows * cols, fill) {}

    double& at(std::size_t i, std::size_t j) { return v[i * p + j]; }
    double at(std::size_t i, std::size_t j) const { return v[i * p + j]; }
    std::vector<double> column(std::size_t j) const {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = v[i * p + j];
        return c;
    }
};

}  // namespace maxconv

#endif
