#ifndef MAXCONV_ERRORS_HPP
#define MAXCONV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace maxconv {

// Numeric failure (non-finite intermediate, quadrature blow-up, ...).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Root bracket does not straddle the target.
class bracketing_error : public std::runtime_error {
public:
    explicit bracketing_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Covariance matrix could not be factorized even after nugget escalation.
class ill_conditioned_error : public std::runtime_error {
public:
    explicit ill_conditioned_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested density does not exist (degenerate law).
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data problems: parsing, alignment, degenerate columns.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace maxconv

#endif
