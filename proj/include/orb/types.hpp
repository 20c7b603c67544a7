#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace orb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Global tolerances. Mutating the instance is intended for program start-up
/// (CLI flags); every other structure treats the values as constants.
struct Tolerances {
    double alg = 1e-9;      // purely algebraic comparisons (group matching, orbits)
    double metric = 1e-8;   // metric compatibility residuals on grids
    double integration = 1e-8;  // residuals of integrated quantities
    double energy = 1e-6;   // geodesic energy drift per unit time
    double h_fd = 1e-5;     // central finite-difference step
};

Tolerances& tol();

// Error taxonomy. The CLI maps these to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct BudgetError : Error {
    using Error::Error;
};
struct CoverageError : Error {
    using Error::Error;
};
struct InversionError : NumericalError {
    using NumericalError::NumericalError;
};

inline bool approx_zero(double x, double eps) { return std::abs(x) < eps; }

/// Lexicographic comparison of vectors (component by component, ties move to
/// the next coordinate). Used to pick canonical orbit representatives.
inline bool lex_less(const Vec& a, const Vec& b) {
    for (Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

}  // namespace orb
