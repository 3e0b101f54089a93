#ifndef LRC_COMMON_HPP
#define LRC_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace lrc {

// Rejected-input errors (bad shapes, out-of-range arguments, malformed files).
struct InvalidArgument : std::invalid_argument {
    explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failures (non-convergence, divergence, non-finite values).
// `residual` carries the offending quantity when one exists.
struct NumericalFailure : std::runtime_error {
    double residual;
    explicit NumericalFailure(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), residual(residual) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace lrc

#endif
