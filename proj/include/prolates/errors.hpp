#ifndef PROLATES_ERRORS_HPP
#define PROLATES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace prolates {

// Thrown when an input violates a documented precondition.
struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an evaluation point lies outside the function's domain.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Generic numerical breakdown (singular system, lost pivot, ...).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive solver failed to converge within its budget.
struct solver_error : numerical_error {
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    double tail_ratio = 0.0;
    solver_error(const std::string& msg, double lo, double hi, double ratio)
        : numerical_error(msg), interval_lo(lo), interval_hi(hi), tail_ratio(ratio) {}
};

// Newton iteration diverged on a subinterval.
struct newton_error : numerical_error {
    std::vector<double> residual_history;
    newton_error(const std::string& msg, std::vector<double> history)
        : numerical_error(msg), residual_history(std::move(history)) {}
};

}  // namespace prolates

#endif
