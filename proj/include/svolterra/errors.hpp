#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sve {

// Numerical failure at runtime: non-convergent quadrature or series,
// solution blow-up, tolerance breach. Parameter and domain violations use
// std::invalid_argument / std::domain_error instead.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative scheme exhausted its iteration budget. Carries the gap history
// so the caller can decide whether to accept the last iterate or refine.
class convergence_error : public numerical_error {
public:
    convergence_error(const std::string& msg, std::vector<double> gap_history)
        : numerical_error(msg), gaps(std::move(gap_history)) {}

    std::vector<double> gaps;
};

// Integration domain was too small for the requested tolerance.
class truncation_error : public numerical_error {
public:
    truncation_error(const std::string& msg, double tail_bound_)
        : numerical_error(msg), tail_bound(tail_bound_) {}

    double tail_bound = 0.0;
};

} // namespace sve
