#pragma once

#include <stdexcept>
#include <string>

namespace fbmbax {

// A caller-supplied parameter or configuration violates a documented
// precondition. The message names the violated constraint.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine exhausted its budget before reaching its accuracy
// target. Carries the best estimate obtained and the error bound actually
// achieved so callers can decide whether the partial answer is usable.
class non_convergence_error : public std::runtime_error {
public:
    non_convergence_error(const std::string& what, double best, double achieved)
        : std::runtime_error(what), best_estimate(best), error_bound(achieved) {}

    double best_estimate;
    double error_bound;
};

} // namespace fbmbax
