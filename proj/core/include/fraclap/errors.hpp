#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

// Rejected user input: bad mesh parameters, alpha out of range, malformed
// study configuration, incompatible scheme/solver combination.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what)
        : std::invalid_argument(what) {}
};

// The kernel compression could not reach the requested tolerance within the
// panel budget. Carries the best sup-error actually achieved.
class soe_build_error : public std::runtime_error {
public:
    soe_build_error(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_error(achieved) {}

    double achieved_error;
};

// Linear-algebra failure: singular system, zero pivot in a pivot-free
// factorization, or a preconditioner band that is not diagonally dominant.
class solver_error : public std::runtime_error {
public:
    explicit solver_error(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace fraclap
