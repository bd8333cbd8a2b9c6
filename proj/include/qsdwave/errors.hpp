#pragma once

#include <stdexcept>
#include <string>

namespace qsdwave {

// Error taxonomy shared by all modules. The CLI maps these to exit codes:
// config/parameter/domain -> 2, numerical -> 3, extinction -> 4, io -> 5.

struct parameter_error : std::invalid_argument {
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// A mathematically out-of-range request (theta beyond theta*, r beyond c^2/2, ...).
struct domain_error : std::domain_error {
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-convergence, scheme instability, consistency violations.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// All particles absorbed in one step / conditioned mass underflow.
struct extinction_error : std::runtime_error {
    explicit extinction_error(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsdwave
