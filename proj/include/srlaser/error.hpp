#pragma once

#include <stdexcept>
#include <string>

namespace srl {

/// Invalid input: bad parameters, unknown preset, malformed config.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical solver (integrator, Newton, linear solve) could not deliver a result.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, double best_residual = -1.0)
        : std::runtime_error(what), best_residual_(best_residual) {}

    [[nodiscard]] double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Line-shape fitting failed (flat data, no convergence).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace srl
