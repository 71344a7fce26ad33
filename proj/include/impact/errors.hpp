#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace impact {

/// Base class for every error raised by the solver library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A model assumption required by the invoked backend does not hold
/// (e.g. a negative effective terminal penalty).
class AssumptionViolated : public Error {
public:
    using Error::Error;
};

/// Linear solve hit a pivot below the working-precision floor.
class IllConditioned : public Error {
public:
    IllConditioned(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// A backward Riccati integration left its guard region.
class BlowUp : public Error {
public:
    BlowUp(const std::string& what, double time, double norm)
        : Error(what), time_(time), norm_(norm) {}
    double time() const noexcept { return time_; }
    double norm() const noexcept { return norm_; }

private:
    double time_;
    double norm_;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, std::vector<double> history)
        : Error(what), iterations_(iterations), history_(std::move(history)) {}
    int iterations() const noexcept { return iterations_; }
    double last_residual() const noexcept { return history_.empty() ? 0.0 : history_.back(); }
    const std::vector<double>& history() const noexcept { return history_; }

private:
    int iterations_;
    std::vector<double> history_;
};

/// Regression cannot be set up: non-finite state, empty basis, fewer paths
/// than basis functions, or a singular Gram matrix.
class DegenerateRegression : public Error {
public:
    DegenerateRegression(const std::string& what, int step)
        : Error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace impact
