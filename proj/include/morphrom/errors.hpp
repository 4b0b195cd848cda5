#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace morphrom {

// Error families map onto CLI exit codes: 2 configuration, 3 numerical
// failure, 4 data integrity.
class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error(m, 2) {}
};

class BoundsError : public Error {
public:
    explicit BoundsError(const std::string& m) : Error(m, 2) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& m) : Error(m, 2) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& m) : Error(m, 2) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& m) : Error(m, 2) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& m) : Error(m, 2) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& m) : Error(m, 3) {}
};

class ExtrapolationError : public Error {
public:
    explicit ExtrapolationError(const std::string& m) : Error(m, 3) {}
};

class IllPosedError : public Error {
public:
    explicit IllPosedError(const std::string& m) : Error(m, 3) {}
};

class NoRefinementError : public Error {
public:
    explicit NoRefinementError(const std::string& m) : Error(m, 3) {}
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& m) : Error(m, 4) {}
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& m, double residual, long iterations)
        : Error(m, 3), residual(residual), iterations(iterations) {}
    double residual;
    long iterations;
};

// Outer-iteration failure of the coupled solve; keeps the per-iteration
// interface-change history for diagnostics.
class SchwarzConvergenceError : public ConvergenceError {
public:
    SchwarzConvergenceError(const std::string& m, double residual, long iterations,
                            std::vector<double> history)
        : ConvergenceError(m, residual, iterations), history(std::move(history)) {}
    std::vector<double> history;
};

}  // namespace morphrom
