#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace hemato {

/// Coarse error classes; the CLI maps each to exactly one exit code.
enum class ErrorCategory {
    invalid_input,      // exit 2
    numerical_failure,  // exit 3
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(ErrorCategory::invalid_input, what) {}
};

class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& what)
        : Error(ErrorCategory::numerical_failure, what) {}
};

class InvalidParameter : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Argument outside the domain of a function (T, T^-1, arccos, derivative order).
class DomainError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class NoPositiveEquilibrium : public InvalidInput {
public:
    NoPositiveEquilibrium()
        : InvalidInput("no positive equilibrium: (beta0/delta)(k-1) - 1 <= 0") {}
};

/// omega cot(omega r) = -p has no solution in (0, pi/r).
class NoSolution : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class NoImaginaryCrossing : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class BracketError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class ConfigError : public InvalidInput {
public:
    ConfigError(int line, const std::string& what)
        : InvalidInput(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    /// 1-based line number, 0 when the problem is not tied to a line.
    int line() const noexcept { return line_; }

private:
    int line_;
};

class NonConvergence : public NumericalFailure {
public:
    NonConvergence(const std::string& what, std::complex<double> last_iterate)
        : NumericalFailure(what), last_iterate_(last_iterate) {}

    std::complex<double> last_iterate() const noexcept { return last_iterate_; }

private:
    std::complex<double> last_iterate_;
};

/// Singular linear system in the center-manifold coefficients.
class ResonanceError : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class DegenerateCrossing : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class BlowUp : public NumericalFailure {
public:
    explicit BlowUp(double time)
        : NumericalFailure("non-finite state at t = " + std::to_string(time)), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

class Inconclusive : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

}  // namespace hemato
