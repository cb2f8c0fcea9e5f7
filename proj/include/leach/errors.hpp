#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace leach {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input rejected by a precondition check (bad radius, non-SPD coefficient, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A numerical procedure produced NaN/Inf or violated a guaranteed bound.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap.
class NonConvergence : public NumericalFailure {
public:
    NonConvergence(const std::string& what, double final_residual, int iterations)
        : NumericalFailure(what), final_residual_(final_residual), iterations_(iterations) {}

    double final_residual() const noexcept { return final_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double final_residual_;
    int iterations_;
};

/// Discrete maximum principle broken by more than the clipping tolerance.
class MaxPrincipleViolation : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// Data that should be consistent by construction is not (e.g. r > r0).
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Parse failure in one of the text formats; carries the 1-based line number.
class ParseError : public InvalidInput {
public:
    ParseError(const std::string& what, std::size_t line)
        : InvalidInput("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Aggregated configuration violations, one entry per offending key.
class ConfigError : public InvalidInput {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : InvalidInput(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v)
    {
        std::string out = "invalid configuration:";
        for (const auto& s : v) out += "\n  " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

}  // namespace leach
