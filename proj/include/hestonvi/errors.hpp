#pragma once

#include <stdexcept>
#include <string>

namespace hestonvi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A Heston coefficient violates its admissible range; what() names it.
class CoefficientError : public Error
{
public:
    CoefficientError(std::string which, const std::string& detail)
        : Error(which + ": " + detail), which_(std::move(which))
    {}
    const std::string& which() const noexcept { return which_; }

private:
    std::string which_;
};

class NormalizationError : public Error
{
public:
    using Error::Error;
};

class DomainError : public Error
{
public:
    using Error::Error;
};

class PreconditionError : public Error
{
public:
    using Error::Error;
};

class AssemblyError : public Error
{
public:
    using Error::Error;
};

class LinearSolveError : public Error
{
public:
    using Error::Error;
};

class SideConditionError : public Error
{
public:
    using Error::Error;
};

class BarrierError : public Error
{
public:
    using Error::Error;
};

class EnvelopeError : public Error
{
public:
    using Error::Error;
};

class ParamError : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

/// Iterative procedure failed to converge. Carries the last residual and,
/// for continuation solves, the penalty parameter at which it happened.
class NonconvergenceError : public Error
{
public:
    NonconvergenceError(const std::string& what, double last_residual, double eps = 0.0)
        : Error(what), last_residual_(last_residual), eps_(eps)
    {}
    double last_residual() const noexcept { return last_residual_; }
    double eps() const noexcept { return eps_; }

private:
    double last_residual_;
    double eps_;
};

} // namespace hestonvi
