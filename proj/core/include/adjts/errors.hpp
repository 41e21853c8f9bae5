#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace adjts
{

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A required callback is absent. Raised before any integration starts.
class ConfigurationError : public Error
{
public:
    ConfigurationError(const std::string &what, std::vector<std::string> missing = {});

    [[nodiscard]] const std::vector<std::string> &missing() const noexcept { return m_missing; }

private:
    std::vector<std::string> m_missing;
};

class SingularMatrixError : public Error
{
public:
    SingularMatrixError(const std::string &what, std::ptrdiff_t pivot) : Error(what), m_pivot(pivot) {}

    // Index of the offending pivot, or -1 if the backend does not report it.
    [[nodiscard]] std::ptrdiff_t pivot() const noexcept { return m_pivot; }

private:
    std::ptrdiff_t m_pivot;
};

// Failure of a single forward, tangent, or adjoint step.
class StepFailure : public Error
{
public:
    StepFailure(const std::string &what, std::size_t step) : Error(what), m_step(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return m_step; }

private:
    std::size_t m_step;
};

class ContractViolation : public Error
{
public:
    using Error::Error;
};

} // namespace adjts
