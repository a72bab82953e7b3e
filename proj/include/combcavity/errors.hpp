#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace combcav
{

// Root of everything the library throws on purpose.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something outside an operation's contract.
class ValidationError : public Error
{
public:
    using Error::Error;
};

class DomainError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

class RangeError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

// Malformed input table; row() is 1-based over physical lines, 0 if unknown.
class ParseError : public ValidationError
{
public:
    ParseError(const std::string& what, std::size_t row)
        : ValidationError(row ? "row " + std::to_string(row) + ": " + what : what), row_(row)
    {
    }
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

// Inputs were fine but an iterative method did not deliver.
class NumericError : public Error
{
public:
    using Error::Error;
};

class QuadratureError : public NumericError
{
public:
    QuadratureError(const std::string& what, double achieved)
        : NumericError(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved)
    {
    }
    double achieved_tolerance() const { return achieved_; }

private:
    double achieved_;
};

class FitError : public NumericError
{
public:
    FitError(const std::string& what, std::vector<double> last)
        : NumericError(what), last_(std::move(last))
    {
    }
    const std::vector<double>& last_iterate() const { return last_; }

private:
    std::vector<double> last_;
};

} // namespace combcav
