#ifndef DPCA_ERROR_HPP
#define DPCA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dpca {

// Error categories map onto CLI exit codes:
//   ConfigError -> 2, DataError -> 3, DegenerateError -> 4.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad flags, bad config files, infeasible generator specs.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Parse failures, schema violations, insufficient data.
class DataError : public Error {
public:
    using Error::Error;
};

// Numerical degeneracy (zero-variance column, singular scatter).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Degenerate column with its index attached, so callers can report or flag it.
class DegenerateColumnError : public DegenerateError {
public:
    DegenerateColumnError(int column, const std::string& what)
        : DegenerateError(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

} // namespace dpca

#endif
