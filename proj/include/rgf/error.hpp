#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgf {

/// Base class for every error the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries "path:line: ".
class DataError : public Error {
public:
    DataError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
    explicit DataError(const std::string& what) : Error(what) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

/// Invalid hyperparameter or argument combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Corrupt, truncated or version-mismatched model stream.
class ModelFormatError : public Error {
public:
    using Error::Error;
};

/// Cached state no longer matches the object it was built for.
class StaleStateError : public Error {
public:
    using Error::Error;
};

}  // namespace rgf
