#pragma once

#include <stdexcept>
#include <string>

namespace msirl {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, DataError / IoError -> 3, SolverError -> 4.
class Error : public std::runtime_error {
public:
    Error(std::string what, int exit_code)
        : std::runtime_error(std::move(what)), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what, 2) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error("data error: " + what, 3) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io error: " + what, 3) {}
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error("solver error: " + what, 4) {}
};

} // namespace msirl
