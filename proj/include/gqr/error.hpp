#pragma once

#include <stdexcept>
#include <string>

namespace gqr {

/// Runtime failure in a pipeline stage (bad input data, backend failure, ...).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Misconfiguration detected before any work starts (missing file, missing
/// credential, invalid parameter range). Mapped to exit code 2 by the CLI.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace gqr
