#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cogtrace {

// Base for every error raised by the library. Callers that only care about
// "something was rejected" catch this; the subclasses carry extra context.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class RecorderError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SignalError : public Error {
public:
    using Error::Error;
};

// Carries every violation found, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> diagnostics);

    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

}  // namespace cogtrace
