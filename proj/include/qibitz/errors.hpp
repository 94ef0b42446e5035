#pragma once

#include <stdexcept>
#include <string>

namespace qibitz {

/// Base for every error the library raises. `code()` is a stable machine
/// string that the CLI prints and tests assert on.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

    /// Whether the same operation may succeed when retried.
    virtual bool retryable() const noexcept { return false; }

private:
    std::string code_;
};

class RetryableError : public Error {
public:
    using Error::Error;
    bool retryable() const noexcept override { return true; }
};

class FileNotFoundError : public Error {
public:
    explicit FileNotFoundError(const std::string& path)
        : Error("file-not-found", "cannot open " + path) {}
};

class IoError : public RetryableError {
public:
    explicit IoError(const std::string& message) : RetryableError("io", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class QueryError : public Error {
public:
    explicit QueryError(const std::string& message) : Error("bad-query", message) {}
};

}  // namespace qibitz
