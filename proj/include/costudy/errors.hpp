#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace costudy {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed transcript or log input. line() is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Rejected input; field() names the offending field for 400 responses.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool retryable) : Error(what), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

// Completion carried no usable reply text.
class EmptyReplyError : public Error {
public:
    EmptyReplyError() : Error("empty-reply") {}
};

} // namespace costudy
