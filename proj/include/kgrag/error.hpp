#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgrag {

// Base for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed an out-of-range or malformed value.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// A graph consistency rule was violated (dangling reference, duplicate id).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Lookup of an id that is not in the store.
class NotFoundError : public Error {
public:
    using Error::Error;
};

// A file or provider response failed to parse. Carries the source name and
// the 1-based line of the offending record when known.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& msg)
        : Error(source + ": line " + std::to_string(line) + ": " + msg),
          source_(source), line_(line) {}
    ParseError(const std::string& source, const std::string& msg)
        : Error(source + ": " + msg), source_(source), line_(0) {}

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

// An external provider call failed. retryable() distinguishes transport /
// throttling failures from hard rejections; attempts() counts calls made.
class ProviderError : public Error {
public:
    ProviderError(const std::string& msg, bool retryable, int attempts,
                  std::string body = {})
        : Error(msg), retryable_(retryable), attempts_(attempts),
          body_(std::move(body)) {}

    bool retryable() const { return retryable_; }
    int attempts() const { return attempts_; }
    const std::string& body() const { return body_; }

private:
    bool retryable_;
    int attempts_;
    std::string body_;
};

// Input cannot be served within hard limits (e.g. question alone exceeds
// the prompt budget).
class UnprocessableError : public Error {
public:
    using Error::Error;
};

} // namespace kgrag
