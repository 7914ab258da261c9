#pragma once

#include <stdexcept>
#include <string>

namespace lmsim {

// Base class for every recoverable simulator error.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries the file path and 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::string file, int line, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ": " + msg),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }

private:
    std::string file_;
    int line_;
};

// A scenario field violates its documented constraint.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& msg)
        : Error(field + ": " + msg), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

class SchemaMismatch : public Error {
public:
    explicit SchemaMismatch(const std::string& msg) : Error(msg) {}
};

class InconsistentMarginals : public Error {
public:
    explicit InconsistentMarginals(const std::string& msg) : Error(msg) {}
};

// Iterative fit stopped at max_iter. Carries the last marginal residual.
class NotConverged : public Error {
public:
    NotConverged(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class MissingStratum : public Error {
public:
    explicit MissingStratum(const std::string& msg) : Error(msg) {}
};

class UnknownPerson : public Error {
public:
    explicit UnknownPerson(const std::string& msg) : Error(msg) {}
};

class UnknownAlternative : public Error {
public:
    explicit UnknownAlternative(const std::string& msg) : Error(msg) {}
};

class UnknownAttribute : public Error {
public:
    explicit UnknownAttribute(const std::string& msg) : Error(msg) {}
};

class MissingAgent : public Error {
public:
    explicit MissingAgent(const std::string& msg) : Error(msg) {}
};

class MissingArtifact : public Error {
public:
    explicit MissingArtifact(const std::string& msg) : Error(msg) {}
};

} // namespace lmsim
