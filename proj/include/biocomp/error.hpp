#pragma once

#include <stdexcept>
#include <string>

namespace biocomp {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors caused by bad user input (files, manifests, configs). The CLI maps
/// these to exit code 2; anything else is an internal error.
class InputError : public Error {
public:
    using Error::Error;
};

class FormatError : public InputError {
public:
    FormatError(const std::string& what, long line = 0)
        : InputError(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

class EmptyChannelError : public InputError {
public:
    using InputError::InputError;
};

class ManifestError : public InputError {
public:
    using InputError::InputError;
};

class MissingChannelError : public InputError {
public:
    using InputError::InputError;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

class InsufficientBaselineError : public InputError {
public:
    using InputError::InputError;
};

class DegenerateBaselineError : public InputError {
public:
    using InputError::InputError;
};

class FilterDesignError : public Error {
public:
    using Error::Error;
};

class DecompositionError : public Error {
public:
    DecompositionError(const std::string& what, double residual)
        : Error(what + " (final KKT residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ScheduleError : public InputError {
public:
    using InputError::InputError;
};

class EmptyWindowError : public Error {
public:
    using Error::Error;
};

class FeatureError : public Error {
public:
    using Error::Error;
};

class ImputationError : public Error {
public:
    using Error::Error;
};

class TrainError : public Error {
public:
    using Error::Error;
};

class CorrelationUndefinedError : public Error {
public:
    using Error::Error;
};

class SynthError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace biocomp
