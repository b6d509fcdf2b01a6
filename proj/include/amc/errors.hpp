// errors.hpp - exception types shared by every amcnet module
#pragma once

#include <stdexcept>
#include <string>

namespace amc {

// Operand shapes do not agree with what an operation requires.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A hyperparameter or option is outside its legal domain.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A forward operation produced NaN or Inf from finite inputs.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Misuse of the autograd graph (backward on a leaf, non-scalar loss, ...).
class GraphError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed AMCD / AMCM file. `kind` distinguishes the failure.
class FormatError : public std::runtime_error {
public:
    enum class Kind { bad_magic, bad_version, truncated, bad_label, inconsistent, io };

    FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace amc
