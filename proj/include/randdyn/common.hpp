#pragma once

// Shared linear-algebra aliases and the error taxonomy used across the
// library. Every precondition violation is a ValidationError; quantities
// leaving the floating range raise OverflowError; iterative schemes that hit
// their caps raise ConvergenceError.

#include <Eigen/Dense>

#include <stdexcept>

namespace randdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace randdyn
