#pragma once

#include <stdexcept>
#include <string>

namespace rcm {

/// Caller violated an operation's precondition (bad parameters, wrong dimension, unknown id).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameter outside the mathematical domain of a formula (e.g. a supercritical branching mean).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A statistical estimate could not be formed from the available data.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedFeature : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace rcm
