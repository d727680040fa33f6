#pragma once

#include <stdexcept>
#include <string>

namespace pbit
{

// Malformed network, scenario, or gate description. The CLI maps this to exit code 2.
class ConfigurationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition (e.g. an unsaturated input voltage).
class ContractViolation : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

class ArgumentError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Exhaustive enumeration would exceed the supported size.
class CapacityError : public std::length_error
{
  public:
    using std::length_error::length_error;
};

// The request is well-formed but outside what the operation models (e.g. an oracle for a wired network).
class UnsupportedConfiguration : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

class NotFoundError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// A gate Hamiltonian failed ground-state verification. The CLI maps this to exit code 3.
class VerificationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace pbit
