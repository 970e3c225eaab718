#pragma once

#include <stdexcept>
#include <string>

namespace ssr {

//! Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

//! Malformed or non-finite input data.
class InputError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! A score of the wrong kind was passed (e.g. dispersion score to a location op).
class KindMismatch : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Invalid configuration or misuse of a stateful object.
class ConfigError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

//! Numerical procedure failed to reach the requested tolerance.
class ConvergenceError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! Monte Carlo estimation could not produce a usable estimate.
class SimulationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssr
