#ifndef CFBVA_ERRORS_HPP
#define CFBVA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cfbva {

// Malformed or inconsistent configuration. Messages carry the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was called in a state where it is undefined.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A formula was evaluated outside its domain (zero denominators and the like).
class NumericDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Backward recursion failure: empty population, non-finite values.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfbva

#endif
