#pragma once

#include <stdexcept>
#include <string>

namespace bm {

// Invalid argument or value outside a function's mathematical domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Working precision too low for the requested computation (e.g. the
// bits-vs-K rule of the inversion engine).
class PrecisionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A series or iteration failed to reach the requested tolerance within
// its cap. The message names the module, the offending input and the cap.
class ConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed external input (cache files, CSV tables).
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace bm
