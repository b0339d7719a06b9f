#pragma once

#include <stdexcept>
#include <string>

namespace emtk {

/// Malformed or physically invalid user input (exit code 2 in the CLI).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside an engine: singular systems, divergence,
/// failed self-checks.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace emtk
