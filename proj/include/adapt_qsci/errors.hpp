#pragma once

#include <stdexcept>
#include <string>

namespace aqsci {

/// Malformed or missing input (files, configs, fixtures). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algorithm stage could not produce a result (e.g. empty subspace). CLI exit code 1.
class AlgorithmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aqsci
