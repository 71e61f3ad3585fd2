#pragma once

#include <stdexcept>
#include <string>

namespace rdlocal {

// Root of every error the library throws on its own behalf.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (orders, alpha, bandwidths, probabilities, ...).
class parameter_error : public error {
 public:
  using error::error;
};

// Too few usable observations for the requested fit or selection.
class sample_size_error : public error {
 public:
  using error::error;
};

// Rank-deficient weighted design matrix.
class singular_fit_error : public error {
 public:
  using error::error;
};

// Fuzzy denominator smaller than the configured floor.
class weak_first_stage_error : public error {
 public:
  using error::error;
};

// Estimated curvature too close to zero for bandwidth selection.
class degenerate_curvature_error : public error {
 public:
  using error::error;
};

// Survey file does not match the declared schema.
class schema_error : public error {
 public:
  using error::error;
};

// Malformed or inconsistent run configuration.
class config_error : public error {
 public:
  using error::error;
};

// File system / serialization failures.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace rdlocal
