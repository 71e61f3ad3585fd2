#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rdlocal/errors.hpp"

namespace rdlocal {

// One unit of analysis. z is the running variable, y the outcome, x the
// treatment indicator (ignored by sharp designs), weight an optional survey
// expansion factor.
struct Observation {
  double z = 0.0;
  double y = 0.0;
  double x = 0.0;
  std::vector<double> covariates;
  double weight = 1.0;
};

struct Dataset {
  std::vector<Observation> observations;
  double cutoff = 0.0;
  std::vector<std::string> covariate_names;
  std::string outcome_name = "y";
  std::string treatment_name = "x";

  std::size_t size() const { return observations.size(); }
};

enum class DesignKind { Sharp, Fuzzy };

enum class KernelKind { Triangular, Uniform };

enum class Side { Left, Right };

// Observations with z >= cutoff belong to the right side.
inline Side side_of(double z, double cutoff) {
  return z < cutoff ? Side::Left : Side::Right;
}

struct FixedBandwidth {
  double left = 0.0;
  double right = 0.0;
};

// q = 0 estimates a level discontinuity, q = 1 a slope discontinuity.
// bandwidth empty means data-driven selection.
struct DesignSpec {
  DesignKind kind = DesignKind::Sharp;
  int q = 0;
  int p = 1;
  KernelKind kernel = KernelKind::Triangular;
  std::optional<FixedBandwidth> bandwidth;
  bool use_covariates = false;
  double alpha = 0.05;

  void validate() const;
};

struct FitSide {
  Side side = Side::Left;
  std::vector<double> coefficients;  // c0..cp about the cutoff
  int n_effective = 0;               // rows with positive kernel weight
  double bandwidth = 0.0;
};

struct EstimateResult {
  double tau = 0.0;
  double bias = 0.0;
  double se_conventional = 0.0;
  double se_robust = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double h_left = 0.0;
  double h_right = 0.0;
  int n_left = 0;
  int n_right = 0;
  std::optional<double> first_stage_jump;
};

// Structural checks that do not stop at the first problem. Each finding names
// the violated rule and the offending row (when row-specific).
std::vector<std::string> validate_dataset(const Dataset& data);

// Throws parameter_error listing every finding, if any.
void require_valid(const Dataset& data);

}  // namespace rdlocal
