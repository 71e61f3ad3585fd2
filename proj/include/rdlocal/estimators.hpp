#pragma once

#include <optional>

#include "rdlocal/local_poly.hpp"
#include "rdlocal/types.hpp"

namespace rdlocal {

// Boundary values of the q-th coefficient on each side. For fuzzy designs the
// treatment-equation values are present as well.
struct JumpComponents {
  double y_right = 0.0;
  double y_left = 0.0;
  std::optional<double> x_right;
  std::optional<double> x_left;
};

struct PointEstimate {
  double tau = 0.0;
  JumpComponents components;
  int n_left = 0;
  int n_right = 0;
};

// tau = c_q(right) - c_q(left) from independent one-sided fits of order
// spec.p at the given bandwidths.
PointEstimate sharp_estimate(const Dataset& data, const DesignSpec& spec,
                             double h_left, double h_right,
                             bool use_survey_weights = false);

// tau = outcome jump / treatment jump; throws weak_first_stage_error when
// |treatment jump| < first_stage_floor.
PointEstimate fuzzy_estimate(const Dataset& data, const DesignSpec& spec,
                             double h_left, double h_right,
                             bool use_survey_weights = false,
                             double first_stage_floor = 1e-6);

// Joint weighted fit of the outcome on side-specific polynomial blocks plus
// shared covariate columns over the union of in-bandwidth rows; returns a
// dataset whose outcome (and, for fuzzy designs, treatment) has the common
// covariate effect removed everywhere. Covariates and names are dropped from
// the result.
Dataset covariate_adjust(const Dataset& data, const DesignSpec& spec, double h_left,
                         double h_right, bool use_survey_weights = false);

}  // namespace rdlocal
