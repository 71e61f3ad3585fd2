#pragma once

#include <cstddef>
#include <string>

#include "rdlocal/estimators.hpp"
#include "rdlocal/types.hpp"

namespace rdlocal {

enum class VarianceEstimator { NearestNeighbor, HCPlugin };

struct InferenceConfig {
  // Pilot order = p + bias_order_increment for the bias estimate and the
  // robust variance.
  int bias_order_increment = 1;
  VarianceEstimator variance_estimator = VarianceEstimator::NearestNeighbor;
  int nn_neighbors = 3;
  bool use_survey_weights = false;
  double first_stage_floor = 1e-6;
  // Off: one pooled bandwidth for both sides. On: the selection rule is
  // re-evaluated on each side separately.
  bool per_side_bandwidths = false;

  void validate() const;
};

// h = [ (1+2q) * v / (2 * (1+p-q) * b) ]^(1/(2p+3)) * n^(-1/(2p+3)),
// evaluated exactly as written on injected variance and bias constants.
// b enters linearly; its magnitude is used and |b| < 1e-12 throws
// degenerate_curvature_error.
double bandwidth_formula(double v, double b, int p, int q, std::size_t n);

enum class BandwidthSide { Pooled, Left, Right };

// Data-driven plug-in: pilot fits of order p + increment over each side's
// full span feed bias and variance constants into bandwidth_formula. See
// docs/methodology.md for the exact pilot recipe.
double select_bandwidth(const Dataset& data, const DesignSpec& spec,
                        BandwidthSide side, const InferenceConfig& config = {});

// Plug-in bias of tau at the given bandwidths, from pilot fits of order
// p + increment at the same bandwidths. Subtracting it reproduces the
// order-(p + increment) estimator exactly.
double estimate_bias(const Dataset& data, const DesignSpec& spec, double h_left,
                     double h_right, const InferenceConfig& config = {});

struct VarianceEstimate {
  double conventional = 0.0;  // order-p influence weights
  double robust = 0.0;        // order-(p + increment) influence weights
};

VarianceEstimate estimate_variance(const Dataset& data, const DesignSpec& spec,
                                   double h_left, double h_right,
                                   const InferenceConfig& config = {});

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double p_value = 1.0;
};

// Robust bias-corrected interval: (tau - bias) -/+ z_{1-alpha/2} * sqrt(v),
// two-sided p-value from the same statistic. v = 0 collapses the interval to
// the corrected point (p-value 0 unless the corrected estimate is 0).
Interval rbc_interval(double tau, double bias, double v_robust, double alpha);

// Full pipeline: validate, resolve bandwidths, optionally adjust covariates,
// estimate, bias-correct, compute variances and the interval. Errors from any
// stage are rethrown with the stage name prefixed.
EstimateResult run_design(const Dataset& data, const DesignSpec& spec,
                          const InferenceConfig& config = {});

// "***" p < 0.001, "**" p < 0.01, "*" p < 0.05, bullet p < 0.1, else "".
// Strict inequalities: boundary values take the weaker label.
std::string star_label(double p_value);

}  // namespace rdlocal
