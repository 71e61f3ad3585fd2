#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rdlocal/types.hpp"

namespace rdlocal {

struct WPoint {
  double z = 0.0;
  double y = 0.0;
  double w = 1.0;
};

// Horner evaluation of c0 + c1*dz + ... at dz.
double polyval(std::span<const double> coefficients, double dz);

// Coefficients c0..c_order of the polynomial in (z - center) minimizing
// sum w_i (y_i - poly(z_i - center))^2 over points with w > 0.
// Throws sample_size_error when positive-weight points < order + 1 and
// singular_fit_error naming the deficient column when the design loses rank.
std::vector<double> weighted_polyfit(std::span<const WPoint> points, double center,
                                     int order);

enum class FitVar { Outcome, Treatment };

// One-sided fit with everything inference needs afterwards. Rows are indices
// into the original dataset, restricted to the requested side with positive
// combined weight. gram_inv is (XtWX)^-1, row-major, (order+1)^2.
struct SideFitDetail {
  Side side = Side::Left;
  int order = 0;
  double bandwidth = 0.0;
  std::vector<std::size_t> rows;
  std::vector<double> zc;    // z - cutoff per kept row
  std::vector<double> w;     // kernel (x survey) weight per kept row
  std::vector<double> resp;  // fitted response per kept row
  std::vector<double> coefficients;
  std::vector<double> gram_inv;

  int n_effective() const { return static_cast<int>(rows.size()); }

  // Row weights of the linear functional picking coefficient `coef_index`:
  // e_j^T (XtWX)^-1 Xt W. Same length as rows.
  std::vector<double> influence(int coef_index) const;

  // influence(coef_index) dotted with zc^power; appears in the bias
  // construction as the response of coefficient j to a z^power component.
  double loading(int coef_index, int power) const;

  FitSide as_fit_side() const;
};

SideFitDetail fit_side_detail(const Dataset& data, FitVar var, Side side, double h,
                              int order, KernelKind kernel, bool use_survey_weights);

// Order and kernel taken from the design; response picked by var.
FitSide fit_side(const Dataset& data, const DesignSpec& spec, FitVar var, Side side,
                 double h, bool use_survey_weights = false);

}  // namespace rdlocal
