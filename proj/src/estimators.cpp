#include "rdlocal/estimators.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "rdlocal/kernels.hpp"

namespace rdlocal {

PointEstimate sharp_estimate(const Dataset& data, const DesignSpec& spec,
                             double h_left, double h_right, bool use_survey_weights) {
  spec.validate();
  const SideFitDetail left = fit_side_detail(data, FitVar::Outcome, Side::Left, h_left,
                                             spec.p, spec.kernel, use_survey_weights);
  const SideFitDetail right = fit_side_detail(data, FitVar::Outcome, Side::Right,
                                              h_right, spec.p, spec.kernel,
                                              use_survey_weights);
  PointEstimate pe;
  pe.components.y_left = left.coefficients[spec.q];
  pe.components.y_right = right.coefficients[spec.q];
  pe.tau = pe.components.y_right - pe.components.y_left;
  pe.n_left = left.n_effective();
  pe.n_right = right.n_effective();
  return pe;
}

PointEstimate fuzzy_estimate(const Dataset& data, const DesignSpec& spec,
                             double h_left, double h_right, bool use_survey_weights,
                             double first_stage_floor) {
  spec.validate();
  if (!(first_stage_floor > 0.0))
    throw parameter_error("fuzzy_estimate: first_stage_floor must be positive");

  PointEstimate pe = sharp_estimate(data, spec, h_left, h_right, use_survey_weights);
  const double y_jump = pe.tau;

  const SideFitDetail xl = fit_side_detail(data, FitVar::Treatment, Side::Left, h_left,
                                           spec.p, spec.kernel, use_survey_weights);
  const SideFitDetail xr = fit_side_detail(data, FitVar::Treatment, Side::Right,
                                           h_right, spec.p, spec.kernel,
                                           use_survey_weights);
  pe.components.x_left = xl.coefficients[spec.q];
  pe.components.x_right = xr.coefficients[spec.q];
  const double x_jump = *pe.components.x_right - *pe.components.x_left;
  if (std::abs(x_jump) < first_stage_floor) {
    std::ostringstream msg;
    msg << "fuzzy_estimate: treatment discontinuity " << x_jump
        << " is below the floor " << first_stage_floor;
    throw weak_first_stage_error(msg.str());
  }
  pe.tau = y_jump / x_jump;
  return pe;
}

namespace {

// Rank of the first `cols` columns at the shared relative threshold.
Eigen::Index rank_of(const Eigen::MatrixXd& A, Eigen::Index cols) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.leftCols(cols));
  qr.setThreshold(1e-10);
  return qr.rank();
}

}  // namespace

Dataset covariate_adjust(const Dataset& data, const DesignSpec& spec, double h_left,
                         double h_right, bool use_survey_weights) {
  spec.validate();
  if (!(h_left > 0.0) || !(h_right > 0.0))
    throw parameter_error("covariate_adjust: bandwidths must be positive");
  const std::size_t k = data.covariate_names.size();
  if (k == 0)
    throw parameter_error("covariate_adjust: dataset declares no covariates");

  // In-bandwidth union with kernel (x survey) weights.
  std::vector<std::size_t> rows;
  std::vector<double> zc, w;
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const Observation& obs = data.observations[i];
    if (obs.covariates.size() != k)
      throw parameter_error("covariate_adjust: covariate arity mismatch");
    const Side side = side_of(obs.z, data.cutoff);
    const double h = side == Side::Left ? h_left : h_right;
    const double kw = kernel_weight(spec.kernel, obs.z, data.cutoff, h);
    if (kw <= 0.0) continue;
    rows.push_back(i);
    zc.push_back(obs.z - data.cutoff);
    w.push_back(use_survey_weights ? kw * obs.weight : kw);
  }

  const int m = spec.p + 1;
  const Eigen::Index cols = 2 * m + static_cast<Eigen::Index>(k);
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n < cols) {
    std::ostringstream msg;
    msg << "covariate_adjust: joint fit needs " << cols
        << " in-bandwidth observations, found " << n;
    throw sample_size_error(msg.str());
  }

  double span = 0.0;
  for (double v : zc) span = std::max(span, std::abs(v));
  const double s = span > 0.0 ? span : 1.0;

  std::vector<double> scale(static_cast<std::size_t>(cols), 1.0);
  for (int j = 0; j < m; ++j) {
    const double sj = std::pow(s, j);
    scale[j] = sj;
    scale[m + j] = sj;
  }
  for (std::size_t c = 0; c < k; ++c) {
    double mx = 0.0;
    for (std::size_t r : rows)
      mx = std::max(mx, std::abs(data.observations[r].covariates[c]));
    scale[2 * m + c] = mx > 0.0 ? mx : 1.0;
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, cols);
  Eigen::VectorXd by(n), bx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    const Observation& obs = data.observations[r];
    const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
    const double t = zc[static_cast<std::size_t>(i)] / s;
    const int block = side_of(obs.z, data.cutoff) == Side::Left ? 0 : m;
    double tj = 1.0;
    for (int j = 0; j < m; ++j) {
      A(i, block + j) = sw * tj;
      tj *= t;
    }
    for (std::size_t c = 0; c < k; ++c)
      A(i, 2 * m + static_cast<Eigen::Index>(c)) =
          sw * obs.covariates[c] / scale[2 * m + c];
    by(i) = sw * obs.y;
    bx(i) = sw * obs.x;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    // Attribute the deficiency: polynomial blocks first, then covariates one
    // at a time, so a collinear covariate is named even when the pivoting
    // happens to flag an intercept column.
    if (rank_of(A, 2 * m) < 2 * m) {
      const auto& perm = qr.colsPermutation().indices();
      int bad = static_cast<int>(cols) - 1;
      for (Eigen::Index kk = qr.rank(); kk < cols; ++kk)
        bad = std::min<int>(bad, perm(kk));
      const int j = bad % m;
      std::ostringstream msg;
      msg << "covariate_adjust: singular design, column " << (bad < m ? "left" : "right")
          << " z^" << j << " is linearly dependent";
      throw singular_fit_error(msg.str());
    }
    for (std::size_t c = 0; c < k; ++c) {
      const Eigen::Index upto = 2 * m + static_cast<Eigen::Index>(c) + 1;
      if (rank_of(A, upto) < upto) {
        std::ostringstream msg;
        msg << "covariate_adjust: covariate " << data.covariate_names[c]
            << " is collinear with the design";
        throw singular_fit_error(msg.str());
      }
    }
    throw singular_fit_error("covariate_adjust: singular joint design");
  }

  const Eigen::VectorXd dy = qr.solve(by);
  std::vector<double> gamma_y(k);
  for (std::size_t c = 0; c < k; ++c)
    gamma_y[c] = dy(2 * m + static_cast<Eigen::Index>(c)) / scale[2 * m + c];

  std::vector<double> gamma_x;
  if (spec.kind == DesignKind::Fuzzy) {
    const Eigen::VectorXd dx = qr.solve(bx);
    gamma_x.resize(k);
    for (std::size_t c = 0; c < k; ++c)
      gamma_x[c] = dx(2 * m + static_cast<Eigen::Index>(c)) / scale[2 * m + c];
  }

  Dataset out = data;
  for (Observation& obs : out.observations) {
    for (std::size_t c = 0; c < k; ++c) {
      obs.y -= gamma_y[c] * obs.covariates[c];
      if (!gamma_x.empty()) obs.x -= gamma_x[c] * obs.covariates[c];
    }
    obs.covariates.clear();
  }
  out.covariate_names.clear();
  return out;
}

}  // namespace rdlocal
