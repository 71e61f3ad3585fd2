#include "rdlocal/local_poly.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "rdlocal/kernels.hpp"

namespace rdlocal {

namespace {

struct WlsSolution {
  std::vector<double> coefficients;
  std::vector<double> gram_inv;  // row-major (m x m), in the unscaled basis
};

// Weighted least squares of resp on powers 0..order of zc, solved by
// column-pivoted QR on the weighted design. Columns are rescaled to the unit
// interval first so the rank test (relative threshold 1e-10) is meaningful
// for narrow windows. Throws singular_fit_error naming the lowest-order
// dependent column.
WlsSolution solve_poly_wls(const std::vector<double>& zc, const std::vector<double>& resp,
                           const std::vector<double>& w, int order,
                           const std::string& who) {
  const int m = order + 1;
  const Eigen::Index n = static_cast<Eigen::Index>(zc.size());

  double span = 0.0;
  for (double v : zc) span = std::max(span, std::abs(v));
  const double s = span > 0.0 ? span : 1.0;

  Eigen::MatrixXd A(n, m);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
    const double t = zc[static_cast<std::size_t>(i)] / s;
    double tj = 1.0;
    for (int j = 0; j < m; ++j) {
      A(i, j) = sw * tj;
      tj *= t;
    }
    b(i) = sw * resp[static_cast<std::size_t>(i)];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < m) {
    const auto& perm = qr.colsPermutation().indices();
    int bad = m - 1;
    for (Eigen::Index k = qr.rank(); k < m; ++k)
      bad = std::min<int>(bad, perm(k));
    std::ostringstream msg;
    msg << who << ": singular weighted design, column z^" << bad
        << " is linearly dependent";
    throw singular_fit_error(msg.str());
  }

  const Eigen::VectorXd d = qr.solve(b);

  // (A^T A)^-1 in the scaled basis from the R factor: A P = Q R.
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  const Eigen::MatrixXd gram_scaled = perm * (Rinv * Rinv.transpose()) * perm.transpose();

  WlsSolution out;
  out.coefficients.resize(m);
  out.gram_inv.resize(static_cast<std::size_t>(m) * m);
  double sj = 1.0;
  for (int j = 0; j < m; ++j) {
    out.coefficients[j] = d(j) / sj;
    sj *= s;
  }
  double si = 1.0;
  for (int i = 0; i < m; ++i) {
    double sk = 1.0;
    for (int j = 0; j < m; ++j) {
      out.gram_inv[static_cast<std::size_t>(i) * m + j] = gram_scaled(i, j) / (si * sk);
      sk *= s;
    }
    si *= s;
  }
  return out;
}

}  // namespace

double polyval(std::span<const double> coefficients, double dz) {
  double v = 0.0;
  for (std::size_t j = coefficients.size(); j-- > 0;) v = v * dz + coefficients[j];
  return v;
}

std::vector<double> weighted_polyfit(std::span<const WPoint> points, double center,
                                     int order) {
  if (order < 0) throw parameter_error("weighted_polyfit: order must be nonnegative");
  std::vector<double> zc, resp, w;
  for (const WPoint& pt : points) {
    if (!(pt.w > 0.0)) continue;
    if (!std::isfinite(pt.z) || !std::isfinite(pt.y) || !std::isfinite(pt.w))
      throw parameter_error("weighted_polyfit: nonfinite input");
    zc.push_back(pt.z - center);
    resp.push_back(pt.y);
    w.push_back(pt.w);
  }
  const int m = order + 1;
  if (static_cast<int>(zc.size()) < m) {
    std::ostringstream msg;
    msg << "weighted_polyfit: " << m << " coefficients need at least " << m
        << " positive-weight points, found " << zc.size();
    throw sample_size_error(msg.str());
  }
  return solve_poly_wls(zc, resp, w, order, "weighted_polyfit").coefficients;
}

std::vector<double> SideFitDetail::influence(int coef_index) const {
  const int m = order + 1;
  if (coef_index < 0 || coef_index >= m)
    throw parameter_error("influence: coefficient index out of range");
  std::vector<double> phi(rows.size());
  const double* g = gram_inv.data() + static_cast<std::size_t>(coef_index) * m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double acc = 0.0;
    double zj = 1.0;
    for (int j = 0; j < m; ++j) {
      acc += g[j] * zj;
      zj *= zc[i];
    }
    phi[i] = acc * w[i];
  }
  return phi;
}

double SideFitDetail::loading(int coef_index, int power) const {
  if (power < 0) throw parameter_error("loading: power must be nonnegative");
  const std::vector<double> phi = influence(coef_index);
  double acc = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    acc += phi[i] * std::pow(zc[i], power);
  return acc;
}

FitSide SideFitDetail::as_fit_side() const {
  FitSide fs;
  fs.side = side;
  fs.coefficients = coefficients;
  fs.n_effective = n_effective();
  fs.bandwidth = bandwidth;
  return fs;
}

SideFitDetail fit_side_detail(const Dataset& data, FitVar var, Side side, double h,
                              int order, KernelKind kernel, bool use_survey_weights) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw parameter_error("fit_side: bandwidth must be positive and finite");
  if (order < 0) throw parameter_error("fit_side: order must be nonnegative");

  SideFitDetail out;
  out.side = side;
  out.order = order;
  out.bandwidth = h;
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const Observation& obs = data.observations[i];
    if (side_of(obs.z, data.cutoff) != side) continue;
    const double kw = kernel_weight(kernel, obs.z, data.cutoff, h);
    if (kw <= 0.0) continue;
    const double wt = use_survey_weights ? kw * obs.weight : kw;
    if (!(wt > 0.0)) continue;
    out.rows.push_back(i);
    out.zc.push_back(obs.z - data.cutoff);
    out.w.push_back(wt);
    out.resp.push_back(var == FitVar::Outcome ? obs.y : obs.x);
  }

  const int m = order + 1;
  if (out.n_effective() < m) {
    std::ostringstream msg;
    msg << "fit_side: " << (side == Side::Left ? "left" : "right") << " side needs "
        << m << " observations inside bandwidth " << h << ", found "
        << out.n_effective();
    throw sample_size_error(msg.str());
  }

  WlsSolution sol = solve_poly_wls(out.zc, out.resp, out.w, order, "fit_side");
  out.coefficients = std::move(sol.coefficients);
  out.gram_inv = std::move(sol.gram_inv);
  return out;
}

FitSide fit_side(const Dataset& data, const DesignSpec& spec, FitVar var, Side side,
                 double h, bool use_survey_weights) {
  spec.validate();
  return fit_side_detail(data, var, side, h, spec.p, spec.kernel, use_survey_weights)
      .as_fit_side();
}

}  // namespace rdlocal
