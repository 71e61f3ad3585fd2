#include "rdlocal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "rdlocal/stats.hpp"

namespace rdlocal {

void InferenceConfig::validate() const {
  if (bias_order_increment < 1 || bias_order_increment > 3)
    throw parameter_error("InferenceConfig: bias_order_increment must be 1..3");
  if (nn_neighbors < 1)
    throw parameter_error("InferenceConfig: nn_neighbors must be at least 1");
  if (!(first_stage_floor > 0.0))
    throw parameter_error("InferenceConfig: first_stage_floor must be positive");
}

std::string star_label(double p_value) {
  if (!(p_value >= 0.0) || p_value > 1.0)
    throw parameter_error("star_label: p-value must lie in [0, 1]");
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  if (p_value < 0.1) return "•";
  return "";
}

double bandwidth_formula(double v, double b, int p, int q, std::size_t n) {
  if (p < 1) throw parameter_error("bandwidth_formula: p must be at least 1");
  if (q < 0 || q > p) throw parameter_error("bandwidth_formula: q must lie in [0, p]");
  if (n == 0) throw parameter_error("bandwidth_formula: n must be positive");
  if (!(v > 0.0) || !std::isfinite(v))
    throw parameter_error("bandwidth_formula: variance constant must be positive");
  if (!std::isfinite(b))
    throw parameter_error("bandwidth_formula: bias constant must be finite");
  const double babs = std::abs(b);
  if (babs < 1e-12)
    throw degenerate_curvature_error(
        "bandwidth_formula: |bias constant| below 1e-12, curvature too weak to "
        "balance against variance");
  const double ratio = ((1.0 + 2.0 * q) * v) / (2.0 * (1.0 + p - q) * babs);
  const double expo = 1.0 / (2.0 * p + 3.0);
  return std::pow(ratio, expo) * std::pow(static_cast<double>(n), -expo);
}

Interval rbc_interval(double tau, double bias, double v_robust, double alpha) {
  if (!std::isfinite(tau) || !std::isfinite(bias))
    throw parameter_error("rbc_interval: estimate and bias must be finite");
  if (!(v_robust >= 0.0) || !std::isfinite(v_robust))
    throw parameter_error("rbc_interval: robust variance must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw parameter_error("rbc_interval: alpha must lie strictly in (0, 1)");
  const double center = tau - bias;
  const double se = std::sqrt(v_robust);
  const double zq = normal_quantile(1.0 - alpha / 2.0);
  Interval iv;
  iv.low = center - zq * se;
  iv.high = center + zq * se;
  if (se > 0.0)
    iv.p_value = 2.0 * normal_cdf(-std::abs(center) / se);
  else
    iv.p_value = center == 0.0 ? 1.0 : 0.0;
  return iv;
}

namespace {

constexpr double kSpanInflation = 1.0 + 1e-6;
constexpr double kFloorInflation = 1.05;

// Per-dataset-row second-moment estimates for one side; only that side's
// rows are populated.
struct SigmaField {
  std::vector<double> syy, sxx, sxy;
};

// Nearest-neighbor residual variances over the full side (not just the
// in-bandwidth window): each row is compared with the mean of its k nearest
// same-side neighbors in z (ties resolved to the lower z, then lower row).
SigmaField nn_sigma(const Dataset& data, Side side, int k, bool need_x) {
  std::vector<std::size_t> idx;
  std::vector<double> zc;
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    if (side_of(data.observations[i].z, data.cutoff) != side) continue;
    idx.push_back(i);
    zc.push_back(data.observations[i].z - data.cutoff);
  }
  const std::size_t ns = idx.size();
  if (ns < 2)
    throw sample_size_error(
        "nearest-neighbor variance needs at least 2 observations per side");

  std::vector<std::size_t> order(ns);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return zc[a] < zc[b]; });

  SigmaField sig;
  sig.syy.assign(data.observations.size(), 0.0);
  if (need_x) {
    sig.sxx.assign(data.observations.size(), 0.0);
    sig.sxy.assign(data.observations.size(), 0.0);
  }

  const int kk = std::min<int>(k, static_cast<int>(ns) - 1);
  const double shrink = static_cast<double>(kk) / (kk + 1.0);
  for (std::size_t pos = 0; pos < ns; ++pos) {
    const double zi = zc[order[pos]];
    double sum_y = 0.0, sum_x = 0.0;
    std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(pos) - 1;
    std::size_t hi = pos + 1;
    for (int taken = 0; taken < kk; ++taken) {
      bool take_left;
      if (lo < 0)
        take_left = false;
      else if (hi >= ns)
        take_left = true;
      else
        take_left = (zi - zc[order[static_cast<std::size_t>(lo)]]) <=
                    (zc[order[hi]] - zi);
      const std::size_t nb =
          take_left ? order[static_cast<std::size_t>(lo--)] : order[hi++];
      sum_y += data.observations[idx[nb]].y;
      if (need_x) sum_x += data.observations[idx[nb]].x;
    }
    const std::size_t row = idx[order[pos]];
    const double ey = data.observations[row].y - sum_y / kk;
    sig.syy[row] = shrink * ey * ey;
    if (need_x) {
      const double ex = data.observations[row].x - sum_x / kk;
      sig.sxx[row] = shrink * ex * ex;
      sig.sxy[row] = shrink * ex * ey;
    }
  }
  return sig;
}

struct SideVar {
  double vyy = 0.0, vxx = 0.0, vyx = 0.0;
};

SideVar accumulate_nn(const SideFitDetail& det, int q, const SigmaField& sig,
                      bool need_x) {
  const std::vector<double> phi = det.influence(q);
  SideVar out;
  for (std::size_t i = 0; i < det.rows.size(); ++i) {
    const double p2 = phi[i] * phi[i];
    out.vyy += p2 * sig.syy[det.rows[i]];
    if (need_x) {
      out.vxx += p2 * sig.sxx[det.rows[i]];
      out.vyx += p2 * sig.sxy[det.rows[i]];
    }
  }
  return out;
}

// Plug-in flavor: squared residuals of the very fits whose influence weights
// are being used.
SideVar accumulate_hc(const SideFitDetail& dy, const SideFitDetail* dx, int q) {
  const std::vector<double> phi = dy.influence(q);
  SideVar out;
  for (std::size_t i = 0; i < dy.rows.size(); ++i) {
    const double ey = dy.resp[i] - polyval(dy.coefficients, dy.zc[i]);
    const double p2 = phi[i] * phi[i];
    out.vyy += p2 * ey * ey;
    if (dx) {
      const double ex = dx->resp[i] - polyval(dx->coefficients, dx->zc[i]);
      out.vxx += p2 * ex * ex;
      out.vyx += p2 * ex * ey;
    }
  }
  return out;
}

double fuzzy_combine(const SideVar& v, double tau_raw, double t_jump) {
  return (v.vyy + tau_raw * tau_raw * v.vxx - 2.0 * tau_raw * v.vyx) /
         (t_jump * t_jump);
}

void check_first_stage(double t_jump, double floor) {
  if (std::abs(t_jump) < floor) {
    std::ostringstream msg;
    msg << "treatment discontinuity " << t_jump << " is below the floor " << floor;
    throw weak_first_stage_error(msg.str());
  }
}

}  // namespace

double estimate_bias(const Dataset& data, const DesignSpec& spec, double h_left,
                     double h_right, const InferenceConfig& config) {
  spec.validate();
  config.validate();
  const int p = spec.p;
  const int po = p + config.bias_order_increment;
  const bool fuzzy = spec.kind == DesignKind::Fuzzy;

  double b_y = 0.0, b_x = 0.0;
  double y_jump = 0.0, x_jump = 0.0;
  for (Side side : {Side::Left, Side::Right}) {
    const double h = side == Side::Left ? h_left : h_right;
    const double sgn = side == Side::Left ? -1.0 : 1.0;
    const SideFitDetail main_y = fit_side_detail(data, FitVar::Outcome, side, h, p,
                                                 spec.kernel,
                                                 config.use_survey_weights);
    const SideFitDetail pilot_y = fit_side_detail(data, FitVar::Outcome, side, h, po,
                                                  spec.kernel,
                                                  config.use_survey_weights);
    double side_bias = 0.0;
    for (int j = p + 1; j <= po; ++j)
      side_bias += main_y.loading(spec.q, j) * pilot_y.coefficients[j];
    b_y += sgn * side_bias;
    y_jump += sgn * main_y.coefficients[spec.q];

    if (fuzzy) {
      const SideFitDetail main_x = fit_side_detail(data, FitVar::Treatment, side, h, p,
                                                   spec.kernel,
                                                   config.use_survey_weights);
      const SideFitDetail pilot_x = fit_side_detail(data, FitVar::Treatment, side, h,
                                                    po, spec.kernel,
                                                    config.use_survey_weights);
      double side_bias_x = 0.0;
      for (int j = p + 1; j <= po; ++j)
        side_bias_x += main_x.loading(spec.q, j) * pilot_x.coefficients[j];
      b_x += sgn * side_bias_x;
      x_jump += sgn * main_x.coefficients[spec.q];
    }
  }

  if (!fuzzy) return b_y;
  check_first_stage(x_jump, config.first_stage_floor);
  const double tau_raw = y_jump / x_jump;
  return (b_y - tau_raw * b_x) / x_jump;
}

VarianceEstimate estimate_variance(const Dataset& data, const DesignSpec& spec,
                                   double h_left, double h_right,
                                   const InferenceConfig& config) {
  spec.validate();
  config.validate();
  const int p = spec.p;
  const int po = p + config.bias_order_increment;
  const bool fuzzy = spec.kind == DesignKind::Fuzzy;

  SideVar conv, rob;
  double y_jump = 0.0, x_jump = 0.0;
  for (Side side : {Side::Left, Side::Right}) {
    const double h = side == Side::Left ? h_left : h_right;
    const double sgn = side == Side::Left ? -1.0 : 1.0;
    const SideFitDetail main_y = fit_side_detail(data, FitVar::Outcome, side, h, p,
                                                 spec.kernel,
                                                 config.use_survey_weights);
    const SideFitDetail pilot_y = fit_side_detail(data, FitVar::Outcome, side, h, po,
                                                  spec.kernel,
                                                  config.use_survey_weights);
    y_jump += sgn * main_y.coefficients[spec.q];

    if (config.variance_estimator == VarianceEstimator::NearestNeighbor) {
      const SigmaField sig = nn_sigma(data, side, config.nn_neighbors, fuzzy);
      const SideVar c = accumulate_nn(main_y, spec.q, sig, fuzzy);
      const SideVar r = accumulate_nn(pilot_y, spec.q, sig, fuzzy);
      conv.vyy += c.vyy;
      conv.vxx += c.vxx;
      conv.vyx += c.vyx;
      rob.vyy += r.vyy;
      rob.vxx += r.vxx;
      rob.vyx += r.vyx;
      if (fuzzy) {
        const SideFitDetail main_x = fit_side_detail(data, FitVar::Treatment, side, h,
                                                     p, spec.kernel,
                                                     config.use_survey_weights);
        x_jump += sgn * main_x.coefficients[spec.q];
      }
    } else {
      const SideFitDetail* mx = nullptr;
      const SideFitDetail* px = nullptr;
      SideFitDetail main_x, pilot_x;
      if (fuzzy) {
        main_x = fit_side_detail(data, FitVar::Treatment, side, h, p, spec.kernel,
                                 config.use_survey_weights);
        pilot_x = fit_side_detail(data, FitVar::Treatment, side, h, po, spec.kernel,
                                  config.use_survey_weights);
        mx = &main_x;
        px = &pilot_x;
        x_jump += sgn * main_x.coefficients[spec.q];
      }
      const SideVar c = accumulate_hc(main_y, mx, spec.q);
      const SideVar r = accumulate_hc(pilot_y, px, spec.q);
      conv.vyy += c.vyy;
      conv.vxx += c.vxx;
      conv.vyx += c.vyx;
      rob.vyy += r.vyy;
      rob.vxx += r.vxx;
      rob.vyx += r.vyx;
    }
  }

  VarianceEstimate out;
  if (!fuzzy) {
    out.conventional = conv.vyy;
    out.robust = rob.vyy;
    return out;
  }
  check_first_stage(x_jump, config.first_stage_floor);
  const double tau_raw = y_jump / x_jump;
  out.conventional = fuzzy_combine(conv, tau_raw, x_jump);
  out.robust = fuzzy_combine(rob, tau_raw, x_jump);
  return out;
}

namespace {

struct SideConstants {
  double bias_constant = 0.0;      // leading bias of c_q, per h^(p+1-q)
  double variance_constant = 0.0;  // robust variance scaled by n_side * h0^(1+2q)
  std::size_t n = 0;
  double floor = 0.0;  // smallest h keeping the pilot fit identifiable
};

SideConstants side_constants(const Dataset& data, const DesignSpec& spec,
                             const InferenceConfig& config, Side side) {
  const int p = spec.p;
  const int po = p + config.bias_order_increment;

  std::vector<double> dist;
  for (const Observation& obs : data.observations)
    if (side_of(obs.z, data.cutoff) == side)
      dist.push_back(std::abs(obs.z - data.cutoff));
  SideConstants sc;
  sc.n = dist.size();
  const char* label = side == Side::Left ? "left" : "right";
  if (sc.n < static_cast<std::size_t>(po + 2)) {
    std::ostringstream msg;
    msg << "bandwidth selection: " << label << " side has " << sc.n
        << " observations, pilot fits need at least " << po + 2;
    throw sample_size_error(msg.str());
  }
  std::sort(dist.begin(), dist.end());
  const double span = dist.back();
  if (!(span > 0.0)) {
    std::ostringstream msg;
    msg << "bandwidth selection: " << label << " side has no spread in z";
    throw sample_size_error(msg.str());
  }
  // An order-po fit needs po + 1 distinct design points with positive weight,
  // which duplicated z values (ages, say) do not provide.
  std::vector<double> uniq = dist;
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < static_cast<std::size_t>(po + 1)) {
    std::ostringstream msg;
    msg << "bandwidth selection: " << label << " side has " << uniq.size()
        << " distinct z values, order-" << po << " pilot fits need at least "
        << po + 1;
    throw sample_size_error(msg.str());
  }
  // Smallest h keeping po + 2 observations and po + 1 distinct z values
  // strictly inside the window, padded so the farthest needed point retains
  // a usable kernel weight.
  sc.floor = std::max(dist[static_cast<std::size_t>(po + 1)],
                      uniq[static_cast<std::size_t>(po)]) *
             kFloorInflation;

  const double h0 = span * kSpanInflation;
  const SideFitDetail main_y =
      fit_side_detail(data, FitVar::Outcome, side, h0, p, spec.kernel,
                      config.use_survey_weights);
  const SideFitDetail pilot_y =
      fit_side_detail(data, FitVar::Outcome, side, h0, po, spec.kernel,
                      config.use_survey_weights);

  const double lead = main_y.loading(spec.q, p + 1) * pilot_y.coefficients[p + 1];
  sc.bias_constant = lead / std::pow(h0, p + 1 - spec.q);

  double v_rob;
  if (config.variance_estimator == VarianceEstimator::NearestNeighbor) {
    const SigmaField sig = nn_sigma(data, side, config.nn_neighbors, false);
    v_rob = accumulate_nn(pilot_y, spec.q, sig, false).vyy;
  } else {
    v_rob = accumulate_hc(pilot_y, nullptr, spec.q).vyy;
  }
  sc.variance_constant =
      v_rob * static_cast<double>(sc.n) * std::pow(h0, 1 + 2 * spec.q);
  return sc;
}

}  // namespace

double select_bandwidth(const Dataset& data, const DesignSpec& spec,
                        BandwidthSide side, const InferenceConfig& config) {
  spec.validate();
  config.validate();
  require_valid(data);

  if (side == BandwidthSide::Pooled) {
    const SideConstants left = side_constants(data, spec, config, Side::Left);
    const SideConstants right = side_constants(data, spec, config, Side::Right);
    const std::size_t n = left.n + right.n;
    const double b = std::hypot(left.bias_constant, right.bias_constant);
    const double v =
        left.variance_constant * (static_cast<double>(n) / left.n) +
        right.variance_constant * (static_cast<double>(n) / right.n);
    const double h = bandwidth_formula(v, b, spec.p, spec.q, n);
    return std::max({h, left.floor, right.floor});
  }

  const Side one = side == BandwidthSide::Left ? Side::Left : Side::Right;
  const SideConstants sc = side_constants(data, spec, config, one);
  const double h =
      bandwidth_formula(sc.variance_constant, sc.bias_constant, spec.p, spec.q, sc.n);
  return std::max(h, sc.floor);
}

namespace {

template <class F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
  const auto tag = [name](const char* what) {
    return std::string(name) + ": " + what;
  };
  try {
    return f();
  } catch (const parameter_error& e) {
    throw parameter_error(tag(e.what()));
  } catch (const sample_size_error& e) {
    throw sample_size_error(tag(e.what()));
  } catch (const singular_fit_error& e) {
    throw singular_fit_error(tag(e.what()));
  } catch (const weak_first_stage_error& e) {
    throw weak_first_stage_error(tag(e.what()));
  } catch (const degenerate_curvature_error& e) {
    throw degenerate_curvature_error(tag(e.what()));
  } catch (const schema_error& e) {
    throw schema_error(tag(e.what()));
  } catch (const config_error& e) {
    throw config_error(tag(e.what()));
  } catch (const io_error& e) {
    throw io_error(tag(e.what()));
  } catch (const error& e) {
    throw error(tag(e.what()));
  }
}

}  // namespace

EstimateResult run_design(const Dataset& data, const DesignSpec& spec,
                          const InferenceConfig& config) {
  run_stage("validate", [&] {
    spec.validate();
    config.validate();
    require_valid(data);
    return 0;
  });

  double h_left = 0.0, h_right = 0.0;
  run_stage("bandwidth", [&] {
    if (spec.bandwidth) {
      h_left = spec.bandwidth->left;
      h_right = spec.bandwidth->right;
    } else if (config.per_side_bandwidths) {
      h_left = select_bandwidth(data, spec, BandwidthSide::Left, config);
      h_right = select_bandwidth(data, spec, BandwidthSide::Right, config);
    } else {
      h_left = h_right = select_bandwidth(data, spec, BandwidthSide::Pooled, config);
    }
    return 0;
  });

  Dataset adjusted;
  const Dataset* work = &data;
  run_stage("covariates", [&] {
    if (spec.use_covariates) {
      if (data.covariate_names.empty())
        throw parameter_error(
            "use_covariates is set but the dataset declares no covariates");
      adjusted = covariate_adjust(data, spec, h_left, h_right,
                                  config.use_survey_weights);
      work = &adjusted;
    }
    return 0;
  });

  const PointEstimate pe = run_stage("estimate", [&] {
    return spec.kind == DesignKind::Fuzzy
               ? fuzzy_estimate(*work, spec, h_left, h_right,
                                config.use_survey_weights, config.first_stage_floor)
               : sharp_estimate(*work, spec, h_left, h_right,
                                config.use_survey_weights);
  });
  const double bias = run_stage(
      "bias", [&] { return estimate_bias(*work, spec, h_left, h_right, config); });
  const VarianceEstimate var = run_stage("variance", [&] {
    return estimate_variance(*work, spec, h_left, h_right, config);
  });
  const Interval iv = run_stage("interval", [&] {
    return rbc_interval(pe.tau, bias, var.robust, spec.alpha);
  });

  EstimateResult res;
  res.tau = pe.tau;
  res.bias = bias;
  res.se_conventional = std::sqrt(var.conventional);
  res.se_robust = std::sqrt(var.robust);
  res.ci_low = iv.low;
  res.ci_high = iv.high;
  res.p_value = iv.p_value;
  res.h_left = h_left;
  res.h_right = h_right;
  res.n_left = pe.n_left;
  res.n_right = pe.n_right;
  if (spec.kind == DesignKind::Fuzzy && pe.components.x_right && pe.components.x_left)
    res.first_stage_jump = *pe.components.x_right - *pe.components.x_left;
  return res;
}

}  // namespace rdlocal
