#include "rdlocal/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "rdlocal/local_poly.hpp"

namespace rdlocal {

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

double Rng::normal(double sd) {
  const double u1 = uniform01();
  const double u2 = uniform01();
  // 1 - u1 lies in (0, 1], keeping the log finite.
  return sd * std::sqrt(-2.0 * std::log(1.0 - u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw parameter_error("bernoulli: probability must lie in [0, 1]");
  return uniform01() < p ? 1 : 0;
}

void DgpSpec::validate() const {
  if (baseline.empty()) throw parameter_error("DgpSpec: baseline must be nonempty");
  if (!(noise_sd >= 0.0)) throw parameter_error("DgpSpec: noise_sd must be nonnegative");
  if (!(z_low < 0.0 && z_high > 0.0))
    throw parameter_error("DgpSpec: z range must straddle the cutoff at 0");
  if (n < 50) throw parameter_error("DgpSpec: n must be at least 50");
  for (double c : {compliance_left, compliance_right})
    if (!(c >= 0.0 && c <= 1.0))
      throw parameter_error("DgpSpec: compliance rates must lie in [0, 1]");
}

double DgpSpec::sharp_truth(int q) const {
  if (q == 0) return jump + treatment_effect * (compliance_right - compliance_left);
  if (q == 1) return kink;
  throw parameter_error("DgpSpec: truth defined for q in {0, 1}");
}

double DgpSpec::fuzzy_truth() const { return treatment_effect; }

Dataset generate(const DgpSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Dataset data;
  data.cutoff = 0.0;
  data.observations.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    Observation obs;
    obs.z = rng.uniform(spec.z_low, spec.z_high);
    const bool right = obs.z >= 0.0;
    obs.x = rng.bernoulli(right ? spec.compliance_right : spec.compliance_left);
    double mean = polyval(spec.baseline, obs.z) + spec.treatment_effect * obs.x;
    if (right) mean += spec.jump + spec.kink * obs.z;
    if (spec.binary_outcome) {
      obs.y = rng.bernoulli(std::clamp(mean, 0.0, 1.0));
    } else {
      obs.y = mean + rng.normal(spec.noise_sd);
    }
    data.observations.push_back(std::move(obs));
  }
  return data;
}

McReport run_monte_carlo(const DgpSpec& dgp, const DesignSpec& design,
                         const InferenceConfig& config, int replications,
                         int threads) {
  dgp.validate();
  design.validate();
  config.validate();
  if (replications < 1)
    throw parameter_error("run_monte_carlo: replications must be at least 1");

  const double truth = design.kind == DesignKind::Fuzzy ? dgp.fuzzy_truth()
                                                        : dgp.sharp_truth(design.q);

  struct RepOut {
    bool ok = false;
    double tau = 0.0, low = 0.0, high = 0.0;
  };
  std::vector<RepOut> reps(static_cast<std::size_t>(replications));

  unsigned nthreads = threads > 0 ? static_cast<unsigned>(threads)
                                  : std::thread::hardware_concurrency();
  nthreads = std::clamp<unsigned>(nthreads, 1,
                                  static_cast<unsigned>(replications));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replications) return;
      DgpSpec draw = dgp;
      draw.seed = dgp.seed + static_cast<std::uint64_t>(r);
      try {
        const Dataset data = generate(draw);
        const EstimateResult res = run_design(data, design, config);
        reps[static_cast<std::size_t>(r)] = {true, res.tau, res.ci_low, res.ci_high};
      } catch (const error&) {
        // counted below; a failed replication must not sink the study
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  McReport report;
  report.replications = replications;
  report.truth = truth;
  double sum = 0.0, sum_sq_err = 0.0, sum_len = 0.0;
  int covered = 0, ok = 0;
  for (const RepOut& r : reps) {
    if (!r.ok) {
      ++report.failures;
      continue;
    }
    ++ok;
    sum += r.tau;
    sum_sq_err += (r.tau - truth) * (r.tau - truth);
    sum_len += r.high - r.low;
    if (r.low <= truth && truth <= r.high) ++covered;
  }
  if (report.failures * 10 > replications) {
    std::ostringstream msg;
    msg << "run_monte_carlo: " << report.failures << " of " << replications
        << " replications failed (over 10%)";
    throw error(msg.str());
  }
  report.mean_tau = sum / ok;
  report.bias = report.mean_tau - truth;
  report.rmse = std::sqrt(sum_sq_err / ok);
  report.coverage = static_cast<double>(covered) / ok;
  report.mean_ci_length = sum_len / ok;
  return report;
}

DgpSpec standard_sharp_dgp() {
  DgpSpec spec;
  spec.baseline = {0.5, 0.8, -0.6};
  spec.jump = 1.0;
  spec.noise_sd = 1.0;
  spec.z_low = -1.0;
  spec.z_high = 1.0;
  spec.n = 2000;
  spec.seed = 20240601;
  return spec;
}

DgpSpec standard_fuzzy_dgp() {
  DgpSpec spec;
  spec.baseline = {0.5, 0.8, -0.6};
  spec.jump = 0.0;
  spec.compliance_left = 0.25;
  spec.compliance_right = 0.75;
  spec.treatment_effect = 1.5;
  spec.noise_sd = 1.0;
  spec.z_low = -1.0;
  spec.z_high = 1.0;
  spec.n = 20000;
  spec.seed = 20240602;
  return spec;
}

DgpSpec binary_fuzzy_dgp() {
  DgpSpec spec;
  spec.baseline = {0.5, 0.002};
  spec.jump = 0.0;
  spec.compliance_left = 0.20;
  spec.compliance_right = 0.34;
  spec.treatment_effect = 0.3;
  spec.z_low = -20.0;
  spec.z_high = 20.0;
  spec.n = 20000;
  spec.seed = 20240603;
  spec.binary_outcome = true;
  return spec;
}

}  // namespace rdlocal
