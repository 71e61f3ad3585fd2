#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdlocal/estimators.hpp"
#include "support/oracles.hpp"

using namespace rdlocal;

namespace {

Dataset step_data(double jump, int n, std::uint64_t seed) {
  oracle::SplitMix64 rng(seed);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    double z = rng.uniform(-1, 1);
    if (z == 0.0) z = 0.5;
    Observation obs;
    obs.z = z;
    obs.y = 0.3 + 0.7 * z + (z >= 0 ? jump : 0.0);
    obs.x = z >= 0 ? 1.0 : 0.0;
    d.observations.push_back(obs);
  }
  return d;
}

Dataset mirrored(const Dataset& d) {
  Dataset m = d;
  for (Observation& obs : m.observations) obs.z = -obs.z;
  return m;
}

}  // namespace

TEST_CASE("sharp level estimate recovers a pure step exactly") {
  const Dataset d = step_data(1.75, 400, 3);
  DesignSpec spec;
  spec.p = 1;
  const PointEstimate pe = sharp_estimate(d, spec, 0.8, 0.8);
  CHECK(pe.tau == doctest::Approx(1.75).epsilon(1e-10));
  CHECK(pe.n_left > 0);
  CHECK(pe.n_right > 0);
  CHECK(pe.components.y_right - pe.components.y_left ==
        doctest::Approx(pe.tau).epsilon(1e-12));
  CHECK_FALSE(pe.components.x_left.has_value());
}

TEST_CASE("kink estimate recovers the slope change of |z| exactly") {
  Dataset d;
  oracle::SplitMix64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const double z = rng.uniform(-1, 1);
    d.observations.push_back({z, std::abs(z), 0.0, {}, 1.0});
  }
  DesignSpec spec;
  spec.p = 1;
  spec.q = 1;
  const PointEstimate pe = sharp_estimate(d, spec, 0.7, 0.7);
  CHECK(pe.tau == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("kink estimate is zero under a pure level jump") {
  const Dataset d = step_data(3.0, 500, 7);
  DesignSpec spec;
  spec.p = 1;
  spec.q = 1;
  const PointEstimate pe = sharp_estimate(d, spec, 0.9, 0.9);
  CHECK(pe.tau == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mirroring z negates level estimates and keeps kink estimates") {
  // Jump 1.2 and slope change 0.8 at the cutoff. Reflecting z moves the step
  // to the other side (level negates) while the slope change is unaffected.
  Dataset d;
  oracle::SplitMix64 rng(11);
  for (int i = 0; i < 350; ++i) {
    double z = rng.uniform(-1, 1);
    if (z == 0.0) z = 0.5;
    Observation obs;
    obs.z = z;
    obs.y = 0.3 + 0.5 * z + (z >= 0 ? 1.2 + 0.8 * z : 0.0);
    d.observations.push_back(obs);
  }
  const Dataset m = mirrored(d);
  DesignSpec level;
  level.p = 2;
  DesignSpec kink;
  kink.p = 1;
  kink.q = 1;

  const double tau_level = sharp_estimate(d, level, 0.8, 0.8).tau;
  const double tau_level_m = sharp_estimate(m, level, 0.8, 0.8).tau;
  CHECK(tau_level == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(tau_level_m == doctest::Approx(-tau_level).epsilon(1e-10));

  const double tau_kink = sharp_estimate(d, kink, 0.8, 0.8).tau;
  const double tau_kink_m = sharp_estimate(m, kink, 0.8, 0.8).tau;
  CHECK(tau_kink == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(tau_kink_m == doctest::Approx(tau_kink).epsilon(1e-8));
}

TEST_CASE("fuzzy equals sharp under perfect compliance") {
  oracle::SplitMix64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d;
    for (int i = 0; i < 200; ++i) {
      const double z = rng.uniform(-1, 1);
      Observation obs;
      obs.z = z;
      obs.x = z >= 0 ? 1.0 : 0.0;
      obs.y = rng.normal() + 0.5 * z + 2.0 * obs.x;
      d.observations.push_back(obs);
    }
    DesignSpec spec;
    spec.kind = DesignKind::Fuzzy;
    spec.p = 1;
    const double sharp = sharp_estimate(d, spec, 0.75, 0.75).tau;
    const double fuzzy = fuzzy_estimate(d, spec, 0.75, 0.75).tau;
    CHECK(fuzzy == doctest::Approx(sharp).epsilon(1e-10));
  }
}

TEST_CASE("fuzzy scales the outcome jump by the first stage") {
  Dataset d = step_data(0.0, 600, 17);
  for (Observation& obs : d.observations) {
    // deterministic compliance jump of 0.5 built from two half-populations
    obs.x = obs.z >= 0 ? 0.5 : 0.0;
    obs.y = 0.2 + 0.1 * obs.z + 1.5 * obs.x;
  }
  DesignSpec spec;
  spec.kind = DesignKind::Fuzzy;
  spec.p = 1;
  const PointEstimate pe = fuzzy_estimate(d, spec, 0.8, 0.8);
  CHECK(*pe.components.x_right - *pe.components.x_left ==
        doctest::Approx(0.5).epsilon(1e-10));
  CHECK(pe.tau == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("fuzzy throws a typed error when the first stage is flat") {
  Dataset d = step_data(1.0, 300, 19);
  for (Observation& obs : d.observations) obs.x = 0.5;
  DesignSpec spec;
  spec.kind = DesignKind::Fuzzy;
  spec.p = 1;
  CHECK_THROWS_AS((void)fuzzy_estimate(d, spec, 0.8, 0.8), weak_first_stage_error);
  try {
    (void)fuzzy_estimate(d, spec, 0.8, 0.8);
  } catch (const weak_first_stage_error& e) {
    CHECK(std::string(e.what()).find("floor") != std::string::npos);
  }
}

TEST_CASE("covariate adjustment recovers an exact linear confound") {
  oracle::SplitMix64 rng(23);
  Dataset clean, confounded;
  clean.covariate_names = {};
  confounded.covariate_names = {"c"};
  for (int i = 0; i < 400; ++i) {
    const double z = rng.uniform(-1, 1);
    const double c = rng.normal();
    const double y0 = 0.4 + 0.9 * z - 0.3 * z * z + (z >= 0 ? 1.0 : 0.0);
    clean.observations.push_back({z, y0, 0.0, {}, 1.0});
    confounded.observations.push_back({z, y0 + 2.5 * c, 0.0, {c}, 1.0});
  }
  DesignSpec spec;
  spec.p = 2;
  spec.use_covariates = true;
  const Dataset adjusted = covariate_adjust(confounded, spec, 0.8, 0.8);
  CHECK(adjusted.covariate_names.empty());
  // the linear confound is removed exactly, so estimates on adjusted data
  // coincide with estimates on the uncontaminated outcome
  const double tau_clean = sharp_estimate(clean, spec, 0.8, 0.8).tau;
  const double tau_adj = sharp_estimate(adjusted, spec, 0.8, 0.8).tau;
  CHECK(tau_adj == doctest::Approx(tau_clean).epsilon(1e-9));
}

TEST_CASE("adjustment strips the covariates and cannot be applied twice") {
  oracle::SplitMix64 rng(29);
  Dataset d;
  d.covariate_names = {"a", "b"};
  for (int i = 0; i < 500; ++i) {
    const double z = rng.uniform(-1, 1);
    const double a = rng.normal(), b = rng.u01();
    const double y = 0.1 + z + 0.5 * z * z + (z >= 0 ? 0.7 : 0.0) + 1.1 * a - 0.6 * b +
                     0.05 * rng.normal();
    d.observations.push_back({z, y, 0.0, {a, b}, 1.0});
  }
  DesignSpec spec;
  spec.p = 1;
  spec.use_covariates = true;

  const Dataset adj = covariate_adjust(d, spec, 0.6, 0.6);
  CHECK(adj.covariate_names.empty());
  CHECK(adj.observations.size() == d.observations.size());
  CHECK(adj.observations.front().covariates.empty());
  CHECK(std::isfinite(sharp_estimate(adj, spec, 0.6, 0.6).tau));
  CHECK_THROWS_AS((void)covariate_adjust(adj, spec, 0.6, 0.6), parameter_error);
}

TEST_CASE("fuzzy adjustment removes the covariate from both equations") {
  oracle::SplitMix64 rng(31);
  Dataset d;
  d.covariate_names = {"c"};
  for (int i = 0; i < 400; ++i) {
    const double z = rng.uniform(-1, 1);
    const double c = rng.normal();
    const double x = (z >= 0 ? 0.6 : 0.1) + 0.2 * c;
    const double y = 0.3 + 0.4 * z + 1.5 * x + 0.8 * c;
    d.observations.push_back({z, y, x, {c}, 1.0});
  }
  DesignSpec spec;
  spec.kind = DesignKind::Fuzzy;
  spec.p = 1;
  spec.use_covariates = true;
  const Dataset adjusted = covariate_adjust(d, spec, 0.7, 0.7);
  const PointEstimate pe = fuzzy_estimate(adjusted, spec, 0.7, 0.7);
  CHECK(pe.tau == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(*pe.components.x_right - *pe.components.x_left ==
        doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("a constant covariate is reported by name") {
  Dataset d = step_data(1.0, 200, 37);
  d.covariate_names = {"intercept_clone"};
  for (Observation& obs : d.observations) obs.covariates = {1.0};
  DesignSpec spec;
  spec.p = 1;
  spec.use_covariates = true;
  try {
    (void)covariate_adjust(d, spec, 0.8, 0.8);
    FAIL("expected singular_fit_error");
  } catch (const singular_fit_error& e) {
    CHECK(std::string(e.what()).find("intercept_clone") != std::string::npos);
  }
}

TEST_CASE("covariate_adjust requires declared covariates") {
  const Dataset d = step_data(1.0, 100, 41);
  DesignSpec spec;
  spec.p = 1;
  CHECK_THROWS_AS((void)covariate_adjust(d, spec, 0.5, 0.5), parameter_error);
}
