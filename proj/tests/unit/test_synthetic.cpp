#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rdlocal/synthetic.hpp"

using namespace rdlocal;

TEST_CASE("rng mappings match their definitions over the raw engine") {
  std::mt19937_64 raw(977);
  Rng rng(977);
  for (int i = 0; i < 200; ++i) {
    const double expect = static_cast<double>(raw() >> 11) * 0x1.0p-53;
    CHECK(rng.uniform01() == expect);
  }

  std::mt19937_64 raw2(31);
  Rng rng2(31);
  for (int i = 0; i < 50; ++i) {
    const double u1 = static_cast<double>(raw2() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(raw2() >> 11) * 0x1.0p-53;
    const double expect = 2.0 * std::sqrt(-2.0 * std::log(1.0 - u1)) *
                          std::cos(2.0 * 3.14159265358979323846 * u2);
    CHECK(rng2.normal(2.0) == doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("rng edge behavior") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform(2.0, 5.0);
    CHECK(v >= 2.0);
    CHECK(v < 5.0);
    CHECK(rng.bernoulli(0.0) == 0);
    CHECK(rng.bernoulli(1.0) == 1);
    CHECK(rng.normal(0.0) == 0.0);
  }
  CHECK_THROWS_AS((void)rng.bernoulli(-0.1), parameter_error);
  CHECK_THROWS_AS((void)rng.bernoulli(1.5), parameter_error);
}

TEST_CASE("generation is deterministic in the seed") {
  DgpSpec spec = standard_sharp_dgp();
  spec.n = 80;
  const Dataset a = generate(spec);
  const Dataset b = generate(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.observations[i].z == b.observations[i].z);
    CHECK(a.observations[i].y == b.observations[i].y);
    CHECK(a.observations[i].x == b.observations[i].x);
  }
  spec.seed += 1;
  const Dataset c = generate(spec);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.observations[i].z != c.observations[i].z) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("the noise draw is consumed even at zero noise") {
  // turning noise off must not shift the z and x streams
  DgpSpec noisy = standard_fuzzy_dgp();
  noisy.n = 120;
  DgpSpec quiet = noisy;
  quiet.noise_sd = 0.0;
  const Dataset a = generate(noisy);
  const Dataset b = generate(quiet);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.observations[i].z == b.observations[i].z);
    CHECK(a.observations[i].x == b.observations[i].x);
  }
}

TEST_CASE("generated values respect their documented ranges") {
  DgpSpec spec = binary_fuzzy_dgp();
  spec.n = 400;
  const Dataset d = generate(spec);
  for (const Observation& obs : d.observations) {
    CHECK(obs.z >= spec.z_low);
    CHECK(obs.z < spec.z_high);
    CHECK((obs.x == 0.0 || obs.x == 1.0));
    CHECK((obs.y == 0.0 || obs.y == 1.0));
    CHECK(obs.weight == 1.0);
  }
}

TEST_CASE("noiseless generation reproduces the mean function exactly") {
  DgpSpec spec;
  spec.baseline = {0.5, 0.8, -0.6};
  spec.jump = 1.0;
  spec.kink = -0.4;
  spec.noise_sd = 0.0;
  spec.n = 200;
  spec.seed = 5;
  const Dataset d = generate(spec);
  for (const Observation& obs : d.observations) {
    double mean = 0.5 + 0.8 * obs.z - 0.6 * obs.z * obs.z;
    if (obs.z >= 0.0) mean += 1.0 - 0.4 * obs.z;
    CHECK(obs.y == doctest::Approx(mean).epsilon(1e-15));
  }
}

TEST_CASE("dgp validation rejects malformed specifications") {
  DgpSpec spec;
  spec.baseline = {};
  CHECK_THROWS_AS(spec.validate(), parameter_error);
  spec = {};
  spec.noise_sd = -1.0;
  CHECK_THROWS_AS(spec.validate(), parameter_error);
  spec = {};
  spec.z_low = 0.1;
  CHECK_THROWS_AS(spec.validate(), parameter_error);
  spec = {};
  spec.n = 10;
  CHECK_THROWS_AS(spec.validate(), parameter_error);
  spec = {};
  spec.compliance_right = 1.2;
  CHECK_THROWS_AS(spec.validate(), parameter_error);
}

TEST_CASE("estimand helpers") {
  const DgpSpec sharp = standard_sharp_dgp();
  CHECK(sharp.sharp_truth(0) == 1.0);
  CHECK(sharp.sharp_truth(1) == 0.0);
  const DgpSpec fz = standard_fuzzy_dgp();
  CHECK(fz.sharp_truth(0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(fz.fuzzy_truth() == 1.5);
  CHECK_THROWS_AS((void)sharp.sharp_truth(2), parameter_error);
}

TEST_CASE("a tiny study equals its replications aggregated by hand") {
  DgpSpec dgp = standard_sharp_dgp();
  dgp.n = 600;
  DesignSpec design;
  design.p = 1;
  InferenceConfig config;

  const McReport rep = run_monte_carlo(dgp, design, config, 3, 1);
  REQUIRE(rep.failures == 0);

  double sum = 0.0, sq = 0.0, len = 0.0;
  int covered = 0;
  const double truth = dgp.sharp_truth(0);
  for (int r = 0; r < 3; ++r) {
    DgpSpec draw = dgp;
    draw.seed = dgp.seed + static_cast<std::uint64_t>(r);
    const EstimateResult res = run_design(generate(draw), design, config);
    sum += res.tau;
    sq += (res.tau - truth) * (res.tau - truth);
    len += res.ci_high - res.ci_low;
    if (res.ci_low <= truth && truth <= res.ci_high) ++covered;
  }
  CHECK(rep.truth == truth);
  CHECK(rep.mean_tau == doctest::Approx(sum / 3).epsilon(1e-15));
  CHECK(rep.rmse == doctest::Approx(std::sqrt(sq / 3)).epsilon(1e-15));
  CHECK(rep.mean_ci_length == doctest::Approx(len / 3).epsilon(1e-15));
  CHECK(rep.coverage == doctest::Approx(covered / 3.0).epsilon(1e-15));
}

TEST_CASE("study results do not depend on the thread count") {
  DgpSpec dgp = standard_sharp_dgp();
  dgp.n = 400;
  DesignSpec design;
  design.p = 1;
  InferenceConfig config;
  const McReport one = run_monte_carlo(dgp, design, config, 12, 1);
  const McReport four = run_monte_carlo(dgp, design, config, 12, 4);
  CHECK(one.mean_tau == four.mean_tau);
  CHECK(one.rmse == four.rmse);
  CHECK(one.coverage == four.coverage);
  CHECK(one.mean_ci_length == four.mean_ci_length);
  CHECK(one.failures == four.failures);
}

TEST_CASE("a design that always fails aborts the study with a typed error") {
  DgpSpec dgp = standard_fuzzy_dgp();
  dgp.n = 300;
  // Everyone treated on both sides: the treatment is exactly constant, so the
  // estimated first-stage jump sits at rounding-error level in every draw.
  dgp.compliance_left = 1.0;
  dgp.compliance_right = 1.0;
  DesignSpec design;
  design.kind = DesignKind::Fuzzy;
  design.p = 1;
  design.bandwidth = FixedBandwidth{0.8, 0.8};
  InferenceConfig config;
  CHECK_THROWS_AS((void)run_monte_carlo(dgp, design, config, 10, 2), error);
}

TEST_CASE("moderate study stays near nominal behavior") {
  DgpSpec dgp = standard_sharp_dgp();
  dgp.n = 1000;
  DesignSpec design;
  design.p = 1;
  InferenceConfig config;
  const McReport rep = run_monte_carlo(dgp, design, config, 40, 0);
  CHECK(rep.failures == 0);
  CHECK(std::abs(rep.bias) < 0.25);
  CHECK(rep.coverage >= 0.7);
  CHECK(rep.coverage <= 1.0);
  CHECK(rep.rmse > 0.0);
  CHECK(rep.mean_ci_length > 0.0);
}
