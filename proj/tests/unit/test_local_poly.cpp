#include <doctest.h>

#include <cmath>
#include <vector>

#include "rdlocal/kernels.hpp"
#include "rdlocal/local_poly.hpp"
#include "support/oracles.hpp"

using namespace rdlocal;

namespace {

Dataset linear_dataset() {
  // y = 2 + 3 z on both sides, no noise
  Dataset d;
  for (int i = -10; i <= 10; ++i) {
    const double z = i / 10.0 + (i >= 0 ? 0.05 : 0.0);
    d.observations.push_back({z, 2.0 + 3.0 * z, 0.0, {}, 1.0});
  }
  return d;
}

}  // namespace

TEST_CASE("kernel weights") {
  CHECK(kernel_weight(KernelKind::Triangular, 0.0, 0.0, 1.0) == 1.0);
  CHECK(kernel_weight(KernelKind::Triangular, 0.5, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(kernel_weight(KernelKind::Triangular, 1.0, 0.0, 1.0) == 0.0);
  CHECK(kernel_weight(KernelKind::Triangular, -2.0, 0.0, 1.0) == 0.0);
  CHECK(kernel_weight(KernelKind::Uniform, 0.99, 0.0, 1.0) == 1.0);
  CHECK(kernel_weight(KernelKind::Uniform, 1.0, 0.0, 1.0) == 0.0);
  CHECK(kernel_weight(KernelKind::Triangular, 3.25, 3.0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(kernel_weight(KernelKind::Triangular, 0.0, 0.0, 0.0),
                  parameter_error);
  CHECK_THROWS_AS(kernel_weight(KernelKind::Uniform, 0.0, 0.0, -1.0), parameter_error);
}

TEST_CASE("weighted_polyfit recovers exact polynomials") {
  oracle::SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const double c0 = rng.uniform(-2, 2), c1 = rng.uniform(-2, 2),
                 c2 = rng.uniform(-2, 2);
    const double center = rng.uniform(-1, 1);
    std::vector<WPoint> pts;
    for (int i = 0; i < 40; ++i) {
      const double z = rng.uniform(-3, 3);
      const double dz = z - center;
      pts.push_back({z, c0 + c1 * dz + c2 * dz * dz, rng.uniform(0.1, 2.0)});
    }
    const std::vector<double> c = weighted_polyfit(pts, center, 2);
    CHECK(c[0] == doctest::Approx(c0).epsilon(1e-10));
    CHECK(c[1] == doctest::Approx(c1).epsilon(1e-10));
    CHECK(c[2] == doctest::Approx(c2).epsilon(1e-10));
  }
}

TEST_CASE("weighted_polyfit agrees with the normal-equations oracle") {
  oracle::SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int order = trial % 3;
    const int n = 5 + static_cast<int>(rng.u01() * 50);
    std::vector<WPoint> pts;
    std::vector<double> z, y, w;
    for (int i = 0; i < n; ++i) {
      z.push_back(rng.uniform(-2, 2));
      y.push_back(rng.normal());
      w.push_back(rng.uniform(0.05, 3.0));
      pts.push_back({z.back(), y.back(), w.back()});
    }
    const double center = rng.uniform(-0.5, 0.5);
    const std::vector<double> lib = weighted_polyfit(pts, center, order);
    const std::vector<double> ref = oracle::polyfit(z, y, w, center, order);
    for (int j = 0; j <= order; ++j)
      CHECK(lib[j] == doctest::Approx(ref[j]).epsilon(1e-9));
  }
}

TEST_CASE("weighted_polyfit ignores nonpositive weights") {
  std::vector<WPoint> pts = {{-1, 1, 1}, {0, 2, 1}, {1, 3, 1}, {5, 99, 0.0}};
  const std::vector<double> c = weighted_polyfit(pts, 0.0, 1);
  CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted_polyfit is invariant to weight rescaling") {
  oracle::SplitMix64 rng(23);
  std::vector<WPoint> a, b;
  for (int i = 0; i < 25; ++i) {
    const double z = rng.uniform(-1, 1), y = rng.normal(), w = rng.uniform(0.2, 1.5);
    a.push_back({z, y, w});
    b.push_back({z, y, 7.25 * w});
  }
  const auto ca = weighted_polyfit(a, 0.0, 2);
  const auto cb = weighted_polyfit(b, 0.0, 2);
  for (int j = 0; j < 3; ++j) CHECK(ca[j] == doctest::Approx(cb[j]).epsilon(1e-12));
}

TEST_CASE("weighted_polyfit errors") {
  std::vector<WPoint> few = {{0, 1, 1}, {1, 2, 1}};
  CHECK_THROWS_AS((void)weighted_polyfit(few, 0.0, 2), sample_size_error);

  // all mass at a single z: the linear column is degenerate
  std::vector<WPoint> flat = {{1, 1, 1}, {1, 2, 1}, {1, 3, 1}};
  try {
    (void)weighted_polyfit(flat, 0.0, 1);
    FAIL("expected singular_fit_error");
  } catch (const singular_fit_error& e) {
    CHECK(std::string(e.what()).find("z^1") != std::string::npos);
  }

  CHECK_THROWS_AS((void)weighted_polyfit(few, 0.0, -1), parameter_error);
}

TEST_CASE("polyval evaluates in the shifted basis") {
  const std::vector<double> c = {1.0, -2.0, 0.5};
  CHECK(polyval(c, 0.0) == 1.0);
  CHECK(polyval(c, 2.0) == doctest::Approx(1.0 - 4.0 + 2.0));
}

TEST_CASE("fit_side restricts to one side and the bandwidth window") {
  const Dataset d = linear_dataset();
  DesignSpec spec;
  spec.p = 1;

  const FitSide left = fit_side(d, spec, FitVar::Outcome, Side::Left, 0.55);
  CHECK(left.side == Side::Left);
  // z in (-0.55, 0): i in {-5..-1}
  CHECK(left.n_effective == 5);
  CHECK(left.bandwidth == 0.55);
  CHECK(left.coefficients[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(left.coefficients[1] == doctest::Approx(3.0).epsilon(1e-10));

  const FitSide right = fit_side(d, spec, FitVar::Outcome, Side::Right, 0.6);
  CHECK(right.coefficients[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(right.n_effective == 6);
}

TEST_CASE("fit_side respects survey weights only when asked") {
  Dataset d = linear_dataset();
  // corrupt one left point but give it huge survey weight
  d.observations[2].y += 10.0;
  d.observations[2].weight = 50.0;
  DesignSpec spec;
  spec.p = 1;
  const FitSide plain = fit_side(d, spec, FitVar::Outcome, Side::Left, 2.0, false);
  const FitSide weighted = fit_side(d, spec, FitVar::Outcome, Side::Left, 2.0, true);
  CHECK(std::abs(plain.coefficients[0] - weighted.coefficients[0]) > 1e-6);
}

TEST_CASE("fit_side_detail influence reproduces the coefficients") {
  oracle::SplitMix64 rng(31);
  Dataset d;
  for (int i = 0; i < 60; ++i) {
    const double z = rng.uniform(-1, 1);
    d.observations.push_back({z, rng.normal(), 0.0, {}, 1.0});
  }
  const SideFitDetail det = fit_side_detail(d, FitVar::Outcome, Side::Right, 0.8, 2,
                                            KernelKind::Triangular, false);
  for (int j = 0; j <= 2; ++j) {
    const std::vector<double> phi = det.influence(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < det.rows.size(); ++i) acc += phi[i] * det.resp[i];
    CHECK(acc == doctest::Approx(det.coefficients[j]).epsilon(1e-9));
  }
}

TEST_CASE("fit_side_detail loadings are a partition of unity over the basis") {
  oracle::SplitMix64 rng(37);
  Dataset d;
  for (int i = 0; i < 80; ++i) {
    const double z = rng.uniform(-2, 2);
    d.observations.push_back({z, rng.normal(), 0.0, {}, rng.uniform(0.5, 1.5)});
  }
  const SideFitDetail det = fit_side_detail(d, FitVar::Outcome, Side::Left, 1.5, 2,
                                            KernelKind::Triangular, true);
  for (int q = 0; q <= 2; ++q)
    for (int j = 0; j <= 2; ++j)
      CHECK(det.loading(q, j) == doctest::Approx(q == j ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("fit_side throws sample_size_error when the window is starved") {
  const Dataset d = linear_dataset();
  DesignSpec spec;
  spec.p = 2;
  CHECK_THROWS_AS((void)fit_side(d, spec, FitVar::Outcome, Side::Left, 0.15),
                  sample_size_error);
}
