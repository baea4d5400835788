#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "nyqlab/counts.hpp"
#include "test_util.hpp"

using namespace nyqlab;
using testutil::diagonal_operator;
constexpr double kPi = std::numbers::pi;

TEST_CASE("count_above and plunge_width") {
  const auto spec = eigendecompose(diagonal_operator({0.9, 0.5, 0.1}));

  CHECK(count_above(spec, 0.5) == 2);  // threshold is inclusive
  CHECK(count_above(spec, 0.95) == 0);
  CHECK_THROWS_AS(count_above(spec, 0.0), std::invalid_argument);

  const auto spec2 = eigendecompose(diagonal_operator({0.99, 0.5, 0.01}));
  CHECK(plunge_width(spec2, 0.1) == 1);
  CHECK(plunge_width(spec2, 0.001) == 3);
  CHECK_THROWS_AS(plunge_width(spec2, 0.5), std::invalid_argument);

  // monotonicity in the thresholds
  const auto spec3 = eigendecompose(build_dpss(32, 0.25));
  int prev = spec3.size() + 1;
  for (double g : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const int c = count_above(spec3, g);
    CHECK(c <= prev);
    prev = c;
  }
  int prev_p = -1;
  for (double d : {0.25, 0.1, 0.05, 0.01}) {
    const int p = plunge_width(spec3, d);
    CHECK(p >= prev_p);
    prev_p = p;
  }
}

TEST_CASE("dpss count matches the 2NW density") {
  const auto spec = eigendecompose(build_dpss(128, 0.25));
  CHECK(std::abs(count_above(spec, 0.5) - 64) <= 2);
}

TEST_CASE("plunge widths fit a + b log N") {
  std::vector<double> scales{64, 128, 256}, plunges;
  for (double n : scales) {
    const auto spec = eigendecompose(build_dpss(static_cast<int>(n), 0.25));
    plunges.push_back(plunge_width(spec, 0.1));
  }
  const auto [b, rel] = detail::log_fit(scales, plunges);
  CHECK(b > 0.0);
  CHECK(rel <= 0.25);
}

TEST_CASE("upper bound certificate") {
  SUBCASE("two exact ones, empty plunge") {
    const auto spec = eigendecompose(diagonal_operator({1.0, 1.0, 0.0, 0.0}));
    const double bound = upper_bound_certificate(spec, 1e-9, 0.1);
    CHECK(bound == doctest::Approx(2.0).epsilon(1e-6));
  }

  SUBCASE("dpss 64 exceeds the constructed family") {
    const auto op = build_dpss(64, 0.25);
    const auto spec = eigendecompose(op);
    const double bound = upper_bound_certificate(spec, 0.2, 0.1);
    const double expect =
        32.0 / 0.6 + plunge_width(spec, 0.1) / 0.1;
    CHECK(bound == doctest::Approx(expect).epsilon(1e-12));
    const auto fam =
        construct_family(spec, op, select_parameters(0.2, 0.02));
    CHECK(static_cast<double>(fam.size()) <= bound);
    CHECK(fam.size() == 36);
  }

  SUBCASE("epsilon >= 1/2 rejected") {
    const auto spec = eigendecompose(diagonal_operator({0.5}));
    CHECK_THROWS_AS(upper_bound_certificate(spec, 0.5, 0.1),
                    std::invalid_argument);
  }
}

TEST_CASE("dpss sweep") {
  const std::function<RealOperator(double)> factory = [](double n) {
    return build_dpss(static_cast<int>(n), 0.25);
  };
  const auto params = select_parameters(0.2, 0.02);
  const auto sweep = run_sweep<double>({64, 128, 256}, factory, 0.5, 0.1,
                                       0.5, 1, &params);

  REQUIRE(sweep.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& e = sweep.entries[i];
    // density = count / N against the 2W reference
    CHECK(std::abs(e.density / 0.5 - 1.0) <= 0.05);
    CHECK(std::abs(e.trace - e.scale * 0.5) <= 1e-9 * e.trace);
    CHECK(e.family_size >= 0);
    CHECK(static_cast<double>(e.family_size) <= e.upper_bound);
    if (i) CHECK(e.plunge >= sweep.entries[i - 1].plunge);
  }
  CHECK(sweep.fit_relative_residual <= 0.25);
  CHECK(sweep.reference_density == 0.5);
}

TEST_CASE("nystrom sweep converges to the Nyquist density") {
  const std::function<RealOperator(double)> factory = [](double r) {
    const SetSpec t = SetSpec::interval(0, 1);
    const BandSpec band = BandSpec::centered_band(kPi);
    return build_nystrom(t, band, Grid(1, 2.0 * r, 0.125), r);
  };
  const auto sweep =
      run_sweep<double>({4, 8, 16}, factory, 0.5, 0.1, 1.0, 1, nullptr);
  CHECK(std::abs(sweep.entries.back().density - 1.0) <= 0.10);
  CHECK(std::abs(sweep.entries.back().trace - 16.0) <= 16.0 * 1e-9);
  // squared-trace defect shrinks with r on the fixed family
  double prev = 1e300;
  for (double r : {4.0, 8.0, 16.0}) {
    const auto spec = eigendecompose(factory(r));
    const double defect = (spec.sum_values() - spec.sum_squares()) / r;
    CHECK(defect < prev);
    prev = defect;
  }
}

TEST_CASE("sweep input validation") {
  const std::function<RealOperator(double)> factory = [](double n) {
    return build_dpss(static_cast<int>(n), 0.25);
  };
  CHECK_THROWS_AS(run_sweep<double>({64}, factory, 0.5, 0.1, 0.5, 1, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      run_sweep<double>({64, 32, 128}, factory, 0.5, 0.1, 0.5, 1, nullptr),
      std::invalid_argument);
}

TEST_CASE("sweep failures carry the scale annotation") {
  const std::function<RealOperator(double)> factory = [](double n) {
    if (n > 100) throw std::runtime_error("synthetic failure");
    return build_dpss(static_cast<int>(n), 0.25);
  };
  try {
    run_sweep<double>({64, 128, 256}, factory, 0.5, 0.1, 0.5, 1, nullptr);
    FAIL("expected propagation");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("scale 128") != std::string::npos);
  }
}
