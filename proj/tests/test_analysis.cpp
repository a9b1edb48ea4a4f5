#include <cmath>
#include <vector>

#include "doctest.h"
#include "memsyn/analysis.hpp"
#include "memsyn/errors.hpp"

using namespace memsyn;

TEST_CASE("delta_g examples") {
  CHECK(delta_g(581e-6, 581e-6) == 0.0);
  CHECK(delta_g(500e-6, 600e-6) == doctest::Approx(0.2));
  CHECK(delta_g(554e-6, 443.2e-6) == doctest::Approx(-0.2));
  CHECK_THROWS_AS(delta_g(0.0, 1.0), InvalidInput);
}

TEST_CASE("on_off_ratio examples") {
  CHECK(on_off_ratio(22e3, 1e3) == doctest::Approx(22.0));
  CHECK(on_off_ratio(470.0, 470.0) == 1.0);
  CHECK(on_off_ratio(34.0 * 330.0, 330.0) == doctest::Approx(34.0));
  CHECK_THROWS_AS(on_off_ratio(1.0, 0.0), InvalidInput);
}

TEST_CASE("switching_power on constructed traces") {
  std::vector<TraceSample> up{{0.0, 0.0, 0.0, 0.0, 0.1, 0.0},
                              {1.0, 1.0, 1.0, 45e-6, 0.6, 0.0},
                              {2.0, 1.0, 1.0, 1e-3, 0.9, 0.0}};
  const SwitchingPower sp = switching_power(up);
  REQUIRE(sp.p_set);
  CHECK(*sp.p_set == doctest::Approx(0.045e-3));
  CHECK_FALSE(sp.p_reset);

  // decimation that keeps the crossing sample does not change the result
  std::vector<TraceSample> dec{up[0], up[1]};
  CHECK(*switching_power(dec).p_set == *sp.p_set);
}

namespace {

std::vector<std::pair<double, double>> grid(double lo, double hi, int n, auto f) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k < n; ++k) {
    const double v = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    pts.emplace_back(v, f(v));
  }
  return pts;
}

}  // namespace

TEST_CASE("fit_loglog_segments on pure power laws") {
  const auto sq = grid(0.05, 3.0, 60, [](double v) { return 3e-4 * v * v; });
  for (double s : fit_loglog_segments(sq, 3).slopes) CHECK(s == doctest::Approx(2.0).epsilon(0.005));
  const auto lin = grid(0.05, 3.0, 60, [](double v) { return 2e-3 * v; });
  for (double s : fit_loglog_segments(lin, 2).slopes) CHECK(s == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fit_loglog_segments recovers a three-regime generator") {
  // continuous piecewise power law: slopes 1.1, 4, 2 with breaks at 0.4 and 1.5 V
  const double a1 = 1e-4, b1 = 0.4, b2 = 1.5;
  const double a2 = a1 * std::pow(b1, 1.1 - 4.0);
  const double a3 = a2 * std::pow(b2, 4.0 - 2.0);
  auto f = [&](double v) {
    if (v <= b1) return a1 * std::pow(v, 1.1);
    if (v <= b2) return a2 * std::pow(v, 4.0);
    return a3 * v * v;
  };
  const int n = 91;
  const auto pts = grid(0.03, 3.0, n, f);
  const SlopeFit fit = fit_loglog_segments(pts, 3);
  REQUIRE(fit.slopes.size() == 3);
  CHECK(fit.slopes[0] == doctest::Approx(1.1).epsilon(0.05));
  CHECK(fit.slopes[1] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(fit.slopes[2] == doctest::Approx(2.0).epsilon(0.05));
  const double cell = std::pow(3.0 / 0.03, 1.0 / (n - 1));
  CHECK(fit.breakpoints[0] / b1 < cell);
  CHECK(b1 / fit.breakpoints[0] < cell);
  CHECK(fit.breakpoints[1] / b2 < cell);
  CHECK(b2 / fit.breakpoints[1] < cell);
}

TEST_CASE("fit_loglog_segments input checks") {
  std::vector<std::pair<double, double>> few{{0.1, 1.0}, {0.2, 2.0}};
  CHECK_THROWS_AS(fit_loglog_segments(few, 1), InvalidInput);
  std::vector<std::pair<double, double>> neg{{0.1, 1.0}, {0.2, -2.0}, {0.3, 3.0}};
  CHECK_THROWS_AS(fit_loglog_segments(neg, 1), InvalidInput);
}

TEST_CASE("nonlinearity examples") {
  const int big_n = 4;
  std::vector<double> lin, stepw, quad;
  for (int k = 0; k <= big_n; ++k) {
    lin.push_back(static_cast<double>(k) / big_n);
    stepw.push_back(k == big_n ? 1.0 : 0.0);
    quad.push_back(std::pow(static_cast<double>(k) / big_n, 2));
  }
  CHECK(nonlinearity(lin) == doctest::Approx(0.0));
  CHECK(nonlinearity(stepw) == doctest::Approx(static_cast<double>(big_n - 1) / big_n));
  CHECK(nonlinearity(quad) == doctest::Approx(0.25));
}

TEST_CASE("make_plasticity normalizes against the largest excursion") {
  const PlasticityResult r = make_plasticity({1.0, 2.0, 3.0, 2.5});
  CHECK(r.w.front() == 0.0);
  CHECK(r.w[2] == doctest::Approx(1.0));
  CHECK(r.w[3] == doctest::Approx(0.75));
  const PlasticityResult flat = make_plasticity({2.0, 2.0});
  CHECK(flat.w == std::vector<double>{0.0, 0.0});
}

TEST_CASE("hysteresis_area of a rectangle loop") {
  // unit square traversed once in the positive lobe
  std::vector<TraceSample> s{{0, 0.0, 0, 0.0, 0, 0}, {1, 1.0, 0, 0.0, 0, 0},
                             {2, 1.0, 0, 1.0, 0, 0}, {3, 0.0, 0, 1.0, 0, 0},
                             {4, 0.0, 0, 0.0, 0, 0}};
  CHECK(hysteresis_area(s) == doctest::Approx(1.0));
}
