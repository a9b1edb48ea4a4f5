#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "memsyn/calibration.hpp"
#include "memsyn/errors.hpp"
#include "memsyn/simulator.hpp"

using namespace memsyn;

namespace {

FitConfig unbounded(std::size_t evals) {
  FitConfig c;
  c.dims.clear();
  c.max_evals = evals;
  return c;
}

// Targets that only need the analytic HRS branch: cheap to evaluate.
TargetFeatures hrs_only() {
  TargetFeatures t;
  t.on_off_dc.weight = 0.0;
  t.on_off_pulsed.weight = 0.0;
  t.failure_cycle.weight = 0.0;
  t.ltp_min_rise.weight = 0.0;
  t.power_order_weight = 0.0;
  return t;
}

}  // namespace

TEST_CASE("simplex: one-dimensional quadratic") {
  const auto r = minimize_simplex([](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0); },
                                  {0.0}, unbounded(2000));
  CHECK(std::fabs(r.x[0] - 3.0) <= 1e-6);
  CHECK(r.f <= r.f0);
}

TEST_CASE("simplex: Rosenbrock") {
  const auto r = minimize_simplex(
      [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
      },
      {-1.2, 1.0}, unbounded(5000));
  CHECK(std::fabs(r.x[0] - 1.0) <= 1e-3);
  CHECK(std::fabs(r.x[1] - 1.0) <= 1e-3);
}

TEST_CASE("simplex: five-dimensional bowl with a random PSD matrix") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  const int n = 5;
  std::vector<std::vector<double>> b(n, std::vector<double>(n));
  for (auto& row : b) {
    for (double& v : row) v = normal(rng);
  }
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) a[i][j] += b[k][i] * b[k][j];
      if (i == j) a[i][j] += 0.5;
    }
  }
  const std::vector<double> center{0.7, -1.3, 2.2, 0.1, -0.4};
  auto f = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s += (x[i] - center[i]) * a[i][j] * (x[j] - center[j]);
    }
    return s;
  };
  const auto r = minimize_simplex(f, std::vector<double>(n, 0.0), unbounded(20000));
  for (int i = 0; i < n; ++i) CHECK(std::fabs(r.x[i] - center[i]) <= 1e-4);
}

TEST_CASE("simplex: box bounds are respected and the result never worsens") {
  FitConfig c;
  c.dims = {{"a", -1.0, 1.0}, {"b", 0.0, 2.0}};
  c.max_evals = 500;
  auto f = [](const std::vector<double>& x) {
    CHECK(x[0] >= -1.0);
    CHECK(x[0] <= 1.0);
    return (x[0] - 5.0) * (x[0] - 5.0) + (x[1] - 1.0) * (x[1] - 1.0);
  };
  const auto r = minimize_simplex(f, {0.0, 0.5}, c);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.f <= r.f0);
  CHECK(r.evals <= 500);
}

TEST_CASE("simplex: input errors") {
  auto nan_at_start = [](const std::vector<double>&) { return std::nan(""); };
  CHECK_THROWS_AS(minimize_simplex(nan_at_start, {1.0}, unbounded(10)), InvalidInput);
  CHECK_THROWS_AS(minimize_simplex(nan_at_start, {}, unbounded(10)), InvalidInput);
  FitConfig c;
  c.dims = {{"a", 0.0, 1.0}};
  CHECK_THROWS_AS(minimize_simplex([](const std::vector<double>&) { return 0.0; }, {2.0}, c),
                  InvalidInput);
}

TEST_CASE("loss is zero at the targets and quadratic in the error") {
  TargetFeatures t = hrs_only();
  t.slope_boundary_v.weight = 0.0;
  MeasuredFeatures m;
  m.hrs_slope_low = t.hrs_slope_low.value;
  CHECK(loss_from(m, t) == 0.0);
  m.hrs_slope_low = t.hrs_slope_low.value * 1.1;
  const double one = loss_from(m, t);
  m.hrs_slope_low = t.hrs_slope_low.value * 1.2;
  CHECK(loss_from(m, t) == doctest::Approx(4.0 * one));
}

TEST_CASE("ordering and shortfall penalties") {
  TargetFeatures t = hrs_only();
  t.hrs_slope_low.weight = t.slope_boundary_v.weight = 0.0;
  t.power_order_weight = 1.0;
  MeasuredFeatures m;
  m.p_set = 1e-3;
  m.p_reset = 2e-3;
  CHECK(loss_from(m, t) == 0.0);
  m.p_reset = 0.5e-3;
  CHECK(loss_from(m, t) == doctest::Approx(0.25));
  m.p_reset.reset();
  CHECK(loss_from(m, t) == kFailurePenalty);

  TargetFeatures l = hrs_only();
  l.hrs_slope_low.weight = l.slope_boundary_v.weight = 0.0;
  l.ltp_min_rise.weight = 1.0;
  MeasuredFeatures lm;
  lm.ltp_rise = 2.0;  // above the minimum: no cost
  CHECK(loss_from(lm, l) == 0.0);
  lm.ltp_rise = 0.25;
  CHECK(loss_from(lm, l) == doctest::Approx(0.25));
}

TEST_CASE("defaults score zero against their own features") {
  const DeviceParams p = DeviceParams::calibrated();
  TargetFeatures t;
  t.stdp_decay.weight = 1.0;
  const FitConfig c;
  const MeasuredFeatures m = measure_features(p, t, c);
  t.hrs_slope_low.value = *m.hrs_slope_low;
  t.slope_boundary_v.value = *m.slope_boundary_v;
  t.on_off_dc.value = *m.on_off_dc;
  t.on_off_pulsed.value = *m.on_off_pulsed;
  t.failure_cycle.value = *m.failure_cycle;
  t.stdp_decay.value = *m.stdp_decay;
  CHECK(objective(p, t, c) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("simulation failures cost a finite penalty and are logged") {
  DeviceParams bad;
  bad.n1 = 3.0;
  ObjectiveLog log;
  CHECK(objective(bad, hrs_only(), FitConfig{}, &log) == kFailurePenalty);
  CHECK(log.failures == 1);
  CHECK(log.messages.size() == 1);
}

TEST_CASE("fit: one restart is one simplex run from the seeded start") {
  const TargetFeatures t = hrs_only();
  FitConfig c;
  c.dims = {{"n1", 1.0, 1.4}, {"v1", 0.2, 0.8}};
  c.restarts = 1;
  c.max_evals = 60;
  c.seed = 5;
  const FitResult r = fit(t, c);

  auto rng = make_rng(c.seed, 0);
  std::vector<double> x0;
  for (const auto& d : c.dims) x0.push_back(std::uniform_real_distribution<double>(d.lo, d.hi)(rng));
  auto f = [&](const std::vector<double>& x) {
    DeviceParams p = c.base;
    p.n1 = x[0];
    p.v1 = x[1];
    return objective(p, t, c);
  };
  const SimplexResult s = minimize_simplex(f, x0, c);
  CHECK(r.x == s.x);
  CHECK(r.loss == s.f);
}

TEST_CASE("fit: determinism, best-of restarts and recovery") {
  DeviceParams truth;
  truth.n1 = 1.25;
  truth.v1 = 0.5;
  TargetFeatures t = hrs_only();
  FitConfig c;
  c.dims = {{"n1", 1.0, 1.45}, {"v1", 0.25, 0.8}};
  c.max_evals = 120;
  c.seed = 3;
  const MeasuredFeatures m = measure_features(truth, t, c);
  t.hrs_slope_low.value = *m.hrs_slope_low;
  t.slope_boundary_v.value = *m.slope_boundary_v;

  c.restarts = 1;
  const FitResult one = fit(t, c);
  c.restarts = 3;
  const FitResult three = fit(t, c);
  const FitResult again = fit(t, c);
  CHECK(three.x == again.x);
  CHECK(three.loss == again.loss);
  CHECK(three.loss <= one.loss);
  for (double l0 : three.initial_losses) CHECK(three.loss <= l0);
  CHECK(three.x[0] == doctest::Approx(truth.n1).epsilon(0.10));
  CHECK(three.x[1] == doctest::Approx(truth.v1).epsilon(0.10));
}

TEST_CASE("target and fit config validation") {
  TargetFeatures t;
  CHECK_NOTHROW(t.validate());
  t.on_off_dc.weight = -1.0;
  CHECK_THROWS_AS(t.validate(), InvalidInput);
  TargetFeatures none = hrs_only();
  none.hrs_slope_low.weight = none.slope_boundary_v.weight = 0.0;
  CHECK_THROWS_AS(none.validate(), InvalidInput);

  FitConfig c;
  c.restarts = 0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = FitConfig{};
  c.dims = {{"n1", 1.2, 1.1}};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = FitConfig{};
  c.dims = {{"bogus", 0.0, 1.0}};
  CHECK_THROWS_AS(fit(hrs_only(), c), InvalidInput);
}
