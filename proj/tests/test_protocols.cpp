#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "memsyn/errors.hpp"
#include "memsyn/protocols.hpp"

using namespace memsyn;

TEST_CASE("no switching dynamics gives a unit ratio") {
  DeviceParams p;
  p.k_s = p.k_r = 0.0;
  IvCyclesSpec spec;
  spec.n = 1;
  const auto r = run_iv_cycles(spec, SimConfig::dc(), p);
  REQUIRE(r.ratio.size() == 1);
  CHECK(r.ratio[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("calibrated DC cycle: RESET power exceeds SET power") {
  IvCyclesSpec spec;
  spec.n = 1;
  const auto r = run_iv_cycles(spec, SimConfig::dc(), DeviceParams::calibrated());
  REQUIRE(r.p_set[0]);
  REQUIRE(r.p_reset[0]);
  CHECK(*r.p_reset[0] > *r.p_set[0]);
  CHECK(r.ratio[0] > 1.0);
}

TEST_CASE("pulsed endurance on the calibrated set") {
  const auto r = run_endurance_pulsed(EnduranceSpec{}, SimConfig::pulse(), DeviceParams::calibrated());
  REQUIRE(r.failure_cycle);
  CHECK(*r.failure_cycle >= 400);
  CHECK(*r.failure_cycle <= 500);
  const double w = r.median_window_before_failure();
  CHECK(w >= 17.0);
  CHECK(w <= 68.0);
}

TEST_CASE("an indestructible device never fails") {
  DeviceParams p;
  p.d_fail = kInfinity;
  EnduranceSpec spec;
  spec.n = 100;
  const auto r = run_endurance_pulsed(spec, SimConfig::pulse(), p);
  CHECK_FALSE(r.failure_cycle);
  CHECK(r.window.size() == 100);
}

namespace {

SimConfig long_steps() {
  SimConfig c;
  c.dt_max = 1.0;
  return c;
}

}  // namespace

TEST_CASE("retention without relaxation does not drift") {
  DeviceParams p;
  p.tau_ret = kInfinity;
  const auto r = run_retention(RetentionSpec{}, long_steps(), p);
  CHECK(r.drift_lrs() == 0.0);
  CHECK(r.drift_hrs() == 0.0);
}

TEST_CASE("retention decay follows the exponential") {
  DeviceParams p;
  p.tau_ret = 1e3;
  p.x_init = 0.0;
  RetentionSpec spec;
  spec.x_lrs = 1.0;
  spec.x_hrs = 0.0;
  const auto r = run_retention(spec, long_steps(), p);
  const double t = r.t.back();
  CHECK(t == doctest::Approx(1e4).epsilon(1e-3));
  CHECK(1.0 - r.x_lrs.back() == doctest::Approx(1.0 - std::exp(-t / 1e3)).epsilon(1e-6));
}

TEST_CASE("multilevel resistance falls with compliance") {
  const auto r = run_multilevel(MultilevelSpec{}, SimConfig::dc(), DeviceParams::calibrated());
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels[0].second > r.levels[1].second);
  CHECK(r.levels[1].second > r.levels[2].second);

  MultilevelSpec one;
  one.i_cc_list = {1e-3};
  CHECK(run_multilevel(one, SimConfig::dc(), DeviceParams::calibrated()).levels.size() == 1);
}

TEST_CASE("without a binding limit the LRS approaches 1/g_on") {
  DeviceParams p;
  p.i_damage = kInfinity;
  MultilevelSpec spec;
  spec.i_cc_list = {10.0};
  const double r = run_multilevel(spec, SimConfig::dc(), p).levels[0].second;
  CHECK(r == doctest::Approx(1.0 / p.g_on).epsilon(1e-3));
}

TEST_CASE("LTP rises and LTD falls monotonically") {
  const auto r = run_ltp_ltd(LtpLtdSpec{}, SimConfig::pulse(), DeviceParams::calibrated());
  CHECK(std::is_sorted(r.ltp.g.begin(), r.ltp.g.end()));
  CHECK(std::is_sorted(r.ltd.g.rbegin(), r.ltd.g.rend()));
  CHECK(r.ltp.g.size() == 51);
}

TEST_CASE("no SET dynamics gives a flat LTP sequence") {
  DeviceParams p;
  p.k_s = 0.0;
  const auto r = run_ltp_ltd(LtpLtdSpec{}, SimConfig::pulse(), p);
  for (double g : r.ltp.g) CHECK(g == doctest::Approx(r.ltp.g.front()).epsilon(1e-9));
}

TEST_CASE("amplitude series orders by amplitude and peaks on the 1.4 V trace") {
  const auto r = run_amplitude_series(AmplitudeSeriesSpec{}, SimConfig::pulse(),
                                      DeviceParams::calibrated());
  const auto& g10 = r.potentiation[0].g;
  const auto& g12 = r.potentiation[1].g;
  const auto& g14 = r.potentiation[2].g;
  CHECK(g14.back() > g12.back());
  CHECK(g12.back() > g10.back());
  const auto peak = std::max_element(g14.begin(), g14.end()) - g14.begin();
  CHECK(peak >= 20);
  CHECK(peak <= 35);
  CHECK(g14.back() < g14[peak]);
}

TEST_CASE("zero amplitude leaves the traces flat") {
  AmplitudeSeriesSpec spec;
  spec.amps = {0.0};
  spec.n = 10;
  const auto r = run_amplitude_series(spec, SimConfig::pulse(), DeviceParams::calibrated());
  for (double g : r.potentiation[0].g) CHECK(g == doctest::Approx(r.potentiation[0].g[0]).epsilon(1e-9));
  for (double g : r.depression[0].g) CHECK(g == doctest::Approx(r.depression[0].g[0]).epsilon(1e-9));
}

TEST_CASE("RESET staircase") {
  const auto r = run_reset_staircase(ResetStaircaseSpec{}, SimConfig::dc(), DeviceParams::calibrated());
  CHECK(std::is_sorted(r.r_hrs.begin(), r.r_hrs.end()));
  CHECK(r.r_hrs.back() > r.r_hrs.front());

  ResetStaircaseSpec one;
  one.v_list = {-1.0};
  CHECK(run_reset_staircase(one, SimConfig::dc(), DeviceParams::calibrated()).r_hrs.size() == 1);

  DeviceParams frozen;
  frozen.k_r = 0.0;
  const auto f = run_reset_staircase(ResetStaircaseSpec{}, SimConfig::dc(), frozen);
  for (std::size_t k = 0; k < f.r_hrs.size(); ++k) {
    CHECK(f.r_hrs[k] == doctest::Approx(f.r_lrs[k]).epsilon(1e-9));
  }
}

TEST_CASE("SET staircase") {
  const DeviceParams p = DeviceParams::calibrated();
  const auto r = run_set_staircase(SetStaircaseSpec{}, SimConfig::dc(), p);
  CHECK(std::is_sorted(r.g_lrs.begin(), r.g_lrs.end()));

  SetStaircaseSpec dz;
  dz.v_list = {p.v_dz};
  DeviceState hrs;
  const double g = run_set_staircase(dz, SimConfig::dc(), p).g_lrs.at(0);
  CHECK(g == doctest::Approx(read_conductance(hrs, p, 0.1)).epsilon(1e-9));

  // with a binding limit the reachable conductance stops growing with V_SET
  SetStaircaseSpec sat;
  sat.v_list = {8.0, 12.0, 20.0};
  sat.i_cc = 1e-3;
  const auto s = run_set_staircase(sat, SimConfig::dc(), p);
  const auto [lo, hi] = std::minmax_element(s.g_lrs.begin(), s.g_lrs.end());
  CHECK(*hi / *lo < 1.01);
  CHECK(*hi < p.g_on);
}

TEST_CASE("STDP sign and decay") {
  StdpSpec spec;
  spec.delta_ts = {0.0, 5e-6, 10e-6, 20e-6};
  const auto r = run_stdp(spec, SimConfig::pulse(), DeviceParams::calibrated());
  REQUIRE(r.points.size() == 4);
  CHECK(std::fabs(r.points[0].delta_g) < 1e-6);
  CHECK(r.points[1].delta_g > 0.0);
  CHECK(std::fabs(r.points[1].delta_g) > std::fabs(r.points[2].delta_g));
  CHECK(std::fabs(r.points[2].delta_g) > std::fabs(r.points[3].delta_g));
  CHECK(r.points[1].g_before == doctest::Approx(581e-6).epsilon(0.02));
}

TEST_CASE("pre-conditioning reaches its target or reports failure") {
  const DeviceParams p = DeviceParams::calibrated();
  const PreconditionSpec spec;
  const auto ok = precondition_to(554e-6, spec, fresh_state(p), SimConfig::pulse(), p);
  CHECK(ok.g == doctest::Approx(554e-6).epsilon(spec.tolerance));

  PreconditionSpec tight = spec;
  tight.max_pulses = 1;
  CHECK_THROWS_AS(precondition_to(2e-3, tight, fresh_state(p), SimConfig::pulse(), p),
                  SimulationError);
}

TEST_CASE("read settings must sit inside the dead zone") {
  LtpLtdSpec spec;
  spec.read.v_read = 0.5;
  CHECK_THROWS_AS(run_ltp_ltd(spec, SimConfig::pulse(), DeviceParams::calibrated()), InvalidInput);
}
