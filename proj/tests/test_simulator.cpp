#include <cmath>

#include "doctest.h"
#include "memsyn/analysis.hpp"
#include "memsyn/errors.hpp"
#include "memsyn/simulator.hpp"

using namespace memsyn;

TEST_CASE("zero bias leaves a relaxed device alone") {
  const DeviceParams p;
  const DeviceState s = fresh_state(p);
  const auto [next, sample] = step(s, 0.0, 1e-6, SimConfig{}, p);
  CHECK(next == s);
  CHECK(sample.i == 0.0);
}

TEST_CASE("compliance clamp algebra") {
  DeviceParams p;
  p.g_on = 1e-2;
  p.tau_ret = kInfinity;
  DeviceState s;
  s.x = 1.0;
  SimConfig cfg;
  cfg.i_cc = 1e-3;
  const auto [next, sample] = step(s, 1.0, 1e-6, cfg, p);
  CHECK(sample.i == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(sample.v_device == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next.x == 1.0);
}

TEST_CASE("halving dx_max barely moves the end state of a write pulse") {
  const DeviceParams p;
  Waveform w;
  w.hold(1.2, 1e-3);
  SimConfig a;
  SimConfig b;
  b.dx_max = a.dx_max / 2.0;
  const double xa = run(w, fresh_state(p), a, p).first.x;
  const double xb = run(w, fresh_state(p), b, p).first.x;
  CHECK(xa > 0.0);
  CHECK(std::fabs(xa - xb) < 1e-3);
}

TEST_CASE("compliance-limited ramps converge under dx_max halving") {
  const DeviceParams p;
  SimConfig a = SimConfig::dc();
  a.i_cc = 1e-3;
  SimConfig b = a;
  b.dx_max = a.dx_max / 2.0;
  const Waveform w = dc_sweep(3.0, -3.0, 0.05);
  const double xa = run(w, fresh_state(p), a, p).first.x;
  const double xb = run(w, fresh_state(p), b, p).first.x;
  CHECK(std::fabs(xa - xb) < 1e-3);
}

TEST_CASE("a device without dynamics keeps its state") {
  DeviceParams p;
  p.k_s = p.k_r = 0.0;
  p.tau_ret = kInfinity;
  p.i_damage = kInfinity;
  DeviceState s;
  s.x = 0.37;
  const auto [end, tr] = run(dc_sweep(3.0, -3.0, 0.05), s, SimConfig::dc(), p);
  CHECK(end.x == 0.37);
  for (const auto& smp : tr.samples) CHECK(smp.x == 0.37);
}

TEST_CASE("runs are bit-identical") {
  const DeviceParams p;
  SimConfig cfg = SimConfig::dc();
  cfg.i_cc = 1e-3;
  cfg.seed = 11;
  const auto a = run(dc_sweep(3.0, -3.0, 0.05), fresh_state(p), cfg, p);
  const auto b = run(dc_sweep(3.0, -3.0, 0.05), fresh_state(p), cfg, p);
  CHECK(a.first == b.first);
  CHECK(a.second.samples == b.second.samples);
  CHECK(a.second.params_hash == params_hash(p));
}

TEST_CASE("calibrated DC sweep is hysteretic") {
  const DeviceParams p = DeviceParams::calibrated();
  SimConfig cfg = SimConfig::dc();
  cfg.i_cc = 1e-3;
  const auto tr = run(dc_sweep(3.0, -3.0, 0.05), fresh_state(p), cfg, p).second;
  CHECK(hysteresis_area(tr.samples) > 0.0);
}

TEST_CASE("trace invariants: time order, bounds, recorded boundaries") {
  const DeviceParams p;
  SimConfig cfg = SimConfig::pulse();
  cfg.i_cc = 1e-3;
  cfg.decimation = 7;
  const Waveform w = pulse_train(1.2, 1e-3, 10e-6, 5, ReadSpec{});
  const auto tr = run(w, fresh_state(p), cfg, p).second;
  REQUIRE(tr.segment_end.size() == w.segments().size());
  for (std::size_t k = 1; k < tr.samples.size(); ++k) CHECK(tr.samples[k].t > tr.samples[k - 1].t);
  for (std::size_t k = 0; k < tr.segment_end.size(); ++k) {
    CHECK(tr.at_segment_end(k).t == doctest::Approx(w.boundaries()[k + 1]).epsilon(1e-12));
  }
  for (const auto& s : tr.samples) {
    CHECK(s.x >= 0.0);
    CHECK(s.x <= 1.0);
    CHECK(std::fabs(s.i) <= 1e-3 * (1.0 + 1e-12));
  }
}

TEST_CASE("step rejects bad input") {
  const DeviceParams p;
  CHECK_THROWS_AS(step(DeviceState{}, 1.0, -1.0, SimConfig{}, p), InvalidInput);
  CHECK_THROWS_AS(step(DeviceState{}, 1.0, 1.0, SimConfig{}, p), InvalidInput);
  CHECK_THROWS_AS(step(DeviceState{}, NAN, 1e-7, SimConfig{}, p), InvalidInput);
  SimConfig bad;
  bad.dx_max = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("Trace::append joins runs end to end") {
  const DeviceParams p;
  Waveform w;
  w.hold(0.5, 1e-5).hold(-0.5, 1e-5);
  auto [s1, a] = run(w, fresh_state(p), SimConfig{}, p);
  const auto b = run(w, s1, SimConfig{}, p).second;
  Trace joined = a;
  joined.append(b);
  CHECK(joined.samples.size() == a.samples.size() + b.samples.size() - 1);
  CHECK(joined.segment_end.size() == 4);
  CHECK(joined.at_segment_end(3).t == doctest::Approx(4e-5));
  CHECK(joined.segment_i_cc.size() == 4);
}

TEST_CASE("perturb_cycle") {
  DeviceParams p;
  p.sigma_c2c = 0.0;
  auto rng = make_rng(1, 0);
  CHECK(perturb_cycle(p, rng) == p);

  p.sigma_c2c = 0.05;
  auto r1 = make_rng(42, 3);
  auto r2 = make_rng(42, 3);
  CHECK(perturb_cycle(p, r1) == perturb_cycle(p, r2));

  auto r3 = make_rng(42, 4);
  double sum = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) sum += std::log(perturb_cycle(p, r3).k_s / p.k_s);
  CHECK(std::fabs(sum / n) < 3.0 * p.sigma_c2c / 100.0);
}

TEST_CASE("observer sees every run") {
  const DeviceParams p;
  int seen = 0;
  {
    ScopedTraceObserver obs([&](const Trace&) { ++seen; });
    Waveform w;
    w.hold(0.1, 1e-6);
    run(w, fresh_state(p), SimConfig{}, p);
    run(w, fresh_state(p), SimConfig{}, p);
  }
  Waveform w;
  w.hold(0.1, 1e-6);
  run(w, fresh_state(p), SimConfig{}, p);
  CHECK(seen == 2);
}
