#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "memsyn/errors.hpp"
#include "memsyn/waveform.hpp"

using namespace memsyn;

namespace {

double peak_abs(const Waveform& w) {
  double m = 0.0;
  for (const auto& s : w.segments()) m = std::max({m, std::fabs(s.v_from), std::fabs(s.v_to)});
  return m;
}

}  // namespace

TEST_CASE("sample examples") {
  Waveform h;
  h.hold(2.0, 1e-3);
  CHECK(h.sample(0.5e-3) == 2.0);
  Waveform r;
  r.ramp(0.0, 3.0, 60.0);
  CHECK(r.sample(30.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(static_cast<void>(r.sample(60.0 + 1e-6)), OutOfRange);
  CHECK_THROWS_AS(static_cast<void>(r.sample(-1e-6)), OutOfRange);
}

TEST_CASE("dc_sweep examples") {
  const Waveform w = dc_sweep(3.0, -3.0, 0.05);
  CHECK(w.duration() == doctest::Approx(240.0));
  CHECK(w.sample(0.0) == 0.0);
  CHECK(w.sample(w.duration()) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.sample(60.0) == doctest::Approx(3.0));
  CHECK(w.sample(180.0) == doctest::Approx(-3.0));
  CHECK_THROWS_AS(dc_sweep(3.0, 1.0, 0.05), InvalidInput);
}

TEST_CASE("pulse_train structure") {
  const ReadSpec read{0.1, 100e-6};
  const Waveform one = pulse_train(1.2, 1e-3, 10e-6, 1, read);
  CHECK(one.read_segments().size() == 2);
  std::size_t writes = 0;
  for (const auto& s : one.segments()) writes += s.v_from == 1.2;
  CHECK(writes == 1);

  const std::size_t n = 50;
  const double width = 1e-3, gap = 10e-6;
  const Waveform w = pulse_train(1.2, width, gap, n, read);
  CHECK(peak_abs(w) == 1.2);
  const double expect = (n + 1) * (read.w_read + gap) + n * (width + gap);
  CHECK(w.duration() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("identical spikes cancel") {
  StdpPairSpec spec;
  spec.delta_t = 0.0;
  const Waveform w = superpose_stdp(spec);
  const auto reads = w.read_segments();
  REQUIRE(reads.size() == 2);
  for (std::size_t k = reads[0] + 1; k < reads[1]; ++k) {
    CHECK(w.segments()[k].v_from == 0.0);
    CHECK(w.segments()[k].v_to == 0.0);
  }
}

TEST_CASE("well separated spikes keep their own amplitude") {
  StdpPairSpec spec;
  spec.delta_t = spec.spike.total_width() + 1e-6;
  CHECK(peak_abs(superpose_stdp(spec)) == doctest::Approx(spec.spike.v_a));
  spec.delta_t = -spec.delta_t;
  CHECK(peak_abs(superpose_stdp(spec)) == doctest::Approx(spec.spike.v_a));
}

TEST_CASE("overlapping rectangular spikes") {
  // Without tails, 0 < delta_t < w_s leaves -v_a, 0, +v_a on the three intervals.
  StdpPairSpec spec;
  spec.spike.tail_ratio = 0.0;
  spec.delta_t = 2e-6;
  const Waveform w = superpose_stdp(spec);
  const double t0 = spec.gap + spec.read.w_read + spec.gap;
  CHECK(w.sample(t0 + 1e-6) == doctest::Approx(-1.0));
  CHECK(w.sample(t0 + 3e-6) == doctest::Approx(0.0));
  CHECK(w.sample(t0 + 6e-6) == doctest::Approx(1.0));
  CHECK(peak_abs(w) == doctest::Approx(spec.spike.v_a));
}

TEST_CASE("spike pair is antisymmetric in delta_t") {
  StdpPairSpec a;
  a.delta_t = 7e-6;
  StdpPairSpec b = a;
  b.delta_t = -7e-6;
  const Waveform wa = superpose_stdp(a);
  const Waveform wb = superpose_stdp(b);
  REQUIRE(wa.duration() == doctest::Approx(wb.duration()));
  for (double t = 0.0; t < wa.duration(); t += 1.3e-6) {
    const bool in_read = wa.segments()[wa.segment_at(t)].role == SegmentRole::kRead;
    if (!in_read) CHECK(wa.sample(t) == doctest::Approx(-wb.sample(t)).epsilon(1e-12));
  }
}

TEST_CASE("boundaries belong to the later segment") {
  Waveform w;
  w.hold(1.0, 1.0).hold(2.0, 1.0);
  CHECK(w.segment_at(1.0) == 1);
  CHECK(w.sample(1.0) == 2.0);
  CHECK(w.sample(2.0) == 2.0);
}
