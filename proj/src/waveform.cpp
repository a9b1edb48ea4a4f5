#include "memsyn/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "memsyn/errors.hpp"

namespace memsyn {

namespace {

void check_segment(const Segment& s) {
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
    throw InvalidInput("segment duration must be finite and > 0");
  }
  if (!std::isfinite(s.v_from) || !std::isfinite(s.v_to)) {
    throw InvalidInput("segment voltages must be finite");
  }
  if (s.kind == SegmentKind::kHold && s.v_from != s.v_to) {
    throw InvalidInput("hold segment must have v_from == v_to");
  }
}

// Linear piece c0 + c1 * tau of the spike on the piece containing tau_mid.
std::pair<double, double> spike_line(const SpikeShape& sp, double tau_mid) {
  if (tau_mid < 0.0) return {0.0, 0.0};
  if (tau_mid < sp.w_s) return {-sp.v_a, 0.0};
  if (sp.tail_ratio > 0.0 && tau_mid < sp.w_s + sp.tail_width) {
    const double top = sp.tail_ratio * sp.v_a;
    const double slope = -top / sp.tail_width;
    return {top - slope * sp.w_s, slope};
  }
  return {0.0, 0.0};
}

}  // namespace

Segment Segment::ramp(double v_from, double v_to, double duration) {
  Segment s{SegmentKind::kRamp, v_from, v_to, duration, SegmentRole::kDrive};
  check_segment(s);
  return s;
}

Segment Segment::hold(double v, double duration, SegmentRole role) {
  Segment s{SegmentKind::kHold, v, v, duration, role};
  check_segment(s);
  return s;
}

double Segment::value_at(double local_t) const {
  if (kind == SegmentKind::kHold) return v_from;
  const double f = std::clamp(local_t / duration, 0.0, 1.0);
  return v_from + (v_to - v_from) * f;
}

Waveform::Waveform(const std::vector<Segment>& segments) {
  for (const auto& s : segments) push(s);
}

Waveform& Waveform::push(const Segment& s) {
  check_segment(s);
  segments_.push_back(s);
  boundaries_.push_back(boundaries_.back() + s.duration);
  return *this;
}

Waveform& Waveform::ramp(double v_from, double v_to, double duration) {
  return push(Segment::ramp(v_from, v_to, duration));
}

Waveform& Waveform::hold(double v, double duration, SegmentRole role) {
  return push(Segment::hold(v, duration, role));
}

Waveform& Waveform::append(const Waveform& other) {
  for (const auto& s : other.segments_) push(s);
  return *this;
}

std::size_t Waveform::segment_at(double t) const {
  if (segments_.empty() || !(t >= 0.0) || t > duration()) {
    throw OutOfRange("waveform time " + std::to_string(t) + " outside [0, " +
                     std::to_string(duration()) + "]");
  }
  // first boundary strictly greater than t marks the end of the active segment
  const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
  if (it == boundaries_.end()) return segments_.size() - 1;
  return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
}

double Waveform::sample(double t) const {
  const std::size_t k = segment_at(t);
  return segments_[k].value_at(t - boundaries_[k]);
}

std::vector<std::size_t> Waveform::read_segments() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    if (segments_[k].role == SegmentRole::kRead) out.push_back(k);
  }
  return out;
}

void SpikeShape::validate() const {
  if (!(v_a > 0.0) || !std::isfinite(v_a)) throw InvalidInput("spike v_a must be > 0");
  if (!(w_s > 0.0) || !std::isfinite(w_s)) throw InvalidInput("spike w_s must be > 0");
  if (!(tail_ratio >= 0.0) || !std::isfinite(tail_ratio)) {
    throw InvalidInput("spike tail_ratio must be >= 0");
  }
  if (tail_ratio > 0.0 && (!(tail_width > 0.0) || !std::isfinite(tail_width))) {
    throw InvalidInput("spike tail_width must be > 0 when the tail is enabled");
  }
}

double SpikeShape::value(double tau) const {
  const auto [c0, c1] = spike_line(*this, tau);
  return c0 + c1 * tau;
}

Waveform dc_sweep(double v_pos, double v_neg, double rate) {
  if (!(v_pos > 0.0) || !(v_neg < 0.0) || !(rate > 0.0) || !std::isfinite(v_pos) ||
      !std::isfinite(v_neg) || !std::isfinite(rate)) {
    throw InvalidInput("dc_sweep requires v_pos > 0 > v_neg and rate > 0");
  }
  Waveform w;
  w.ramp(0.0, v_pos, v_pos / rate);
  w.ramp(v_pos, 0.0, v_pos / rate);
  w.ramp(0.0, v_neg, -v_neg / rate);
  w.ramp(v_neg, 0.0, -v_neg / rate);
  return w;
}

Waveform pulse_train(double amp, double width, double gap, std::size_t n, const ReadSpec& read) {
  if (n == 0) throw InvalidInput("pulse_train requires n >= 1");
  if (!(width > 0.0) || !(gap > 0.0) || !(read.w_read > 0.0)) {
    throw InvalidInput("pulse_train widths and gap must be > 0");
  }
  Waveform w;
  w.hold(0.0, gap);
  w.hold(read.v_read, read.w_read, SegmentRole::kRead);
  for (std::size_t k = 0; k < n; ++k) {
    w.hold(amp, width);
    w.hold(0.0, gap);
    w.hold(read.v_read, read.w_read, SegmentRole::kRead);
    w.hold(0.0, gap);
  }
  return w;
}

Waveform superpose_stdp(const StdpPairSpec& spec) {
  spec.spike.validate();
  if (!(spec.read.w_read > 0.0) || !(spec.gap > 0.0) || !std::isfinite(spec.delta_t)) {
    throw InvalidInput("superpose_stdp: invalid read block, gap or delta_t");
  }
  const SpikeShape& sp = spec.spike;
  const double pre_on = std::max(0.0, -spec.delta_t);
  const double post_on = std::max(0.0, spec.delta_t);
  const double end = std::max(pre_on, post_on) + sp.total_width();

  std::vector<double> cuts{0.0, end};
  for (double on : {pre_on, post_on}) {
    cuts.push_back(on);
    cuts.push_back(on + sp.w_s);
    if (sp.tail_ratio > 0.0) cuts.push_back(on + sp.w_s + sp.tail_width);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Waveform w;
  w.hold(0.0, spec.gap);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
  w.hold(0.0, spec.gap);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const auto [p0, p1] = spike_line(sp, mid - pre_on);
    const auto [q0, q1] = spike_line(sp, mid - post_on);
    const double va = (p0 + p1 * (a - pre_on)) - (q0 + q1 * (a - post_on));
    const double vb = (p0 + p1 * (b - pre_on)) - (q0 + q1 * (b - post_on));
    if (va == vb) {
      w.hold(va, b - a);
    } else {
      w.ramp(va, vb, b - a);
    }
  }
  w.hold(0.0, spec.gap);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
  w.hold(0.0, spec.gap);
  return w;
}

}  // namespace memsyn
