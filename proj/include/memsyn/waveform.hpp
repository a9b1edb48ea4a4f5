#pragma once

#include <cstddef>
#include <vector>

namespace memsyn {

enum class SegmentKind { kRamp, kHold };

// Read segments mark the blocks a protocol measures conductance from.
enum class SegmentRole { kDrive, kRead };

struct Segment {
  SegmentKind kind = SegmentKind::kHold;
  double v_from = 0.0;  // V
  double v_to = 0.0;    // V; equals v_from for holds
  double duration = 0.0;  // s
  SegmentRole role = SegmentRole::kDrive;

  static Segment ramp(double v_from, double v_to, double duration);
  static Segment hold(double v, double duration, SegmentRole role = SegmentRole::kDrive);

  [[nodiscard]] double value_at(double local_t) const;

  bool operator==(const Segment&) const = default;
};

/// Piecewise-linear voltage program.
///
/// Segment boundary times are accumulated once at construction and kept, so
/// consumers can land on them exactly.  A boundary belongs to the later
/// segment; t == duration() evaluates the end of the last segment.
class Waveform {
 public:
  Waveform() = default;
  explicit Waveform(const std::vector<Segment>& segments);

  Waveform& push(const Segment& s);
  Waveform& ramp(double v_from, double v_to, double duration);
  Waveform& hold(double v, double duration, SegmentRole role = SegmentRole::kDrive);
  Waveform& append(const Waveform& other);

  [[nodiscard]] double duration() const { return boundaries_.back(); }
  [[nodiscard]] bool empty() const { return segments_.empty(); }
  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
  /// segments().size() + 1 entries, starting at 0.
  [[nodiscard]] const std::vector<double>& boundaries() const { return boundaries_; }

  /// Index of the segment active at t (boundaries belong to the later one).
  [[nodiscard]] std::size_t segment_at(double t) const;
  [[nodiscard]] double sample(double t) const;
  [[nodiscard]] std::vector<std::size_t> read_segments() const;

  bool operator==(const Waveform& o) const { return segments_ == o.segments_; }

 private:
  std::vector<Segment> segments_;
  std::vector<double> boundaries_{0.0};
};

struct ReadSpec {
  double v_read = 0.1;   // V
  double w_read = 100e-6;  // s
};

/// Pre/post spike.
///
/// A main phase of -v_a lasting w_s followed by a tail that starts at
/// +tail_ratio * v_a and decays linearly to zero over tail_width.  With the
/// tail disabled (tail_ratio = 0) it is a single rectangular phase.
struct SpikeShape {
  double v_a = 1.0;
  double w_s = 5e-6;
  double tail_ratio = 0.2;
  double tail_width = 120e-6;

  void validate() const;
  [[nodiscard]] double total_width() const { return w_s + (tail_ratio > 0.0 ? tail_width : 0.0); }
  /// Spike voltage at time tau after its onset.
  [[nodiscard]] double value(double tau) const;

  bool operator==(const SpikeShape&) const = default;
};

struct StdpPairSpec {
  SpikeShape spike;
  double delta_t = 5e-6;  // post minus pre, s
  ReadSpec read;
  double gap = 10e-6;  // s of 0 V around read blocks
};

/// 0 -> v_pos -> 0 -> v_neg -> 0, every ramp at |slope| = rate.
Waveform dc_sweep(double v_pos, double v_neg, double rate);

/// Leading [0 V gap, read] block, then n x [write, gap, read, gap].
Waveform pulse_train(double amp, double width, double gap, std::size_t n, const ReadSpec& read);

/// Device voltage spike(t - t_pre) - spike(t - t_post), framed by read blocks.
Waveform superpose_stdp(const StdpPairSpec& spec);

}  // namespace memsyn
