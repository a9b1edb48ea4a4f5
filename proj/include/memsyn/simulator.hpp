#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "memsyn/device_model.hpp"
#include "memsyn/waveform.hpp"

namespace memsyn {

struct SimConfig {
  double dt_max = 1e-6;   // s
  double dx_max = 0.01;
  std::optional<double> i_cc;  // A, ideal series limiter on both polarities
  std::uint64_t seed = 0;
  std::size_t decimation = 1;

  void validate() const;

  /// Defaults for pulse protocols (dt_max 1 us) and DC sweeps (dt_max 10 ms).
  static SimConfig pulse();
  static SimConfig dc();

  bool operator==(const SimConfig&) const = default;
};

struct TraceSample {
  double t = 0.0;
  double v_applied = 0.0;
  double v_device = 0.0;
  double i = 0.0;
  double x = 0.0;
  double damage = 0.0;

  bool operator==(const TraceSample&) const = default;
};

struct Trace {
  std::vector<TraceSample> samples;
  /// Index into samples of the sample recorded at the end of each segment.
  std::vector<std::size_t> segment_end;
  /// Compliance in force during each segment.
  std::vector<std::optional<double>> segment_i_cc;
  std::uint64_t params_hash = 0;
  std::uint64_t seed = 0;
  SimConfig config;

  /// Sample at the end of segment k.
  [[nodiscard]] const TraceSample& at_segment_end(std::size_t k) const {
    return samples.at(segment_end.at(k));
  }

  /// Appends a run that started from this trace's final state.  The tail's
  /// t = 0 sample is dropped and its times and segment indices are shifted.
  void append(const Trace& tail);
};

/// While alive, receives every trace produced by run() on this thread.
/// Observers nest; the innermost one is active.
class ScopedTraceObserver {
 public:
  explicit ScopedTraceObserver(std::function<void(const Trace&)> fn);
  ~ScopedTraceObserver();
  ScopedTraceObserver(const ScopedTraceObserver&) = delete;
  ScopedTraceObserver& operator=(const ScopedTraceObserver&) = delete;

 private:
  std::function<void(const Trace&)> fn_;
  std::function<void(const Trace&)>* prev_;
};

/// Stable 64-bit FNV-1a hash of every parameter value.
std::uint64_t params_hash(const DeviceParams& params);

/// Per-run generator derived from (seed, run index).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t run_index);

/// Electrical operating point (v_device, reported i) under the configured compliance.
std::pair<double, double> operating_point(double v_applied, const DeviceState& state,
                                          const SimConfig& cfg, const DeviceParams& params);

/// Advances the device by dt with v_applied held constant.
///
/// The interval is split into substeps whose state change is bounded by
/// dx_max; compliance, rate and damage are re-evaluated at every substep.
/// The returned sample describes the post-step operating point (t = 0; the
/// caller stamps time).
std::pair<DeviceState, TraceSample> step(const DeviceState& state, double v_applied, double dt,
                                         const SimConfig& cfg, const DeviceParams& params);

/// Integrates the device along the whole waveform.
///
/// Steps follow a uniform grid of at most dt_max per segment, subdivided
/// wherever the state moves fast so that a recorded step changes x by about
/// dx_max.  Steps never straddle a segment boundary; every boundary and every
/// step inside a read segment is recorded regardless of decimation.
std::pair<DeviceState, Trace> run(const Waveform& w, const DeviceState& s0, const SimConfig& cfg,
                                  const DeviceParams& params);

/// Cycle-to-cycle variability: k_s and k_r scaled by independent lognormal
/// factors with log-standard-deviation sigma_c2c.
DeviceParams perturb_cycle(const DeviceParams& params, std::mt19937_64& rng);

}  // namespace memsyn
