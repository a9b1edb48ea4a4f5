#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "memsyn/analysis.hpp"
#include "memsyn/device_model.hpp"
#include "memsyn/simulator.hpp"
#include "memsyn/waveform.hpp"

namespace memsyn {

/// Read settings shared by every protocol: 0.1 V for 100 us, inside the dead zone.
inline constexpr ReadSpec kDefaultRead{0.1, 100e-6};

struct RunMeta {
  std::uint64_t seed = 0;
  std::uint64_t params_hash = 0;
};

/// Conductance of the read block ending at segment k (instrument view, I / V_applied).
double read_g(const Trace& trace, std::size_t segment);

// ---------------------------------------------------------------- DC cycling

struct IvCyclesSpec {
  std::size_t n = 120;
  double v_pos = 3.0;
  double v_neg = -3.0;
  double rate = 0.05;  // V/s
  double i_cc = 1e-3;  // A
  ReadSpec read = kDefaultRead;
  double gap = 1e-3;   // s of 0 V after the closing read
  bool keep_traces = false;
};

struct IvCycleResult {
  std::vector<double> r_on, r_off, ratio;
  std::vector<std::optional<double>> p_set, p_reset;
  std::vector<Trace> traces;  // one per cycle when keep_traces
  DeviceState final_state;
  RunMeta meta;
};

/// One DC cycle: 0 -> v_pos -> 0, read (LRS), 0 -> v_neg -> 0, read (HRS), rest.
Waveform iv_cycle_waveform(const IvCyclesSpec& spec);

/// Runs `n` DC cycles.  The compliance i_cc limits the SET half (segments
/// 0-2); the RESET half runs unlimited, as RESET draws more than the SET
/// compliance.

IvCycleResult run_iv_cycles(const IvCyclesSpec& spec, SimConfig cfg, const DeviceParams& params,
                            std::optional<DeviceState> start = std::nullopt);

// ---------------------------------------------------------- pulsed endurance

struct EnduranceSpec {
  double v_set = 1.5;
  double v_reset = -1.0;
  double width = 100e-6;
  std::size_t n = 600;
  double gap = 10e-6;
  ReadSpec read = kDefaultRead;
};

struct EnduranceResult {
  std::vector<double> r_on, r_off, window;
  std::optional<std::size_t> failure_cycle;  // 1-based
  DeviceState final_state;
  RunMeta meta;

  /// Median of the window over cycles before the failure latch (all cycles if none).
  [[nodiscard]] double median_window_before_failure() const;
};

EnduranceResult run_endurance_pulsed(const EnduranceSpec& spec, SimConfig cfg,
                                     const DeviceParams& params);

// ------------------------------------------------------------------ retention

struct RetentionSpec {
  double t_total = 1e4;
  double read_period = 100.0;
  // Starting filament fractions; programmed by DC half-sweeps when absent.
  std::optional<double> x_lrs;
  std::optional<double> x_hrs;
  ReadSpec read = kDefaultRead;
};

struct RetentionResult {
  std::vector<double> t;
  std::vector<double> r_lrs, r_hrs;
  std::vector<double> x_lrs, x_hrs;
  RunMeta meta;

  /// max_t |R(t) - R(0)| / R(0)
  [[nodiscard]] double drift_lrs() const;
  [[nodiscard]] double drift_hrs() const;
};

RetentionResult run_retention(const RetentionSpec& spec, SimConfig cfg, const DeviceParams& params);

// ----------------------------------------------------------------- multilevel

struct MultilevelSpec {
  std::vector<double> i_cc_list{0.5e-3, 1e-3, 5e-3};
  double v_set = 3.0;
  double rate = 0.05;
  ReadSpec read = kDefaultRead;
};

struct MultilevelResult {
  std::vector<std::pair<double, double>> levels;  // (i_cc, r_lrs)
  RunMeta meta;
};

MultilevelResult run_multilevel(const MultilevelSpec& spec, SimConfig cfg,
                                const DeviceParams& params);

// --------------------------------------------------------------- plasticity

struct LtpLtdSpec {
  double amp = 1.2;
  double width = 1e-3;
  std::size_t n = 50;
  double gap = 10e-6;
  ReadSpec read = kDefaultRead;
};

struct LtpLtdResult {
  PlasticityResult ltp, ltd;
  RunMeta meta;
};

LtpLtdResult run_ltp_ltd(const LtpLtdSpec& spec, SimConfig cfg, const DeviceParams& params);

struct AmplitudeSeriesSpec {
  std::vector<double> amps{1.0, 1.2, 1.4};
  double width = 10e-6;
  std::size_t n = 50;
  double gap = 10e-6;
  ReadSpec read = kDefaultRead;
};

struct AmplitudeSeriesResult {
  std::vector<double> amps;
  std::vector<PlasticityResult> potentiation, depression;
  RunMeta meta;
};

/// Fresh device per amplitude: n pulses at +amp, then n pulses at -amp.
AmplitudeSeriesResult run_amplitude_series(const AmplitudeSeriesSpec& spec, SimConfig cfg,
                                           const DeviceParams& params);

// ---------------------------------------------------------------- staircases

struct ResetStaircaseSpec {
  std::vector<double> v_list{-0.8, -0.9, -1.0, -1.1, -1.2, -1.3, -1.4, -1.5};
  double i_cc = 1e-3;
  double set_v = 3.0;       // DC SET preparing each step
  double set_rate = 0.05;   // V/s
  double reset_rate = 1e4;  // V/s
  ReadSpec read = kDefaultRead;
};

struct ResetStaircaseResult {
  std::vector<double> v_reset, r_hrs, r_lrs;
  RunMeta meta;
};

/// One device; every step re-SETs under compliance, then RESET-sweeps to v
/// with the limiter off.
ResetStaircaseResult run_reset_staircase(const ResetStaircaseSpec& spec, SimConfig cfg,
                                         const DeviceParams& params);

struct SetStaircaseSpec {
  std::vector<double> v_list{0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
  double i_cc = 5e-3;
  double reset_v = -1.5;
  double reset_rate = 1e4;    // V/s
  double set_rate = 1e4;      // V/s
  ReadSpec read = kDefaultRead;
};

struct SetStaircaseResult {
  std::vector<double> v_set, g_lrs;
  RunMeta meta;
};

/// One device; every step RESET-sweeps with the limiter off, then SET-sweeps
/// to v under compliance.
SetStaircaseResult run_set_staircase(const SetStaircaseSpec& spec, SimConfig cfg,
                                     const DeviceParams& params);

// ----------------------------------------------------------------------- STDP

struct PreconditionSpec {
  double tolerance = 0.02;    // relative
  std::size_t max_pulses = 100;
  double amp = 0.9;           // V, SET pulses
  double reset_amp = 0.7;     // V magnitude, RESET pulses
  double width = 10e-6;       // s, initial
  double gap = 10e-6;
  ReadSpec read = kDefaultRead;
};

struct PreconditionResult {
  DeviceState state;
  double g = 0.0;
  std::size_t pulses = 0;
};

/// Drives the device to g_target with a feedback loop of fine write pulses.
///
/// Pulse polarity follows the sign of the error.  Each polarity keeps its
/// own width, grown by 1.5x after an undershoot and halved after an
/// overshoot.  Throws SimulationError if the target is not reached within
/// max_pulses.
PreconditionResult precondition_to(double g_target, const PreconditionSpec& spec,
                                   DeviceState state, const SimConfig& cfg,
                                   const DeviceParams& params);

struct StdpSpec {
  std::vector<double> delta_ts{-40e-6, -20e-6, -10e-6, -5e-6, 5e-6, 10e-6, 20e-6, 40e-6};
  SpikeShape spike;
  double g_before_pos = 581e-6;  // target for delta_t >= 0
  double g_before_neg = 554e-6;  // target for delta_t < 0
  PreconditionSpec precondition;
  double gap = 10e-6;
};

struct StdpPoint {
  double delta_t = 0.0;
  double delta_g = 0.0;
  double g_before = 0.0;
  double g_after = 0.0;
};

struct StdpResult {
  std::vector<StdpPoint> points;
  RunMeta meta;
};

StdpResult run_stdp(const StdpSpec& spec, SimConfig cfg, const DeviceParams& params);

}  // namespace memsyn
