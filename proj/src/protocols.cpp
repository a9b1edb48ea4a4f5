#include "memsyn/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memsyn/errors.hpp"

namespace memsyn {

namespace {

RunMeta meta_for(const SimConfig& cfg, const DeviceParams& params) {
  return RunMeta{cfg.seed, params_hash(params)};
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double max_rel_drift(const std::vector<double>& r) {
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::fabs(v - r.front()) / r.front());
  return worst;
}

void check_read(const ReadSpec& read, const DeviceParams& params) {
  if (!(read.w_read > 0.0)) throw InvalidInput("read width must be > 0");
  if (read.v_read == 0.0 || std::fabs(read.v_read) > params.v_dz) {
    throw InvalidInput("read voltage must be nonzero and within the dead zone (|v_read| <= v_dz)");
  }
}

std::vector<double> read_series(const Trace& tr, const Waveform& w) {
  std::vector<double> g;
  for (std::size_t k : w.read_segments()) g.push_back(read_g(tr, k));
  return g;
}

// Triangular excursion 0 -> v -> 0 at |slope| = rate, then a read and a short rest.
Waveform excursion(double v, double rate, const ReadSpec& read) {
  const double d = std::fabs(v) / rate;
  Waveform w;
  w.ramp(0.0, v, d);
  w.ramp(v, 0.0, d);
  w.hold(read.v_read, read.w_read, SegmentRole::kRead);
  w.hold(0.0, read.w_read);
  return w;
}

// Caps dt so that a fast ramp is resolved by at least `min_steps` steps.
SimConfig resolve_ramp(SimConfig cfg, double v, double rate, double min_steps = 400.0) {
  cfg.dt_max = std::min(cfg.dt_max, std::fabs(v) / rate / min_steps);
  return cfg;
}

// The limiter is a SET-side instrument setting; RESET sweeps run without it.
SimConfig unlimited(SimConfig cfg) {
  cfg.i_cc.reset();
  return cfg;
}

}  // namespace

double read_g(const Trace& trace, std::size_t segment) {
  const TraceSample& s = trace.at_segment_end(segment);
  return s.i / s.v_applied;
}

// ---------------------------------------------------------------- DC cycling

Waveform iv_cycle_waveform(const IvCyclesSpec& spec) {
  const Waveform sweep = dc_sweep(spec.v_pos, spec.v_neg, spec.rate);
  const auto& segs = sweep.segments();
  Waveform w;
  w.push(segs[0]).push(segs[1]);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
  w.push(segs[2]).push(segs[3]);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
  w.hold(0.0, spec.gap);
  return w;
}

IvCycleResult run_iv_cycles(const IvCyclesSpec& spec, SimConfig cfg, const DeviceParams& params,
                            std::optional<DeviceState> start) {
  if (spec.n < 1) throw InvalidInput("run_iv_cycles: n must be >= 1");
  check_read(spec.read, params);
  cfg.i_cc = spec.i_cc;
  const Waveform w = iv_cycle_waveform(spec);
  const auto& segs = w.segments();
  Waveform set_half;
  Waveform reset_half;
  for (std::size_t k = 0; k < segs.size(); ++k) (k < 3 ? set_half : reset_half).push(segs[k]);
  IvCycleResult out;
  out.meta = meta_for(cfg, params);
  DeviceState s = start.value_or(fresh_state(params));
  for (std::size_t c = 0; c < spec.n; ++c) {
    auto rng = make_rng(cfg.seed, c);
    const DeviceParams cycle_params = perturb_cycle(params, rng);
    auto [mid, tr] = run(set_half, s, cfg, cycle_params);
    auto [next, tail] = run(reset_half, mid, unlimited(cfg), cycle_params);
    tr.append(tail);
    s = next;
    ++s.cycle_count;
    const double r_on = 1.0 / read_g(tr, 2);
    const double r_off = 1.0 / read_g(tr, 5);
    out.r_on.push_back(r_on);
    out.r_off.push_back(r_off);
    out.ratio.push_back(on_off_ratio(r_off, r_on));
    const SwitchingPower sp = switching_power(tr);
    out.p_set.push_back(sp.p_set);
    out.p_reset.push_back(sp.p_reset);
    if (spec.keep_traces) out.traces.push_back(std::move(tr));
  }
  out.final_state = s;
  return out;
}

// ---------------------------------------------------------- pulsed endurance

double EnduranceResult::median_window_before_failure() const {
  const std::size_t end = failure_cycle ? *failure_cycle - 1 : window.size();
  return median(std::vector<double>(window.begin(),
                                    window.begin() + static_cast<std::ptrdiff_t>(end)));
}

EnduranceResult run_endurance_pulsed(const EnduranceSpec& spec, SimConfig cfg,
                                     const DeviceParams& params) {
  if (spec.n < 1) throw InvalidInput("run_endurance_pulsed: n must be >= 1");
  check_read(spec.read, params);
  Waveform w;
  w.hold(0.0, spec.gap);
  w.hold(spec.v_set, spec.width);
  w.hold(0.0, spec.gap);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);  // 3
  w.hold(0.0, spec.gap);
  w.hold(spec.v_reset, spec.width);
  w.hold(0.0, spec.gap);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);  // 7
  w.hold(0.0, spec.gap);

  EnduranceResult out;
  out.meta = meta_for(cfg, params);
  DeviceState s = fresh_state(params);
  for (std::size_t c = 0; c < spec.n; ++c) {
    auto rng = make_rng(cfg.seed, c);
    const DeviceParams cycle_params = perturb_cycle(params, rng);
    auto [next, tr] = run(w, s, cfg, cycle_params);
    s = next;
    ++s.cycle_count;
    const double r_on = 1.0 / read_g(tr, 3);
    const double r_off = 1.0 / read_g(tr, 7);
    out.r_on.push_back(r_on);
    out.r_off.push_back(r_off);
    out.window.push_back(r_off / r_on);
    if (s.failed && !out.failure_cycle) out.failure_cycle = c + 1;
  }
  out.final_state = s;
  return out;
}

// ------------------------------------------------------------------ retention

double RetentionResult::drift_lrs() const { return max_rel_drift(r_lrs); }
double RetentionResult::drift_hrs() const { return max_rel_drift(r_hrs); }

RetentionResult run_retention(const RetentionSpec& spec, SimConfig cfg,
                              const DeviceParams& params) {
  if (!(spec.read_period < spec.t_total) || !(spec.read_period > spec.read.w_read)) {
    throw InvalidInput("run_retention: need w_read < read_period < t_total");
  }
  check_read(spec.read, params);

  DeviceState lrs = fresh_state(params);
  DeviceState hrs = fresh_state(params);
  if (spec.x_lrs && spec.x_hrs) {
    lrs.x = *spec.x_lrs;
    hrs.x = *spec.x_hrs;
  } else {
    // program both states with one DC cycle's SET and RESET halves
    IvCyclesSpec dc;
    SimConfig dc_cfg = SimConfig::dc();
    dc_cfg.i_cc = dc.i_cc;
    dc_cfg.seed = cfg.seed;
    lrs = run(excursion(dc.v_pos, dc.rate, dc.read), lrs, dc_cfg, params).first;
    hrs = run(excursion(dc.v_neg, dc.rate, dc.read), lrs, unlimited(dc_cfg), params).first;
    if (spec.x_lrs) lrs.x = *spec.x_lrs;
    if (spec.x_hrs) hrs.x = *spec.x_hrs;
  }

  Waveform w;
  w.hold(0.0, spec.read.w_read);
  w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
  const auto periods = static_cast<std::size_t>(std::floor(spec.t_total / spec.read_period));
  for (std::size_t k = 0; k < periods; ++k) {
    w.hold(0.0, spec.read_period - spec.read.w_read);
    w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
  }
  w.hold(0.0, spec.read.w_read);

  RetentionResult out;
  out.meta = meta_for(cfg, params);
  const auto reads = w.read_segments();
  const auto tr_l = run(w, lrs, cfg, params).second;
  const auto tr_h = run(w, hrs, cfg, params).second;
  for (std::size_t k : reads) {
    const auto& sl = tr_l.at_segment_end(k);
    const auto& sh = tr_h.at_segment_end(k);
    out.t.push_back(sl.t);
    out.r_lrs.push_back(sl.v_applied / sl.i);
    out.r_hrs.push_back(sh.v_applied / sh.i);
    out.x_lrs.push_back(sl.x);
    out.x_hrs.push_back(sh.x);
  }
  return out;
}

// ----------------------------------------------------------------- multilevel

MultilevelResult run_multilevel(const MultilevelSpec& spec, SimConfig cfg,
                                const DeviceParams& params) {
  if (spec.i_cc_list.empty()) throw InvalidInput("run_multilevel: empty compliance list");
  if (!std::is_sorted(spec.i_cc_list.begin(), spec.i_cc_list.end())) {
    throw InvalidInput("run_multilevel: compliance list must be ascending");
  }
  check_read(spec.read, params);
  MultilevelResult out;
  out.meta = meta_for(cfg, params);
  const Waveform w = excursion(spec.v_set, spec.rate, spec.read);
  for (double icc : spec.i_cc_list) {
    SimConfig level_cfg = cfg;
    level_cfg.i_cc = icc;
    const auto tr = run(w, fresh_state(params), level_cfg, params).second;
    out.levels.emplace_back(icc, 1.0 / read_g(tr, 2));
  }
  return out;
}

// --------------------------------------------------------------- plasticity

LtpLtdResult run_ltp_ltd(const LtpLtdSpec& spec, SimConfig cfg, const DeviceParams& params) {
  check_read(spec.read, params);
  const Waveform up = pulse_train(spec.amp, spec.width, spec.gap, spec.n, spec.read);
  const Waveform down = pulse_train(-spec.amp, spec.width, spec.gap, spec.n, spec.read);
  LtpLtdResult out;
  out.meta = meta_for(cfg, params);
  auto [s, tr_up] = run(up, fresh_state(params), cfg, params);
  out.ltp = make_plasticity(read_series(tr_up, up));
  const auto tr_down = run(down, s, cfg, params).second;
  out.ltd = make_plasticity(read_series(tr_down, down));
  return out;
}

AmplitudeSeriesResult run_amplitude_series(const AmplitudeSeriesSpec& spec, SimConfig cfg,
                                           const DeviceParams& params) {
  if (spec.amps.empty()) throw InvalidInput("run_amplitude_series: empty amplitude list");
  check_read(spec.read, params);
  AmplitudeSeriesResult out;
  out.meta = meta_for(cfg, params);
  out.amps = spec.amps;
  for (double amp : spec.amps) {
    const Waveform up = pulse_train(amp, spec.width, spec.gap, spec.n, spec.read);
    const Waveform down = pulse_train(-amp, spec.width, spec.gap, spec.n, spec.read);
    auto [s, tr_up] = run(up, fresh_state(params), cfg, params);
    out.potentiation.push_back(make_plasticity(read_series(tr_up, up)));
    const auto tr_down = run(down, s, cfg, params).second;
    out.depression.push_back(make_plasticity(read_series(tr_down, down)));
  }
  return out;
}

// ---------------------------------------------------------------- staircases

ResetStaircaseResult run_reset_staircase(const ResetStaircaseSpec& spec, SimConfig cfg,
                                         const DeviceParams& params) {
  if (spec.v_list.empty()) throw InvalidInput("run_reset_staircase: empty voltage list");
  for (std::size_t k = 0; k < spec.v_list.size(); ++k) {
    if (!(spec.v_list[k] < 0.0) || (k > 0 && !(spec.v_list[k] < spec.v_list[k - 1]))) {
      throw InvalidInput("run_reset_staircase: voltages must be negative and descending");
    }
  }
  check_read(spec.read, params);
  cfg.i_cc = spec.i_cc;
  ResetStaircaseResult out;
  out.meta = meta_for(cfg, params);
  DeviceState s = fresh_state(params);
  const Waveform set_w = excursion(spec.set_v, spec.set_rate, spec.read);
  for (double v : spec.v_list) {
    auto [after_set, tr_set] = run(set_w, s, cfg, params);
    const Waveform reset_w = excursion(v, spec.reset_rate, spec.read);
    auto [after_reset, tr_reset] =
        run(reset_w, after_set, unlimited(resolve_ramp(cfg, v, spec.reset_rate)), params);
    s = after_reset;
    out.v_reset.push_back(v);
    out.r_lrs.push_back(1.0 / read_g(tr_set, 2));
    out.r_hrs.push_back(1.0 / read_g(tr_reset, 2));
  }
  return out;
}

SetStaircaseResult run_set_staircase(const SetStaircaseSpec& spec, SimConfig cfg,
                                     const DeviceParams& params) {
  if (spec.v_list.empty()) throw InvalidInput("run_set_staircase: empty voltage list");
  for (std::size_t k = 0; k < spec.v_list.size(); ++k) {
    if (!(spec.v_list[k] > 0.0) || (k > 0 && !(spec.v_list[k] > spec.v_list[k - 1]))) {
      throw InvalidInput("run_set_staircase: voltages must be positive and ascending");
    }
  }
  if (!(spec.reset_v < 0.0)) throw InvalidInput("run_set_staircase: reset_v must be < 0");
  check_read(spec.read, params);
  cfg.i_cc = spec.i_cc;
  SetStaircaseResult out;
  out.meta = meta_for(cfg, params);
  DeviceState s = fresh_state(params);
  const Waveform reset_w = excursion(spec.reset_v, spec.reset_rate, spec.read);
  const SimConfig reset_cfg = unlimited(resolve_ramp(cfg, spec.reset_v, spec.reset_rate));
  for (double v : spec.v_list) {
    s = run(reset_w, s, reset_cfg, params).first;
    const Waveform set_w = excursion(v, spec.set_rate, spec.read);
    auto [after_set, tr] = run(set_w, s, resolve_ramp(cfg, v, spec.set_rate), params);
    s = after_set;
    out.v_set.push_back(v);
    out.g_lrs.push_back(read_g(tr, 2));
  }
  return out;
}

// ----------------------------------------------------------------------- STDP

PreconditionResult precondition_to(double g_target, const PreconditionSpec& spec,
                                   DeviceState state, const SimConfig& cfg,
                                   const DeviceParams& params) {
  if (!(g_target > 0.0)) throw InvalidInput("precondition_to: target must be > 0");
  check_read(spec.read, params);
  PreconditionResult out;
  out.state = state;
  out.g = read_conductance(state, params, spec.read.v_read);
  double width[2] = {spec.width, spec.width};  // [0] SET, [1] RESET
  while (std::fabs(out.g / g_target - 1.0) > spec.tolerance) {
    if (out.pulses == spec.max_pulses) {
      throw SimulationError("precondition_to: target " + std::to_string(g_target) +
                            " S not reached within " + std::to_string(spec.max_pulses) +
                            " pulses");
    }
    const bool set = out.g < g_target;
    const int d = set ? 0 : 1;
    Waveform w;
    w.hold(0.0, spec.gap);
    w.hold(set ? spec.amp : -spec.reset_amp, width[d]);
    w.hold(0.0, spec.gap);
    w.hold(spec.read.v_read, spec.read.w_read, SegmentRole::kRead);
    w.hold(0.0, spec.gap);
    auto [s, tr] = run(w, out.state, cfg, params);
    out.state = s;
    out.g = read_g(tr, 3);
    ++out.pulses;
    const bool overshoot = set ? out.g > g_target * (1.0 + spec.tolerance)
                               : out.g < g_target * (1.0 - spec.tolerance);
    width[d] *= overshoot ? 0.5 : 1.5;
  }
  return out;
}

StdpResult run_stdp(const StdpSpec& spec, SimConfig cfg, const DeviceParams& params) {
  if (spec.delta_ts.empty()) throw InvalidInput("run_stdp: empty delta_t list");
  spec.spike.validate();
  check_read(spec.precondition.read, params);
  StdpResult out;
  out.meta = meta_for(cfg, params);
  for (double dt : spec.delta_ts) {
    const double target = dt >= 0.0 ? spec.g_before_pos : spec.g_before_neg;
    const auto pre = precondition_to(target, spec.precondition, fresh_state(params), cfg, params);
    StdpPairSpec pair{spec.spike, dt, spec.precondition.read, spec.gap};
    const Waveform w = superpose_stdp(pair);
    const auto reads = w.read_segments();
    const auto tr = run(w, pre.state, cfg, params).second;
    const double g0 = read_g(tr, reads.front());
    const double g1 = read_g(tr, reads.back());
    out.points.push_back({dt, delta_g(g0, g1), g0, g1});
  }
  return out;
}

}  // namespace memsyn
