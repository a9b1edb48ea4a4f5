#include "memsyn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "memsyn/errors.hpp"

namespace memsyn {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr int kMaxSubsteps = 1'000'000;

void fnv_mix(std::uint64_t& h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int b = 0; b < 8; ++b) {
    h ^= (bits >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
}

thread_local std::function<void(const Trace&)>* g_observer = nullptr;

}  // namespace

ScopedTraceObserver::ScopedTraceObserver(std::function<void(const Trace&)> fn)
    : fn_(std::move(fn)), prev_(g_observer) {
  g_observer = &fn_;
}

ScopedTraceObserver::~ScopedTraceObserver() { g_observer = prev_; }

void SimConfig::validate() const {
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw InvalidInput("SimConfig: dt_max must be > 0");
  if (!(dx_max > 0.0 && dx_max < 1.0)) throw InvalidInput("SimConfig: dx_max must lie in (0, 1)");
  if (i_cc && !(*i_cc > 0.0)) throw InvalidInput("SimConfig: i_cc must be > 0 when present");
  if (decimation < 1) throw InvalidInput("SimConfig: decimation must be >= 1");
}

void Trace::append(const Trace& tail) {
  if (tail.samples.empty()) return;
  if (samples.empty()) {
    *this = tail;
    return;
  }
  const double t0 = samples.back().t;
  const std::size_t base = samples.size() - 1;
  for (std::size_t k = 1; k < tail.samples.size(); ++k) {
    TraceSample s = tail.samples[k];
    s.t += t0;
    samples.push_back(s);
  }
  for (std::size_t e : tail.segment_end) segment_end.push_back(e + base);
  segment_i_cc.insert(segment_i_cc.end(), tail.segment_i_cc.begin(), tail.segment_i_cc.end());
}

SimConfig SimConfig::pulse() { return SimConfig{}; }

SimConfig SimConfig::dc() {
  SimConfig c;
  c.dt_max = 1e-2;
  return c;
}

std::uint64_t params_hash(const DeviceParams& p) {
  std::uint64_t h = kFnvOffset;
  for (double v : {p.a1, p.n1, p.n2, p.v1, p.v2, p.g_on, p.k_s, p.k_r, p.v0s, p.v0r, p.v_dz, p.p,
                   p.tau_ret, p.i_damage, p.d_fail, p.beta_sag, p.sigma_c2c, p.x_init}) {
    fnv_mix(h, v);
  }
  return h;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t run_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run_index),
                    static_cast<std::uint32_t>(run_index >> 32)};
  return std::mt19937_64(seq);
}

std::pair<double, double> operating_point(double v_applied, const DeviceState& state,
                                          const SimConfig& cfg, const DeviceParams& params) {
  const double i_u = device_current(v_applied, state, params);
  if (cfg.i_cc && std::fabs(i_u) > *cfg.i_cc) {
    const double vd = limited_voltage(v_applied, *cfg.i_cc, state, params);
    return {vd, std::copysign(*cfg.i_cc, i_u)};
  }
  return {v_applied, i_u};
}

std::pair<DeviceState, TraceSample> step(const DeviceState& state, double v_applied, double dt,
                                         const SimConfig& cfg, const DeviceParams& params) {
  if (!(dt >= 0.0) || dt > cfg.dt_max * (1.0 + 1e-9)) {
    throw InvalidInput("step: dt must lie in [0, dt_max]");
  }
  if (!std::isfinite(v_applied)) throw InvalidInput("step: non-finite voltage");
  DeviceState s = state;
  double remaining = dt;
  int substeps = 0;
  while (remaining > 0.0) {
    if (++substeps > kMaxSubsteps) throw SimulationError("step: substep budget exhausted");
    const auto [vd, i] = operating_point(v_applied, s, cfg, params);
    const double rate = std::fabs(state_rate(vd, s, params));
    double h = remaining;
    if (rate * h > cfg.dx_max) h = cfg.dx_max / rate;
    // absorb a sliver left over by rounding into this substep
    if (remaining - h <= 1e-12 * dt) h = remaining;
    s.x = evolve_x(vd, s.x, h, s, params);
    s = accrue(s, vd, i, h, params);
    remaining -= h;
  }
  const auto [vd, i] = operating_point(v_applied, s, cfg, params);
  return {s, TraceSample{0.0, v_applied, vd, i, s.x, s.damage}};
}

namespace {

double rate_at(double v_applied, const DeviceState& s, const SimConfig& cfg,
               const DeviceParams& params) {
  return std::fabs(state_rate(operating_point(v_applied, s, cfg, params).first, s, params));
}

}  // namespace

std::pair<DeviceState, Trace> run(const Waveform& w, const DeviceState& s0, const SimConfig& cfg,
                                  const DeviceParams& params) {
  cfg.validate();
  params.validate();
  Trace trace;
  trace.params_hash = params_hash(params);
  trace.seed = cfg.seed;
  trace.config = cfg;
  if (w.empty()) return {s0, trace};

  const auto& segs = w.segments();
  const auto& bounds = w.boundaries();
  DeviceState s = s0;
  {
    const double v0 = segs.front().value_at(0.0);
    const auto [vd, i] = operating_point(v0, s, cfg, params);
    trace.samples.push_back({0.0, v0, vd, i, s.x, s.damage});
  }
  trace.segment_end.reserve(segs.size());
  trace.segment_i_cc.reserve(segs.size());
  std::size_t accepted = 0;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& seg = segs[k];
    const double t0 = bounds[k];
    const double t1 = bounds[k + 1];
    const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / cfg.dt_max - 1e-9));
    const std::size_t nsteps = n == 0 ? 1 : n;
    const double h = (t1 - t0) / static_cast<double>(nsteps);
    const bool keep_all = seg.role == SegmentRole::kRead;
    auto volts = [&](double t) {
      return t >= t1 ? seg.value_at(seg.duration) : seg.value_at(t - t0);
    };
    double t = t0;
    for (std::size_t j = 1; j <= nsteps; ++j) {
      const double t_grid = j == nsteps ? t1 : t0 + static_cast<double>(j) * h;
      // Split the grid step so that each recorded step moves x by about dx_max.
      while (t < t_grid) {
        double t_next = t_grid;
        const double rate = std::max(rate_at(volts(t), s, cfg, params),
                                     rate_at(volts(t_grid), s, cfg, params));
        if (rate * (t_grid - t) > cfg.dx_max) {
          const double t_try = t + cfg.dx_max / rate;
          if (t_grid - t_try > 1e-12 * (t_grid - t0)) t_next = t_try;
        }
        auto [next, sample] = step(s, volts(t_next), t_next - t, cfg, params);
        s = next;
        sample.t = t_next;
        ++accepted;
        if (keep_all || t_next == t1 || accepted % cfg.decimation == 0) {
          trace.samples.push_back(sample);
        }
        t = t_next;
      }
    }
    trace.segment_end.push_back(trace.samples.size() - 1);
    trace.segment_i_cc.push_back(cfg.i_cc);
  }
  if (g_observer) (*g_observer)(trace);
  return {s, trace};
}

DeviceParams perturb_cycle(const DeviceParams& params, std::mt19937_64& rng) {
  if (params.sigma_c2c == 0.0) return params;
  std::normal_distribution<double> normal(0.0, params.sigma_c2c);
  DeviceParams out = params;
  out.k_s *= std::exp(normal(rng));
  out.k_r *= std::exp(normal(rng));
  return out;
}

}  // namespace memsyn
