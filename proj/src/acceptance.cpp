#include "memsyn/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <ostream>
#include <random>

#include "memsyn/analysis.hpp"
#include "memsyn/calibration.hpp"
#include "memsyn/protocols.hpp"
#include "memsyn/simulator.hpp"
#include "memsyn/waveform.hpp"

namespace memsyn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return true;
}

// Largest set of values with every pair more than `rel` apart.
std::size_t distinct_states(std::vector<double> g, double rel) {
  if (g.empty()) return 0;
  std::sort(g.begin(), g.end());
  std::size_t n = 1;
  double last = g.front();
  for (double v : g) {
    if (v > last * (1.0 + rel)) {
      ++n;
      last = v;
    }
  }
  return n;
}

SimConfig retention_sim() {
  SimConfig c;
  c.dt_max = 1.0;
  return c;
}

// Collects bound violations over every trace the simulator produces.
struct BoundsAudit {
  std::size_t traces = 0;
  std::size_t samples = 0;
  std::size_t x_violations = 0;
  std::size_t i_violations = 0;

  void operator()(const Trace& tr) {
    ++traces;
    std::size_t seg = 0;
    for (std::size_t j = 0; j < tr.samples.size(); ++j) {
      while (seg < tr.segment_end.size() && tr.segment_end[seg] < j) ++seg;
      const auto& s = tr.samples[j];
      ++samples;
      if (!(s.x >= 0.0 && s.x <= 1.0)) ++x_violations;
      // sample j belongs to segment seg; sample 0 is the initial point of segment 0
      const std::size_t k = std::min(seg, tr.segment_i_cc.size() - 1);
      const auto& icc = tr.segment_i_cc.empty() ? tr.config.i_cc : tr.segment_i_cc[k];
      if (icc && std::fabs(s.i) > *icc * (1.0 + 1e-12)) ++i_violations;
    }
  }
};

struct Suite {
  const DeviceParams& params;
  std::ostream* out;
  std::vector<CriterionResult> results;

  void record(int id, const char* name, bool pass, std::string detail) {
    results.push_back({id, name, pass, std::move(detail)});
    if (out) *out << format_result(results.back()) << std::endl;
  }

  void guarded(int id, const char* name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(id, name, false, std::string("exception: ") + e.what());
    }
  }
};

}  // namespace

std::string format_result(const CriterionResult& r) {
  return fmt("[%s] %2d %-18s %s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
}

std::vector<CriterionResult> run_acceptance(const DeviceParams& params, std::ostream* out) {
  Suite suite{params, out, {}};
  BoundsAudit audit;
  auto observe = [&audit](const Trace& tr) { audit(tr); };
  ScopedTraceObserver observer(observe);
  const DeviceParams& P = params;

  // 1: single DC cycle with its trace
  IvCycleResult first;
  suite.guarded(1, "hysteresis", [&] {
    IvCyclesSpec spec;
    spec.n = 1;
    spec.keep_traces = true;
    const auto t0 = Clock::now();
    first = run_iv_cycles(spec, SimConfig::dc(), P);
    const double secs = seconds_since(t0);
    const auto& tr = first.traces.at(0);
    const double area = hysteresis_area(tr.samples);
    // samples strictly inside the 10-90% span of each half's state change
    auto inside = [&](std::size_t seg_first, std::size_t seg_last) {
      const std::size_t j0 = seg_first == 0 ? 0 : tr.segment_end.at(seg_first - 1);
      const std::size_t j1 = tr.segment_end.at(seg_last);
      const double x0 = tr.samples[j0].x;
      const double x1 = tr.samples[j1].x;
      const double lo = std::min(x0, x1) + 0.1 * std::fabs(x1 - x0);
      const double hi = std::max(x0, x1) - 0.1 * std::fabs(x1 - x0);
      std::size_t n = 0;
      for (std::size_t j = j0; j <= j1; ++j) n += tr.samples[j].x > lo && tr.samples[j].x < hi;
      return n;
    };
    const std::size_t set_n = inside(0, 1);    // up and down ramps at v_pos
    const std::size_t reset_n = inside(3, 4);  // ramps at v_neg
    const bool pass = area > 0.0 && set_n >= 3 && reset_n >= 3 && secs < 5.0;
    suite.record(1, "hysteresis", pass,
                 fmt("area=%.4g VA, transition samples set=%zu reset=%zu, runtime=%.2fs (<5)",
                     area, set_n, reset_n, secs));
  });

  // 2: conduction regimes
  suite.guarded(2, "sclc-regimes", [&] {
    const SlopeFit hrs = fit_loglog_segments(hrs_branch(P), 3);
    // LRS branch: the state reached by the first SET, probed below the dead zone
    DeviceState lrs = fresh_state(P);
    lrs.x = first.traces.empty() ? 1.0 : first.traces[0].at_segment_end(2).x;
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 41; ++k) {
      const double v = 0.02 * std::pow(0.25 / 0.02, k / 40.0);
      pts.emplace_back(v, device_current(v, lrs, P));
    }
    const double lrs_slope = fit_loglog_segments(pts, 1).slopes[0];
    const bool pass = std::fabs(hrs.slopes[0] - 1.1) <= 0.15 &&
                      std::fabs(hrs.breakpoints[0] - 0.4) <= 0.1 &&
                      std::fabs(hrs.slopes[2] - 2.0) <= 0.3 && std::fabs(lrs_slope - 1.0) <= 0.05;
    suite.record(2, "sclc-regimes", pass,
                 fmt("HRS slopes %.3f/%.3f/%.3f, first breakpoint %.3f V; LRS slope %.3f (x=%.3f)",
                     hrs.slopes[0], hrs.slopes[1], hrs.slopes[2], hrs.breakpoints[0], lrs_slope,
                     lrs.x));
  });

  // 3 and 11: 120-cycle DC endurance
  IvCycleResult dc;
  suite.guarded(3, "dc-endurance", [&] {
    dc = run_iv_cycles(IvCyclesSpec{}, SimConfig::dc(), P);
    const double med = median(dc.ratio);
    const bool pass = dc.ratio.size() == 120 && !dc.final_state.failed && med >= 11.0 && med <= 44.0;
    suite.record(3, "dc-endurance", pass,
                 fmt("%zu cycles, failed=%d, median R_OFF/R_ON=%.2f (11..44)", dc.ratio.size(),
                     dc.final_state.failed ? 1 : 0, med));
  });

  suite.guarded(4, "pulsed-endurance", [&] {
    const auto t0 = Clock::now();
    const EnduranceResult e = run_endurance_pulsed(EnduranceSpec{}, SimConfig::pulse(), P);
    const double secs = seconds_since(t0);
    const double win = e.median_window_before_failure();
    const bool pass = win >= 17.0 && win <= 68.0 && e.failure_cycle && *e.failure_cycle >= 400 &&
                      *e.failure_cycle <= 500 && secs < 30.0;
    suite.record(4, "pulsed-endurance", pass,
                 fmt("median window=%.2f (17..68), failure cycle=%lld (400..500), runtime=%.2fs",
                     win, e.failure_cycle ? static_cast<long long>(*e.failure_cycle) : -1LL, secs));
  });

  suite.guarded(5, "retention", [&] {
    const RetentionResult r = run_retention(RetentionSpec{}, retention_sim(), P);
    const bool pass = r.drift_lrs() < 0.05 && r.drift_hrs() < 0.05 && r.t.back() >= 1e4 - 1.0;
    suite.record(5, "retention", pass,
                 fmt("drift LRS=%.4f HRS=%.4f over %.0f s (<0.05)", r.drift_lrs(), r.drift_hrs(),
                     r.t.back()));
  });

  suite.guarded(6, "multilevel", [&] {
    const MultilevelResult m = run_multilevel(MultilevelSpec{}, SimConfig::dc(), P);
    std::vector<double> r;
    for (const auto& lv : m.levels) r.push_back(lv.second);
    suite.record(6, "multilevel", strictly_decreasing(r),
                 fmt("R_LRS at 0.5/1/5 mA = %.1f/%.1f/%.1f ohm", r[0], r[1], r[2]));
  });

  suite.guarded(7, "ltp-ltd", [&] {
    const LtpLtdResult r = run_ltp_ltd(LtpLtdSpec{}, SimConfig::pulse(), P);
    const auto& up = r.ltp.g;
    const auto& down = r.ltd.g;
    const bool up_mono = std::is_sorted(up.begin(), up.end());
    const bool down_mono = std::is_sorted(down.rbegin(), down.rend());
    const double rise = up.back() / up.front() - 1.0;
    suite.record(7, "ltp-ltd", up_mono && down_mono && rise >= 0.5,
                 fmt("LTP monotone=%d rise=%.1f%% (>=50%%), LTD monotone=%d", up_mono ? 1 : 0,
                     100.0 * rise, down_mono ? 1 : 0));
  });

  suite.guarded(8, "amplitude-series", [&] {
    const AmplitudeSeriesResult r =
        run_amplitude_series(AmplitudeSeriesSpec{}, SimConfig::pulse(), P);
    const auto& g10 = r.potentiation.at(0).g;
    const auto& g12 = r.potentiation.at(1).g;
    const auto& g14 = r.potentiation.at(2).g;
    bool ordered = true;
    for (std::size_t n = 21; n < g14.size(); ++n) ordered = ordered && g14[n] > g12[n] && g12[n] > g10[n];
    const auto peak = static_cast<std::size_t>(std::max_element(g14.begin(), g14.end()) - g14.begin());
    const bool pass = ordered && peak >= 20 && peak <= 35 && g14.back() < g14[peak];
    suite.record(8, "amplitude-series", pass,
                 fmt("ordered after pulse 20=%d, 1.4 V peak at pulse %zu (20..35), end/peak=%.4f",
                     ordered ? 1 : 0, peak, g14.back() / g14[peak]));
  });

  suite.guarded(9, "staircases", [&] {
    const ResetStaircaseResult rs = run_reset_staircase(ResetStaircaseSpec{}, SimConfig::dc(), P);
    const SetStaircaseResult ss = run_set_staircase(SetStaircaseSpec{}, SimConfig::dc(), P);
    const bool hrs_mono = std::is_sorted(rs.r_hrs.begin(), rs.r_hrs.end());
    const bool g_mono = std::is_sorted(ss.g_lrs.begin(), ss.g_lrs.end());
    const std::size_t states = distinct_states(ss.g_lrs, 0.05);
    suite.record(9, "staircases", hrs_mono && g_mono && states >= 6,
                 fmt("R_HRS monotone=%d (%.0f..%.0f ohm), G_LRS monotone=%d, states=%zu (>=6)",
                     hrs_mono ? 1 : 0, rs.r_hrs.front(), rs.r_hrs.back(), g_mono ? 1 : 0, states));
  });

  suite.guarded(10, "stdp", [&] {
    const StdpResult r = run_stdp(StdpSpec{}, SimConfig::pulse(), P);
    bool signs = true;
    std::vector<double> neg, pos;
    for (const auto& p : r.points) {
      signs = signs && (p.delta_g > 0.0) == (p.delta_t > 0.0) && p.delta_g != 0.0;
      (p.delta_t < 0.0 ? neg : pos).push_back(std::fabs(p.delta_g));
    }
    std::reverse(neg.begin(), neg.end());  // order by increasing |delta_t|
    StdpSpec zero;
    zero.delta_ts = {0.0};
    const double dg0 = run_stdp(zero, SimConfig::pulse(), P).points.at(0).delta_g;
    const bool pass = signs && strictly_decreasing(neg) && strictly_decreasing(pos) &&
                      std::fabs(dg0) < 0.01;
    suite.record(10, "stdp", pass,
                 fmt("signs ok=%d, |dG| decreasing -=%d +=%d, dG(+5us)=%.3f dG(-5us)=%.3f, "
                     "|dG(0)|=%.2e (<0.01)",
                     signs ? 1 : 0, strictly_decreasing(neg) ? 1 : 0,
                     strictly_decreasing(pos) ? 1 : 0, pos.empty() ? 0.0 : pos.front(),
                     neg.empty() ? 0.0 : -neg.front(), std::fabs(dg0)));
  });

  suite.guarded(11, "power-order", [&] {
    const auto ps = first.p_set.at(0);
    const auto pr = first.p_reset.at(0);
    std::vector<double> mps, mpr;
    for (const auto& p : dc.p_set) {
      if (p) mps.push_back(*p);
    }
    for (const auto& p : dc.p_reset) {
      if (p) mpr.push_back(*p);
    }
    const double med_s = mps.empty() ? NAN : median(mps);
    const double med_r = mpr.empty() ? NAN : median(mpr);
    const bool pass = ps && pr && *pr > *ps && med_r > med_s;
    suite.record(11, "power-order", pass,
                 fmt("first sweep P_SET=%.3g mW P_RESET=%.3g mW; 120-cycle medians %.3g/%.3g mW",
                     ps.value_or(NAN) * 1e3, pr.value_or(NAN) * 1e3, med_s * 1e3, med_r * 1e3));
  });

  suite.guarded(12, "properties", [&] {
    std::vector<std::string> notes;
    bool pass = true;

    // integrator convergence on the LTP train
    const LtpLtdSpec lt;
    const Waveform train = pulse_train(lt.amp, lt.width, lt.gap, lt.n, lt.read);
    SimConfig coarse = SimConfig::pulse();
    SimConfig fine = coarse;
    fine.dx_max = coarse.dx_max / 2.0;
    const double xa = run(train, fresh_state(P), coarse, P).first.x;
    const double xb = run(train, fresh_state(P), fine, P).first.x;
    const bool conv = std::fabs(xa - xb) < 1e-3;
    pass = pass && conv;
    notes.push_back(fmt("convergence |dx|=%.2e", std::fabs(xa - xb)));

    // determinism: repeated seeded runs are bit-identical
    IvCyclesSpec rep;
    rep.n = 3;
    rep.keep_traces = true;
    SimConfig seeded = SimConfig::dc();
    seeded.seed = 7;
    const auto a = run_iv_cycles(rep, seeded, P);
    const auto b = run_iv_cycles(rep, seeded, P);
    bool same = a.ratio == b.ratio && a.traces.size() == b.traces.size();
    for (std::size_t k = 0; same && k < a.traces.size(); ++k) {
      same = a.traces[k].samples == b.traces[k].samples;
    }
    const auto sa = run_stdp(StdpSpec{}, SimConfig::pulse(), P);
    const auto sb = run_stdp(StdpSpec{}, SimConfig::pulse(), P);
    for (std::size_t k = 0; same && k < sa.points.size(); ++k) {
      same = sa.points[k].delta_g == sb.points[k].delta_g;
    }
    pass = pass && same;
    notes.push_back(fmt("deterministic=%d", same ? 1 : 0));

    // simplex: quadratic and Rosenbrock
    FitConfig sc;
    sc.dims.clear();
    sc.max_evals = 5000;
    const auto q = minimize_simplex([](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0); },
                                    {0.0}, sc);
    const auto rb = minimize_simplex(
        [](const std::vector<double>& x) {
          return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
        },
        {-1.2, 1.0}, sc);
    const bool simplex_ok = std::fabs(q.x[0] - 3.0) <= 1e-6 && std::fabs(rb.x[0] - 1.0) <= 1e-3 &&
                            std::fabs(rb.x[1] - 1.0) <= 1e-3;
    pass = pass && simplex_ok;
    notes.push_back(fmt("simplex quad=%.2e rosen=(%.5f,%.5f)", q.x[0] - 3.0, rb.x[0], rb.x[1]));

    // fit self-consistency: targets from known parameters, recovered within 10%
    DeviceParams truth = P;
    truth.n1 = 1.2;
    truth.v1 = 0.45;
    truth.d_fail = 3.2e-4;
    TargetFeatures tf;
    tf.on_off_dc.weight = 0.0;
    tf.on_off_pulsed.weight = 0.0;
    tf.ltp_min_rise.weight = 0.0;
    tf.power_order_weight = 0.0;
    FitConfig fc;
    fc.base = P;
    fc.dims = {{"n1", 1.0, 1.4}, {"v1", 0.3, 0.6}, {"d_fail", 1.5e-4, 6e-4}};
    fc.restarts = 1;
    fc.max_evals = 150;
    const MeasuredFeatures m = measure_features(truth, tf, fc);
    tf.hrs_slope_low.value = *m.hrs_slope_low;
    tf.slope_boundary_v.value = *m.slope_boundary_v;
    tf.failure_cycle.value = *m.failure_cycle;
    const FitResult fr = fit(tf, fc);
    double worst = 0.0;
    for (std::size_t k = 0; k < fc.dims.size(); ++k) {
      const double want = param_value(truth, fc.dims[k].name);
      worst = std::max(worst, std::fabs(fr.x[k] - want) / want);
    }
    pass = pass && worst <= 0.10;
    notes.push_back(fmt("fit recovery worst=%.2f%%", 100.0 * worst));

    // bounds over every trace produced so far in this suite
    const bool bounds = audit.x_violations == 0 && audit.i_violations == 0 && audit.samples > 0;
    pass = pass && bounds;
    notes.push_back(fmt("bounds: %zu samples in %zu traces, x/i violations %zu/%zu", audit.samples,
                        audit.traces, audit.x_violations, audit.i_violations));

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    suite.record(12, "properties", pass, detail);
  });

  return suite.results;
}

}  // namespace memsyn
