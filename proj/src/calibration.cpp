#include "memsyn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>

#include "memsyn/analysis.hpp"
#include "memsyn/errors.hpp"
#include "memsyn/protocols.hpp"

namespace memsyn {

namespace {

bool active(const Target& t) { return t.weight > 0.0; }

void check_target(const Target& t, const char* name) {
  if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
    throw InvalidInput(std::string("TargetFeatures: ") + name + " weight must be >= 0");
  }
  if (active(t) && !(t.value > 0.0 && std::isfinite(t.value))) {
    throw InvalidInput(std::string("TargetFeatures: ") + name + " target must be > 0");
  }
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double rel_sq(const std::optional<double>& f, const Target& t) {
  if (!active(t)) return 0.0;
  if (!f || !std::isfinite(*f)) return kFailurePenalty;
  const double e = (*f - t.value) / t.value;
  return t.weight * e * e;
}

// Least-squares decay scale of ln|dG| against delta_t, reported as a halving time.
std::optional<double> halving_scale(const std::vector<StdpPoint>& pts) {
  std::vector<double> xs, ys;
  for (const auto& p : pts) {
    if (p.delta_t > 0.0 && p.delta_g != 0.0) {
      xs.push_back(p.delta_t);
      ys.push_back(std::log(std::fabs(p.delta_g)));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  if (!(slope < 0.0)) return std::nullopt;
  return std::log(2.0) / -slope;
}

double to_box(double u, double lo, double hi) { return lo + (hi - lo) / (1.0 + std::exp(-u)); }

double from_box(double x, double lo, double hi) {
  const double eps = 1e-9 * (hi - lo);
  x = std::clamp(x, lo + eps, hi - eps);
  return std::log((x - lo) / (hi - x));
}

DeviceParams with_dims(const FitConfig& cfg, const std::vector<double>& x) {
  DeviceParams p = cfg.base;
  for (std::size_t k = 0; k < cfg.dims.size(); ++k) param_ref(p, cfg.dims[k].name) = x[k];
  return p;
}

}  // namespace

void TargetFeatures::validate() const {
  check_target(hrs_slope_low, "hrs_slope_low");
  check_target(slope_boundary_v, "slope_boundary_v");
  check_target(on_off_dc, "on_off_dc");
  check_target(on_off_pulsed, "on_off_pulsed");
  check_target(failure_cycle, "failure_cycle");
  check_target(ltp_min_rise, "ltp_min_rise");
  check_target(stdp_decay, "stdp_decay");
  if (!(power_order_weight >= 0.0) || !std::isfinite(power_order_weight)) {
    throw InvalidInput("TargetFeatures: power_order_weight must be >= 0");
  }
  if (!(ltp_amp > 0.0) || !(ltp_width > 0.0)) {
    throw InvalidInput("TargetFeatures: ltp_amp and ltp_width must be > 0");
  }
  const bool any = active(hrs_slope_low) || active(slope_boundary_v) || active(on_off_dc) ||
                   active(on_off_pulsed) || active(failure_cycle) || active(ltp_min_rise) ||
                   active(stdp_decay) || power_order_weight > 0.0;
  if (!any) throw InvalidInput("TargetFeatures: at least one weight must be > 0");
}

void FitConfig::validate() const {
  if (restarts < 1) throw InvalidInput("FitConfig: restarts must be >= 1");
  if (max_evals < 1) throw InvalidInput("FitConfig: max_evals must be >= 1");
  if (!(reflection > 0.0)) throw InvalidInput("FitConfig: reflection must be > 0");
  if (!(expansion > 1.0)) throw InvalidInput("FitConfig: expansion must be > 1");
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw InvalidInput("FitConfig: contraction must lie in (0, 1)");
  }
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidInput("FitConfig: shrink must lie in (0, 1)");
  for (const auto& d : dims) {
    if (!(d.lo < d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi)) {
      throw InvalidInput("FitConfig: bounds of '" + d.name + "' need lo < hi");
    }
  }
  if (dc_cycles < 1) throw InvalidInput("FitConfig: dc_cycles must be >= 1");
  if (endurance_cycles < 1) throw InvalidInput("FitConfig: endurance_cycles must be >= 1");
}

std::vector<std::pair<double, double>> hrs_branch(const DeviceParams& params, double v_lo,
                                                  double v_hi, std::size_t n) {
  if (!(v_lo > 0.0 && v_hi > v_lo) || n < 2) throw InvalidInput("hrs_branch: bad grid");
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  const double step = std::log(v_hi / v_lo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = v_lo * std::exp(step * static_cast<double>(k));
    out.emplace_back(v, hrs_current(v, params));
  }
  return out;
}

MeasuredFeatures measure_features(const DeviceParams& params, const TargetFeatures& targets,
                                  const FitConfig& cfg) {
  params.validate();
  MeasuredFeatures m;
  if (active(targets.hrs_slope_low) || active(targets.slope_boundary_v)) {
    const auto pts = hrs_branch(params);
    const SlopeFit sf = fit_loglog_segments(pts, 3);
    m.hrs_slope_low = sf.slopes.front();
    m.slope_boundary_v = sf.breakpoints.front();
  }
  if (active(targets.on_off_dc) || targets.power_order_weight > 0.0) {
    IvCyclesSpec spec;
    spec.n = cfg.dc_cycles;
    SimConfig sc = SimConfig::dc();
    sc.seed = cfg.seed;
    const IvCycleResult r = run_iv_cycles(spec, sc, params);
    m.on_off_dc = median_of(r.ratio);
    std::vector<double> ps, pr;
    for (const auto& p : r.p_set) {
      if (p) ps.push_back(*p);
    }
    for (const auto& p : r.p_reset) {
      if (p) pr.push_back(*p);
    }
    if (!ps.empty()) m.p_set = median_of(ps);
    if (!pr.empty()) m.p_reset = median_of(pr);
  }
  if (active(targets.on_off_pulsed) || active(targets.failure_cycle)) {
    EnduranceSpec spec;
    spec.n = cfg.endurance_cycles;
    SimConfig sc = SimConfig::pulse();
    sc.seed = cfg.seed;
    const EnduranceResult r = run_endurance_pulsed(spec, sc, params);
    m.on_off_pulsed = r.median_window_before_failure();
    if (r.failure_cycle) {
      m.failure_cycle = static_cast<double>(*r.failure_cycle);
    } else {
      // Survivor: extrapolate the cycle at which damage would reach d_fail,
      // which keeps the loss sloped where no failure is observed.
      const double d = r.final_state.damage;
      const double n = static_cast<double>(spec.n);
      m.failure_cycle = d > 0.0 ? std::max(n + 1.0, n * params.d_fail / d) : 100.0 * n;
    }
  }
  if (active(targets.ltp_min_rise)) {
    LtpLtdSpec spec;
    spec.amp = targets.ltp_amp;
    spec.width = targets.ltp_width;
    SimConfig sc = SimConfig::pulse();
    sc.seed = cfg.seed;
    const LtpLtdResult r = run_ltp_ltd(spec, sc, params);
    m.ltp_rise = r.ltp.g.back() / r.ltp.g.front() - 1.0;
  }
  if (active(targets.stdp_decay)) {
    StdpSpec spec;
    spec.delta_ts = {5e-6, 10e-6, 20e-6, 40e-6};
    SimConfig sc = SimConfig::pulse();
    sc.seed = cfg.seed;
    m.stdp_decay = halving_scale(run_stdp(spec, sc, params).points);
  }
  return m;
}

double loss_from(const MeasuredFeatures& f, const TargetFeatures& t) {
  double loss = 0.0;
  loss += rel_sq(f.hrs_slope_low, t.hrs_slope_low);
  loss += rel_sq(f.slope_boundary_v, t.slope_boundary_v);
  loss += rel_sq(f.on_off_dc, t.on_off_dc);
  loss += rel_sq(f.on_off_pulsed, t.on_off_pulsed);
  loss += rel_sq(f.failure_cycle, t.failure_cycle);
  if (active(t.ltp_min_rise)) {
    if (!f.ltp_rise || !std::isfinite(*f.ltp_rise)) {
      loss += kFailurePenalty;
    } else {
      const double e = std::max(0.0, t.ltp_min_rise.value - *f.ltp_rise) / t.ltp_min_rise.value;
      loss += t.ltp_min_rise.weight * e * e;
    }
  }
  loss += rel_sq(f.stdp_decay, t.stdp_decay);
  if (t.power_order_weight > 0.0) {
    if (!f.p_set || !f.p_reset) {
      loss += kFailurePenalty;
    } else {
      const double e = std::max(0.0, 1.0 - *f.p_reset / *f.p_set);
      loss += t.power_order_weight * e * e;
    }
  }
  return loss;
}

double objective(const DeviceParams& params, const TargetFeatures& targets, const FitConfig& cfg,
                 ObjectiveLog* log) {
  if (log) ++log->evaluations;
  auto fail = [&](const std::string& why) {
    if (log) {
      ++log->failures;
      log->messages.push_back(why);
    }
    return kFailurePenalty;
  };
  try {
    const double loss = loss_from(measure_features(params, targets, cfg), targets);
    if (!std::isfinite(loss)) return fail("non-finite loss");
    return loss;
  } catch (const std::exception& e) {
    return fail(e.what());
  }
}

SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, const FitConfig& cfg) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidInput("minimize_simplex: dimension must be >= 1");
  const bool boxed = !cfg.dims.empty();
  if (boxed && cfg.dims.size() != n) {
    throw InvalidInput("minimize_simplex: dims must match the dimension of x0");
  }
  for (std::size_t k = 0; boxed && k < n; ++k) {
    if (x0[k] < cfg.dims[k].lo || x0[k] > cfg.dims[k].hi) {
      throw InvalidInput("minimize_simplex: x0 outside the box of '" + cfg.dims[k].name + "'");
    }
  }

  SimplexResult best;
  best.x = x0;
  best.f = best.f0 = f(x0);
  if (!std::isfinite(best.f)) throw InvalidInput("minimize_simplex: f(x0) is not finite");

  auto to_x = [&](const std::vector<double>& u) {
    if (!boxed) return u;
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = to_box(u[k], cfg.dims[k].lo, cfg.dims[k].hi);
    return x;
  };
  std::size_t evals = 1;
  auto eval = [&](const std::vector<double>& u) {
    const std::vector<double> x = to_x(u);
    double v = f(x);
    ++evals;
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    if (v < best.f) {
      best.x = x;
      best.f = v;
    }
    return v;
  };

  std::vector<double> u0 = x0;
  if (boxed) {
    for (std::size_t k = 0; k < n; ++k) u0[k] = from_box(x0[k], cfg.dims[k].lo, cfg.dims[k].hi);
  }
  std::vector<std::vector<double>> simplex{u0};
  std::vector<double> fv{boxed ? eval(u0) : best.f};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> u = u0;
    if (boxed) {
      u[k] += u0[k] < 0.0 ? 1.0 : -1.0;
    } else {
      u[k] += u0[k] != 0.0 ? 0.05 * u0[k] : 0.00025;
    }
    simplex.push_back(u);
    fv.push_back(eval(u));
  }

  std::vector<std::size_t> order(n + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = c[k] + t * (w[k] - c[k]);
    return out;
  };

  while (evals < cfg.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[n - 1];

    double diameter = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::fabs(simplex[j][k] - simplex[lo][k]));
      diameter = std::max(diameter, d);
    }
    if (diameter < 1e-9) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == hi) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[j][k] / static_cast<double>(n);
    }

    const auto xr = point(centroid, simplex[hi], -cfg.reflection);
    const double fr = eval(xr);
    if (fr < fv[lo]) {
      const auto xe = point(centroid, simplex[hi], -cfg.reflection * cfg.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[hi] = xe;
        fv[hi] = fe;
      } else {
        simplex[hi] = xr;
        fv[hi] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[hi] = xr;
      fv[hi] = fr;
      continue;
    }
    const bool outside = fr < fv[hi];
    const auto xc = outside ? point(centroid, simplex[hi], -cfg.reflection * cfg.contraction)
                            : point(centroid, simplex[hi], cfg.contraction);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[hi])) {
      simplex[hi] = xc;
      fv[hi] = fc;
      continue;
    }
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == lo) continue;
      simplex[j] = point(simplex[lo], simplex[j], cfg.shrink);
      fv[j] = eval(simplex[j]);
    }
  }
  best.evals = evals;
  return best;
}

FitResult fit(const TargetFeatures& targets, const FitConfig& cfg) {
  targets.validate();
  cfg.validate();
  if (cfg.dims.empty()) throw InvalidInput("fit: no dimensions to fit");
  for (const auto& d : cfg.dims) param_value(cfg.base, d.name);

  FitResult out;
  out.loss = std::numeric_limits<double>::infinity();
  auto f = [&](const std::vector<double>& x) {
    return objective(with_dims(cfg, x), targets, cfg, &out.log);
  };
  bool any = false;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    auto rng = make_rng(cfg.seed, r);
    std::vector<double> x0;
    for (const auto& d : cfg.dims) x0.push_back(std::uniform_real_distribution<double>(d.lo, d.hi)(rng));
    try {
      const SimplexResult s = minimize_simplex(f, x0, cfg);
      out.initial_losses.push_back(s.f0);
      out.restart_losses.push_back(s.f);
      any = true;
      if (s.f < out.loss) {
        out.loss = s.f;
        out.x = s.x;
      }
    } catch (const InvalidInput&) {
      out.initial_losses.push_back(std::numeric_limits<double>::quiet_NaN());
      out.restart_losses.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (!any) throw FitFailure("fit: every restart produced a non-finite loss");
  out.params = with_dims(cfg, out.x);
  return out;
}

}  // namespace memsyn
