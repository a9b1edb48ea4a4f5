#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "memsyn/simulator.hpp"

namespace memsyn {

/// Relative conductance change (g_after - g_before) / g_before.
double delta_g(double g_before, double g_after);

double on_off_ratio(double r_off, double r_on);

struct SwitchingPower {
  std::optional<double> p_set;    // W
  std::optional<double> p_reset;  // W
};

/// |v_device * i| at the first upward and first downward crossing of x = 0.5.
SwitchingPower switching_power(std::span<const TraceSample> samples);
inline SwitchingPower switching_power(const Trace& trace) { return switching_power(trace.samples); }

struct SlopeFit {
  std::vector<double> breakpoints;  // V, k - 1 entries
  std::vector<double> slopes;       // k entries
  std::vector<double> intercepts;   // log(I) at log(V) = 0, k entries
  double residual = 0.0;            // sum of squared log residuals
};

/// Piecewise power-law fit of I(V) with k segments.
///
/// Exhaustive over contiguous partitions of the (V-sorted) sample grid,
/// solved exactly by dynamic programming; each segment gets an ordinary
/// least-squares line in (ln V, ln I) and holds at least two samples.
/// Ties go to the earliest breakpoints.  Breakpoints are reported at the
/// geometric midpoint of the two samples straddling them.
SlopeFit fit_loglog_segments(std::span<const std::pair<double, double>> points, std::size_t k);

struct PlasticityResult {
  std::vector<double> g;  // S, pulse-indexed (n + 1 entries)
  std::vector<double> w;  // normalized weight, w[0] = 0
};

/// Normalizes a conductance series against its largest excursion from g[0].
PlasticityResult make_plasticity(std::vector<double> g);

/// max_n |w_n - n / N|: deviation of the normalized weight from a linear ramp.
double nonlinearity(std::span<const double> w);
inline double nonlinearity(const PlasticityResult& r) { return nonlinearity(r.w); }

/// Sum of the absolute loop areas of the positive- and negative-voltage lobes
/// of an I-V trace, in the (v_applied, i) plane.
double hysteresis_area(std::span<const TraceSample> samples);

/// Number of samples with lo < x < hi.
std::size_t count_in_band(std::span<const TraceSample> samples, double lo, double hi);

/// Local d(ln I)/d(ln V) by central difference in ln V.
template <typename F>
double loglog_slope(F&& current, double v, double rel_step = 1e-4);

}  // namespace memsyn

#include <cmath>

template <typename F>
double memsyn::loglog_slope(F&& current, double v, double rel_step) {
  const double lo = v * std::exp(-rel_step);
  const double hi = v * std::exp(rel_step);
  return (std::log(std::fabs(current(hi))) - std::log(std::fabs(current(lo)))) / (2.0 * rel_step);
}
