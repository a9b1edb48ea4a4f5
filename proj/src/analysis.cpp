#include "memsyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "memsyn/errors.hpp"

namespace memsyn {

double delta_g(double g_before, double g_after) {
  if (!(g_before > 0.0)) throw InvalidInput("delta_g: g_before must be > 0");
  return (g_after - g_before) / g_before;
}

double on_off_ratio(double r_off, double r_on) {
  if (!(r_off > 0.0) || !(r_on > 0.0)) throw InvalidInput("on_off_ratio: resistances must be > 0");
  return r_off / r_on;
}

SwitchingPower switching_power(std::span<const TraceSample> samples) {
  SwitchingPower out;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double a = samples[k - 1].x;
    const double b = samples[k].x;
    const double p = std::fabs(samples[k].v_device * samples[k].i);
    if (!out.p_set && a < 0.5 && b >= 0.5) out.p_set = p;
    if (!out.p_reset && a > 0.5 && b <= 0.5) out.p_reset = p;
    if (out.p_set && out.p_reset) break;
  }
  return out;
}

namespace {

// Prefix sums for O(1) least-squares cost of any contiguous range.
struct Moments {
  std::vector<double> n, sx, sy, sxx, sxy, syy;

  explicit Moments(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t m = x.size();
    n.assign(m + 1, 0.0);
    sx = sy = sxx = sxy = syy = n;
    for (std::size_t i = 0; i < m; ++i) {
      n[i + 1] = n[i] + 1.0;
      sx[i + 1] = sx[i] + x[i];
      sy[i + 1] = sy[i] + y[i];
      sxx[i + 1] = sxx[i] + x[i] * x[i];
      sxy[i + 1] = sxy[i] + x[i] * y[i];
      syy[i + 1] = syy[i] + y[i] * y[i];
    }
  }

  // slope, intercept, residual over [i, j)
  [[nodiscard]] std::tuple<double, double, double> line(std::size_t i, std::size_t j) const {
    const double cnt = n[j] - n[i];
    const double mx = (sx[j] - sx[i]) / cnt;
    const double my = (sy[j] - sy[i]) / cnt;
    const double cxx = (sxx[j] - sxx[i]) - cnt * mx * mx;
    const double cxy = (sxy[j] - sxy[i]) - cnt * mx * my;
    const double cyy = (syy[j] - syy[i]) - cnt * my * my;
    if (cxx <= 0.0) return {0.0, my, std::max(0.0, cyy)};
    const double slope = cxy / cxx;
    return {slope, my - slope * mx, std::max(0.0, cyy - slope * cxy)};
  }
};

}  // namespace

SlopeFit fit_loglog_segments(std::span<const std::pair<double, double>> points, std::size_t k) {
  if (k < 1) throw InvalidInput("fit_loglog_segments: k must be >= 1");
  if (points.size() < 3 * k) throw InvalidInput("fit_loglog_segments: need at least 3k points");
  std::vector<std::pair<double, double>> pts(points.begin(), points.end());
  for (const auto& [v, i] : pts) {
    if (!(v > 0.0) || !(i > 0.0) || !std::isfinite(v) || !std::isfinite(i)) {
      throw InvalidInput("fit_loglog_segments: V and I must be finite and > 0");
    }
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t m = pts.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(pts[i].first);
    y[i] = std::log(pts[i].second);
  }
  const Moments mom(x, y);
  constexpr std::size_t kMinSeg = 2;
  const double inf = std::numeric_limits<double>::infinity();

  // best[s][j]: minimal residual covering points [0, j) with s segments.
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(m + 1, inf));
  std::vector<std::vector<std::size_t>> from(k + 1, std::vector<std::size_t>(m + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t s = 1; s <= k; ++s) {
    for (std::size_t j = s * kMinSeg; j <= m; ++j) {
      for (std::size_t i = (s - 1) * kMinSeg; i + kMinSeg <= j; ++i) {
        if (best[s - 1][i] == inf) continue;
        const double c = best[s - 1][i] + std::get<2>(mom.line(i, j));
        if (c < best[s][j]) {
          best[s][j] = c;
          from[s][j] = i;
        }
      }
    }
  }

  std::vector<std::size_t> starts(k + 1);
  starts[k] = m;
  for (std::size_t s = k; s >= 1; --s) starts[s - 1] = from[s][starts[s]];

  SlopeFit fit;
  fit.residual = best[k][m];
  for (std::size_t s = 0; s < k; ++s) {
    const auto [slope, icpt, res] = mom.line(starts[s], starts[s + 1]);
    fit.slopes.push_back(slope);
    fit.intercepts.push_back(icpt);
    if (s > 0) {
      const std::size_t b = starts[s];
      fit.breakpoints.push_back(std::sqrt(pts[b - 1].first * pts[b].first));
    }
  }
  return fit;
}

PlasticityResult make_plasticity(std::vector<double> g) {
  PlasticityResult r;
  r.w.assign(g.size(), 0.0);
  if (!g.empty()) {
    const double g0 = g.front();
    double extreme = g0;
    for (double v : g) {
      if (std::fabs(v - g0) > std::fabs(extreme - g0)) extreme = v;
    }
    if (extreme != g0) {
      for (std::size_t n = 0; n < g.size(); ++n) r.w[n] = (g[n] - g0) / (extreme - g0);
    }
  }
  r.g = std::move(g);
  return r;
}

double nonlinearity(std::span<const double> w) {
  if (w.size() < 3) throw InvalidInput("nonlinearity: need at least 3 points");
  const double big_n = static_cast<double>(w.size() - 1);
  double worst = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    worst = std::max(worst, std::fabs(w[n] - static_cast<double>(n) / big_n));
  }
  return worst;
}

double hysteresis_area(std::span<const TraceSample> samples) {
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const auto& a = samples[k - 1];
    const auto& b = samples[k];
    const double piece = 0.5 * (b.v_applied - a.v_applied) * (b.i + a.i);
    if (a.v_applied + b.v_applied >= 0.0) {
      pos += piece;
    } else {
      neg += piece;
    }
  }
  return std::fabs(pos) + std::fabs(neg);
}

std::size_t count_in_band(std::span<const TraceSample> samples, double lo, double hi) {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [&](const TraceSample& s) { return s.x > lo && s.x < hi; }));
}

}  // namespace memsyn
