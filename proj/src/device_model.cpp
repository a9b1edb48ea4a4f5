#include "memsyn/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "memsyn/errors.hpp"

namespace memsyn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(std::string("DeviceParams: ") + what);
}

// Integrates du/dt = -r * u^p for a dimensionless exposure s = r * t.
double window_decay(double u, double s, double p) {
  if (u <= 0.0) return 0.0;
  if (s <= 0.0) return u;
  if (p == 0.0) return std::max(0.0, u - s);
  if (p == 1.0) return u * std::exp(-s);
  if (p > 1.0) {
    const double base = std::pow(u, 1.0 - p) + (p - 1.0) * s;
    return std::pow(base, -1.0 / (p - 1.0));
  }
  const double base = std::pow(u, 1.0 - p) - (1.0 - p) * s;
  return base <= 0.0 ? 0.0 : std::pow(base, 1.0 / (1.0 - p));
}

double set_drive(double v, const DeviceParams& prm) {
  return prm.k_s * std::expm1((v - prm.v_dz) / prm.v0s);
}

double reset_drive(double v, const DeviceParams& prm) {
  return prm.k_r * std::expm1((-v - prm.v_dz) / prm.v0r);
}

}  // namespace

double DeviceParams::a2() const { return a1 * std::pow(v1, n1 - n2); }

double DeviceParams::a3() const { return a2() * std::pow(v2, n2 - 2.0); }

void DeviceParams::validate() const {
  require(std::isfinite(a1) && a1 > 0.0, "a1 must be > 0");
  require(n1 >= 1.0 && n1 <= 1.5, "n1 must lie in [1, 1.5]");
  require(std::isfinite(n2) && n2 > 2.0, "n2 must be > 2");
  require(std::isfinite(v1) && v1 > 0.0, "v1 must be > 0");
  require(std::isfinite(v2) && v2 > v1, "v2 must be > v1");
  require(std::isfinite(g_on) && g_on > 0.0, "g_on must be > 0");
  require(std::isfinite(k_s) && k_s >= 0.0, "k_s must be >= 0");
  require(std::isfinite(k_r) && k_r >= 0.0, "k_r must be >= 0");
  require(std::isfinite(v0s) && v0s > 0.0, "v0s must be > 0");
  require(std::isfinite(v0r) && v0r > 0.0, "v0r must be > 0");
  require(std::isfinite(v_dz) && v_dz > 0.0, "v_dz must be > 0");
  require(std::isfinite(p) && p >= 0.0, "p must be >= 0");
  require(tau_ret > 0.0, "tau_ret must be > 0");
  require(i_damage >= 0.0, "i_damage must be >= 0");
  require(d_fail > 0.0, "d_fail must be > 0");
  require(std::isfinite(beta_sag) && beta_sag >= 0.0, "beta_sag must be >= 0");
  require(std::isfinite(sigma_c2c) && sigma_c2c >= 0.0, "sigma_c2c must be >= 0");
  require(x_init >= 0.0 && x_init <= 1.0, "x_init must lie in [0, 1]");
}

DeviceParams DeviceParams::calibrated() { return DeviceParams{}; }

namespace {

using Field = std::pair<std::string_view, double DeviceParams::*>;

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"a1", &DeviceParams::a1},           {"n1", &DeviceParams::n1},
      {"n2", &DeviceParams::n2},           {"v1", &DeviceParams::v1},
      {"v2", &DeviceParams::v2},           {"g_on", &DeviceParams::g_on},
      {"k_s", &DeviceParams::k_s},         {"k_r", &DeviceParams::k_r},
      {"v0s", &DeviceParams::v0s},         {"v0r", &DeviceParams::v0r},
      {"v_dz", &DeviceParams::v_dz},       {"p", &DeviceParams::p},
      {"tau_ret", &DeviceParams::tau_ret}, {"i_damage", &DeviceParams::i_damage},
      {"d_fail", &DeviceParams::d_fail},   {"beta_sag", &DeviceParams::beta_sag},
      {"sigma_c2c", &DeviceParams::sigma_c2c}, {"x_init", &DeviceParams::x_init},
  };
  return table;
}

}  // namespace

const std::vector<std::string_view>& param_names() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> out;
    for (const auto& f : fields()) out.push_back(f.first);
    return out;
  }();
  return names;
}

double& param_ref(DeviceParams& params, std::string_view name) {
  for (const auto& [n, member] : fields()) {
    if (n == name) return params.*member;
  }
  throw InvalidInput("unknown device parameter '" + std::string(name) + "'");
}

double param_value(const DeviceParams& params, std::string_view name) {
  DeviceParams copy = params;
  return param_ref(copy, name);
}

DeviceState fresh_state(const DeviceParams& params) {
  DeviceState s;
  s.x = params.x_init;
  return s;
}

double hrs_current(double v, const DeviceParams& prm) {
  if (!std::isfinite(v)) throw InvalidInput("hrs_current: non-finite voltage");
  const double mag = std::fabs(v);
  double i;
  if (mag <= prm.v1) {
    i = prm.a1 * std::pow(mag, prm.n1);
  } else if (mag <= prm.v2) {
    i = prm.a2() * std::pow(mag, prm.n2);
  } else {
    i = prm.a3() * mag * mag;
  }
  return v < 0.0 ? -i : i;
}

double effective_g_on(const DeviceState& state, const DeviceParams& prm) {
  return prm.g_on * std::max(0.0, 1.0 - prm.beta_sag * state.damage);
}

double device_current(double v, const DeviceState& state, const DeviceParams& prm) {
  const double x = state.x;
  return (1.0 - x) * hrs_current(v, prm) + x * effective_g_on(state, prm) * v;
}

double state_rate(double v, const DeviceState& state, const DeviceParams& prm) {
  if (state.failed) return 0.0;
  const double x = state.x;
  if (v > prm.v_dz) return set_drive(v, prm) * std::pow(1.0 - x, prm.p);
  if (v < -prm.v_dz) return -reset_drive(v, prm) * std::pow(x, prm.p);
  if (std::isinf(prm.tau_ret)) return 0.0;
  return -(x - prm.x_init) / prm.tau_ret;
}

double evolve_x(double v, double x, double dt, const DeviceState& state,
                const DeviceParams& prm) {
  if (state.failed) return 1.0;
  if (dt <= 0.0) return x;
  double out;
  if (v > prm.v_dz) {
    out = 1.0 - window_decay(1.0 - x, set_drive(v, prm) * dt, prm.p);
  } else if (v < -prm.v_dz) {
    out = window_decay(x, reset_drive(v, prm) * dt, prm.p);
  } else if (std::isinf(prm.tau_ret)) {
    out = x;
  } else {
    out = prm.x_init + (x - prm.x_init) * std::exp(-dt / prm.tau_ret);
  }
  return std::clamp(out, 0.0, 1.0);
}

DeviceState accrue(DeviceState state, double v, double i, double dt, const DeviceParams& prm) {
  if (!(dt >= 0.0)) throw InvalidInput("accrue: dt must be >= 0");
  if (std::fabs(i) >= prm.i_damage) {
    state.damage += std::fabs(v * i) * dt;
  }
  if (!state.failed && state.damage >= prm.d_fail) state.failed = true;
  if (state.failed) state.x = 1.0;
  return state;
}

double read_conductance(const DeviceState& state, const DeviceParams& prm, double v_read) {
  if (v_read == 0.0 || !std::isfinite(v_read)) {
    throw InvalidInput("read_conductance: v_read must be finite and nonzero");
  }
  return device_current(v_read, state, prm) / v_read;
}

double limited_voltage(double v_applied, double i_cc, const DeviceState& state,
                       const DeviceParams& prm) {
  if (!(i_cc > 0.0) || std::isinf(i_cc)) return v_applied;
  const double i_u = std::fabs(device_current(v_applied, state, prm));
  if (i_u <= i_cc) return v_applied;
  return v_applied * (i_cc / i_u);
}

}  // namespace memsyn
