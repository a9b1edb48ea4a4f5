#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace memsyn {

/// Physical coefficients of the compact model.
///
/// The high-resistance branch is a three-regime space-charge-limited law
/// (Ohmic, trap-filled, square law); the low-resistance branch is Ohmic.
/// A filament fraction x in [0, 1] mixes the two.  Default member values
/// are the committed calibrated set (see `calibrated()`).
struct DeviceParams {
  // HRS conduction
  double a1 = 1.76e-4;  // A / V^n1
  double n1 = 1.1;
  double n2 = 2.2;
  double v1 = 0.4;  // V, Ohmic -> trap-filled
  double v2 = 1.5;  // V, trap-filled -> square law

  // LRS conduction
  double g_on = 5.0e-3;  // S

  // state dynamics
  double k_s = 135.0;  // 1/s
  double k_r = 0.4;    // 1/s
  double v0s = 0.2;    // V
  double v0r = 0.06;   // V
  double v_dz = 0.3;   // V
  double p = 1.0;

  // retention, damage, failure
  double tau_ret = 1.0e7;     // s
  double i_damage = 6.3e-3;   // A
  double d_fail = 2.8e-4;     // J
  double beta_sag = 400.0;    // 1/J

  double sigma_c2c = 0.05;
  double x_init = 0.0;

  /// Trap-filled prefactor, continuous with the Ohmic branch at v1.
  [[nodiscard]] double a2() const;
  /// Square-law prefactor, continuous with the trap-filled branch at v2.
  [[nodiscard]] double a3() const;

  /// Throws InvalidInput naming the first violated bound.
  void validate() const;

  /// The committed calibrated parameter set.
  static DeviceParams calibrated();

  bool operator==(const DeviceParams&) const = default;
};

struct DeviceState {
  double x = 0.0;
  double damage = 0.0;  // J
  bool failed = false;
  std::uint64_t cycle_count = 0;

  bool operator==(const DeviceState&) const = default;
};

/// Fresh device at the parameter set's initial filament fraction.
DeviceState fresh_state(const DeviceParams& params);

/// Current through the pure HRS (x = 0) conduction law.  Odd in v.
double hrs_current(double v, const DeviceParams& params);

/// LRS conductance after damage-induced attenuation.
double effective_g_on(const DeviceState& state, const DeviceParams& params);

/// I = (1 - x) * hrs_current(v) + x * g_on_eff * v.
double device_current(double v, const DeviceState& state, const DeviceParams& params);

/// dx/dt at device voltage v.  Zero for failed devices.
double state_rate(double v, const DeviceState& state, const DeviceParams& params);

/// Exact evolution of x over `dt` seconds with the device voltage frozen at v.
///
/// Each branch of the state equation is separable for constant v, so the
/// update is closed-form and never leaves [0, 1].
double evolve_x(double v, double x, double dt, const DeviceState& state,
                const DeviceParams& params);

/// Adds Joule energy |v i| dt when |i| >= i_damage and latches failure.
DeviceState accrue(DeviceState state, double v, double i, double dt, const DeviceParams& params);

/// Small-signal read: device_current(v_read) / v_read.
double read_conductance(const DeviceState& state, const DeviceParams& params, double v_read);

/// Device voltage seen behind an ideal series current limiter.
///
/// Returns v_applied when |device_current(v_applied)| <= i_cc, otherwise
/// v_applied scaled down by i_cc / |i_u|.
double limited_voltage(double v_applied, double i_cc, const DeviceState& state,
                       const DeviceParams& params);

/// Field names of DeviceParams, in declaration order.
const std::vector<std::string_view>& param_names();

/// Named access to a DeviceParams field; throws InvalidInput for unknown names.
double& param_ref(DeviceParams& params, std::string_view name);
double param_value(const DeviceParams& params, std::string_view name);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace memsyn
