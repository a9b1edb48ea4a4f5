#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memsyn/device_model.hpp"

namespace memsyn {

struct Target {
  double value = 0.0;
  double weight = 1.0;
};

/// Weighted features a parameter set is scored against.
struct TargetFeatures {
  Target hrs_slope_low{1.1, 1.0};
  Target slope_boundary_v{0.4, 1.0};  // V
  Target on_off_dc{22.0, 1.0};
  Target on_off_pulsed{34.0, 1.0};
  Target failure_cycle{450.0, 1.0};
  // Minimum total relative rise of an LTP train; only a shortfall is penalized.
  Target ltp_min_rise{0.5, 1.0};
  double ltp_amp = 1.2;     // V
  double ltp_width = 1e-3;  // s
  // |dG| halving scale in delta_t (s).  No quoted value, so off by default.
  Target stdp_decay{20e-6, 0.0};
  double power_order_weight = 1.0;  // penalty when p_reset <= p_set

  void validate() const;
};

/// One fitted parameter and its box.
struct FitDimension {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

struct FitConfig {
  std::size_t restarts = 4;
  std::size_t max_evals = 200;  // per restart
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  std::vector<FitDimension> dims{{"a1", 5e-5, 5e-4},  {"n2", 2.05, 3.0},
                                 {"k_r", 0.1, 2.0},   {"d_fail", 1e-4, 1e-3},
                                 {"v0r", 0.03, 0.12}, {"k_s", 30.0, 500.0}};
  std::uint64_t seed = 0;
  DeviceParams base;  // values of the dimensions not fitted

  // Protocol sizes used by the objective.
  std::size_t dc_cycles = 5;
  std::size_t endurance_cycles = 600;

  void validate() const;
};

/// Features measured on a parameter set; absent when not needed or not measurable.
struct MeasuredFeatures {
  std::optional<double> hrs_slope_low, slope_boundary_v;
  std::optional<double> on_off_dc, on_off_pulsed, failure_cycle;
  std::optional<double> ltp_rise, stdp_decay;
  std::optional<double> p_set, p_reset;
};

/// HRS branch sampled on a log grid: (V, I) pairs for positive bias.
std::vector<std::pair<double, double>> hrs_branch(const DeviceParams& params, double v_lo = 0.02,
                                                  double v_hi = 3.0, std::size_t n = 121);

/// Runs the protocols needed by the targets with non-zero weight.
MeasuredFeatures measure_features(const DeviceParams& params, const TargetFeatures& targets,
                                  const FitConfig& cfg);

/// Loss from already measured features.  Missing features cost kFailurePenalty.
double loss_from(const MeasuredFeatures& features, const TargetFeatures& targets);

inline constexpr double kFailurePenalty = 1e6;

struct ObjectiveLog {
  std::size_t evaluations = 0;
  std::size_t failures = 0;
  std::vector<std::string> messages;
};

/// Weighted relative squared error of simulated features against the targets.
/// Simulation failures give kFailurePenalty and are recorded in `log`.
double objective(const DeviceParams& params, const TargetFeatures& targets, const FitConfig& cfg,
                 ObjectiveLog* log = nullptr);

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  double f0 = 0.0;  // f(x0)
  std::size_t evals = 0;
};

/// Nelder-Mead simplex with the coefficients and max_evals of `cfg`.
///
/// When cfg.dims has one entry per coordinate, each coordinate is confined
/// to its box through a logistic map from an unbounded internal coordinate;
/// with empty dims the search is unbounded.  Stops at max_evals or when the
/// internal simplex diameter falls below 1e-9.
SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, const FitConfig& cfg);

struct FitResult {
  DeviceParams params;
  double loss = 0.0;
  std::vector<double> x;                // fitted values, in cfg.dims order
  std::vector<double> restart_losses;   // best loss of each restart
  std::vector<double> initial_losses;   // loss at each restart's initial point
  ObjectiveLog log;
};

/// Best of cfg.restarts simplex runs from seeded in-box initial points.
/// Throws FitFailure if every restart is non-finite.
FitResult fit(const TargetFeatures& targets, const FitConfig& cfg);

}  // namespace memsyn
