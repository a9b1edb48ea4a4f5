#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memsyn/calibration.hpp"
#include "memsyn/device_model.hpp"
#include "memsyn/protocols.hpp"
#include "memsyn/simulator.hpp"

namespace memsyn {

/// Calibration run: targets plus optimizer settings.
struct FitSpec {
  TargetFeatures targets;
  FitConfig config;
};

using Experiment = std::variant<IvCyclesSpec, EnduranceSpec, RetentionSpec, MultilevelSpec,
                                LtpLtdSpec, AmplitudeSeriesSpec, ResetStaircaseSpec,
                                SetStaircaseSpec, StdpSpec, FitSpec>;

enum class OutputFormat { kCsv, kJson };

struct RunConfig {
  DeviceParams device;
  SimConfig sim;
  Experiment experiment;
  std::optional<std::string> output;
  OutputFormat format = OutputFormat::kCsv;
};

/// Config tag of an experiment ("iv_cycles", "endurance", ...).
std::string experiment_type(const Experiment& e);

/// Default experiment for a tag; throws ConfigError for unknown tags.
Experiment make_experiment(std::string_view type);

/// Solver settings an experiment runs with unless the config overrides them.
SimConfig default_sim(const Experiment& e);

/// Parses a JSON config.  Absent fields keep their defaults; unknown keys,
/// malformed text (reported with line and column) and violated bounds throw
/// ConfigError.  Numbers may be given as the strings "inf" or "-inf".
RunConfig load_config(std::string_view text);

/// Fully resolved config as pretty-printed JSON.
std::string serialize_config(const RunConfig& cfg);

inline constexpr std::string_view kTraceHeader = "t_s,v_applied_V,v_device_V,i_A,x,damage_J";

/// Writes `# key: value` metadata lines, the header and one row per sample
/// (%.17g).  Each entry of `extra_meta` becomes one more comment line.
void write_trace_csv(const Trace& trace, std::ostream& out,
                     const std::vector<std::string>& extra_meta = {});

/// Parses the data rows of a trace CSV; comment lines are skipped.
std::vector<TraceSample> read_trace_csv(std::istream& in);

/// Command-line entry point.  Exit codes: 0 success, 1 usage error,
/// 2 config error, 3 simulation or fit failure.
int run_cli(int argc, const char* const* argv);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace memsyn
