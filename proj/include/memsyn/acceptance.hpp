#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "memsyn/device_model.hpp"

namespace memsyn {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values
};

/// Runs the twelve acceptance checks against `params`.  When `out` is given,
/// each line is printed as soon as its check finishes.
std::vector<CriterionResult> run_acceptance(const DeviceParams& params = DeviceParams::calibrated(),
                                            std::ostream* out = nullptr);

/// "[PASS] 3 dc-endurance: ..." style line.
std::string format_result(const CriterionResult& r);

}  // namespace memsyn
