#include <iostream>

#include "memsyn/acceptance.hpp"

int main() {
  const auto results = memsyn::run_acceptance(memsyn::DeviceParams::calibrated(), &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
