#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "memsyn/cli_io.hpp"
#include "memsyn/errors.hpp"

namespace memsyn {

void write_trace_csv(const Trace& trace, std::ostream& out,
                     const std::vector<std::string>& extra_meta) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# seed: %" PRIu64 "\n# params_hash: %016" PRIx64 "\n", trace.seed,
                trace.params_hash);
  out << buf;
  for (const auto& line : extra_meta) out << "# " << line << '\n';
  out << kTraceHeader << '\n';
  for (const auto& s : trace.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.v_applied,
                  s.v_device, s.i, s.x, s.damage);
    out << buf;
  }
  if (!out) throw SimulationError("write_trace_csv: write failed");
}

std::vector<TraceSample> read_trace_csv(std::istream& in) {
  std::vector<TraceSample> out;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kTraceHeader) throw InvalidInput("read_trace_csv: unexpected header");
      header = true;
      continue;
    }
    double v[6];
    const char* p = line.c_str();
    for (int k = 0; k < 6; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(p, &end);
      const char want = k < 5 ? ',' : '\0';
      if (end == p || *end != want) {
        throw InvalidInput("read_trace_csv: malformed row at line " + std::to_string(lineno));
      }
      p = end + (k < 5 ? 1 : 0);
    }
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  if (!header) throw InvalidInput("read_trace_csv: missing header");
  return out;
}

}  // namespace memsyn
