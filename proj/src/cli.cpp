#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <type_traits>

#include "CLI11.hpp"
#include "json.hpp"
#include "memsyn/acceptance.hpp"
#include "memsyn/analysis.hpp"
#include "memsyn/cli_io.hpp"
#include "memsyn/errors.hpp"

namespace memsyn {

namespace {

using Json = nlohmann::ordered_json;

// A result flattened to a numeric table (CSV) plus a JSON view.
struct Output {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  Json json = Json::object();
  std::optional<Trace> trace;  // written instead of the table in CSV mode
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Output table(std::vector<std::string> columns, const std::vector<std::vector<double>>& cols) {
  Output o;
  o.columns = std::move(columns);
  const std::size_t n = cols.empty() ? 0 : cols.front().size();
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row;
    for (const auto& c : cols) row.push_back(c.at(r));
    o.rows.push_back(std::move(row));
  }
  for (std::size_t c = 0; c < o.columns.size(); ++c) o.json[o.columns[c]] = cols[c];
  return o;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> iota_d(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(k);
  return v;
}

Output run_one(const IvCyclesSpec& spec, const RunConfig& cfg) {
  IvCyclesSpec s = spec;
  s.keep_traces = true;
  const IvCycleResult r = run_iv_cycles(s, cfg.sim, cfg.device);
  Trace all;
  for (const auto& t : r.traces) all.append(t);
  all.params_hash = r.meta.params_hash;
  all.seed = r.meta.seed;
  Output o = table({"cycle", "r_on", "r_off", "ratio"},
                   {iota_d(r.ratio.size()), r.r_on, r.r_off, r.ratio});
  Json ps = Json::array(), pr = Json::array();
  for (const auto& p : r.p_set) ps.push_back(opt(p));
  for (const auto& p : r.p_reset) pr.push_back(opt(p));
  o.json["p_set"] = ps;
  o.json["p_reset"] = pr;
  o.json["hysteresis_area"] = r.traces.empty() ? 0.0 : hysteresis_area(r.traces.front().samples);
  o.trace = std::move(all);
  return o;
}

Output run_one(const EnduranceSpec& spec, const RunConfig& cfg) {
  const EnduranceResult r = run_endurance_pulsed(spec, cfg.sim, cfg.device);
  Output o = table({"cycle", "r_on", "r_off", "window"},
                   {iota_d(r.window.size()), r.r_on, r.r_off, r.window});
  o.json["failure_cycle"] =
      r.failure_cycle ? Json(static_cast<std::uint64_t>(*r.failure_cycle)) : Json(nullptr);
  o.json["median_window_before_failure"] = r.median_window_before_failure();
  return o;
}

Output run_one(const RetentionSpec& spec, const RunConfig& cfg) {
  const RetentionResult r = run_retention(spec, cfg.sim, cfg.device);
  Output o = table({"t", "r_lrs", "r_hrs", "x_lrs", "x_hrs"}, {r.t, r.r_lrs, r.r_hrs, r.x_lrs, r.x_hrs});
  o.json["drift_lrs"] = r.drift_lrs();
  o.json["drift_hrs"] = r.drift_hrs();
  return o;
}

Output run_one(const MultilevelSpec& spec, const RunConfig& cfg) {
  const MultilevelResult r = run_multilevel(spec, cfg.sim, cfg.device);
  std::vector<double> icc, rl;
  for (const auto& [i, rr] : r.levels) {
    icc.push_back(i);
    rl.push_back(rr);
  }
  return table({"i_cc", "r_lrs"}, {icc, rl});
}

Output run_one(const LtpLtdSpec& spec, const RunConfig& cfg) {
  const LtpLtdResult r = run_ltp_ltd(spec, cfg.sim, cfg.device);
  Output o = table({"pulse", "g_ltp", "w_ltp", "g_ltd", "w_ltd"},
                   {iota_d(r.ltp.g.size()), r.ltp.g, r.ltp.w, r.ltd.g, r.ltd.w});
  o.json["nonlinearity_ltp"] = nonlinearity(r.ltp);
  o.json["nonlinearity_ltd"] = nonlinearity(r.ltd);
  return o;
}

Output run_one(const AmplitudeSeriesSpec& spec, const RunConfig& cfg) {
  const AmplitudeSeriesResult r = run_amplitude_series(spec, cfg.sim, cfg.device);
  std::vector<std::string> names{"pulse"};
  std::vector<std::vector<double>> cols{iota_d(r.potentiation.front().g.size())};
  for (std::size_t k = 0; k < r.amps.size(); ++k) {
    names.push_back("g_pot_" + short_num(r.amps[k]));
    cols.push_back(r.potentiation[k].g);
  }
  for (std::size_t k = 0; k < r.amps.size(); ++k) {
    names.push_back("g_dep_" + short_num(r.amps[k]));
    cols.push_back(r.depression[k].g);
  }
  return table(names, cols);
}

Output run_one(const ResetStaircaseSpec& spec, const RunConfig& cfg) {
  const ResetStaircaseResult r = run_reset_staircase(spec, cfg.sim, cfg.device);
  return table({"v_reset", "r_hrs", "r_lrs"}, {r.v_reset, r.r_hrs, r.r_lrs});
}

Output run_one(const SetStaircaseSpec& spec, const RunConfig& cfg) {
  const SetStaircaseResult r = run_set_staircase(spec, cfg.sim, cfg.device);
  return table({"v_set", "g_lrs"}, {r.v_set, r.g_lrs});
}

Output run_one(const StdpSpec& spec, const RunConfig& cfg) {
  const StdpResult r = run_stdp(spec, cfg.sim, cfg.device);
  std::vector<double> dt, dg, gb, ga;
  for (const auto& p : r.points) {
    dt.push_back(p.delta_t);
    dg.push_back(p.delta_g);
    gb.push_back(p.g_before);
    ga.push_back(p.g_after);
  }
  return table({"delta_t", "delta_g", "g_before", "g_after"}, {dt, dg, gb, ga});
}

Output run_one(const FitSpec& spec, const RunConfig& cfg) {
  FitConfig fc = spec.config;
  fc.base = cfg.device;
  fc.seed = cfg.sim.seed;
  const FitResult r = fit(spec.targets, fc);
  // CSV: one row, one column per fitted parameter, then the loss
  Output o;
  Json fitted = Json::object();
  std::vector<double> row;
  for (std::size_t k = 0; k < fc.dims.size(); ++k) {
    o.columns.push_back(fc.dims[k].name);
    row.push_back(r.x[k]);
    fitted[fc.dims[k].name] = r.x[k];
  }
  o.columns.push_back("loss");
  row.push_back(r.loss);
  o.rows.push_back(std::move(row));
  o.json["fitted"] = fitted;
  o.json["loss"] = r.loss;
  o.json["restart_losses"] = r.restart_losses;
  o.json["evaluations"] = r.log.evaluations;
  o.json["failures"] = r.log.failures;
  return o;
}

// The resolved config minus the output path, so the file content depends only
// on what determines the results.
Json embedded(const RunConfig& cfg) {
  RunConfig copy = cfg;
  copy.output.reset();
  return Json::parse(serialize_config(copy));
}

void emit(const Output& o, const RunConfig& cfg, std::ostream& out) {
  const std::uint64_t hash = params_hash(cfg.device);
  if (cfg.format == OutputFormat::kJson) {
    Json j = Json::object();
    j["seed"] = cfg.sim.seed;
    char h[32];
    std::snprintf(h, sizeof h, "%016" PRIx64, hash);
    j["params_hash"] = h;
    j["config"] = embedded(cfg);
    j["result"] = o.json;
    out << j.dump(2) << '\n';
    return;
  }
  const std::vector<std::string> meta{"experiment: " + experiment_type(cfg.experiment),
                                      "config: " + embedded(cfg).dump()};
  if (o.trace) {
    write_trace_csv(*o.trace, out, meta);
    return;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "# seed: %" PRIu64 "\n# params_hash: %016" PRIx64 "\n",
                cfg.sim.seed, hash);
  out << buf;
  for (const auto& m : meta) out << "# " << m << '\n';
  for (std::size_t c = 0; c < o.columns.size(); ++c) out << (c ? "," : "") << o.columns[c];
  out << '\n';
  for (const auto& row : o.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << num(row[c]);
    out << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Experiment tags each subcommand accepts; the first is its default.
std::vector<std::string> tags_for(const std::string& cmd) {
  if (cmd == "sweep") return {"iv_cycles"};
  if (cmd == "plasticity") return {"ltp_ltd", "amplitude_series"};
  if (cmd == "staircase") return {"set_staircase", "reset_staircase"};
  if (cmd == "endurance" || cmd == "retention" || cmd == "multilevel" || cmd == "stdp" ||
      cmd == "fit") {
    return {cmd};
  }
  return {};
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format;
  std::optional<std::size_t> cycles;
  bool amplitudes = false;
  bool reset = false;
};

int execute(const std::string& cmd, const Common& opt, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  bool seed_in_config = false;
  const auto tags = tags_for(cmd);
  if (!opt.config.empty()) {
    const std::string text = read_file(opt.config);
    cfg = load_config(text);
    const std::string type = experiment_type(cfg.experiment);
    if (std::find(tags.begin(), tags.end(), type) == tags.end()) {
      throw ConfigError("experiment '" + type + "' does not match subcommand '" + cmd + "'");
    }
    seed_in_config = Json::parse(text).value("sim", Json::object()).contains("seed");
  } else {
    std::string type = tags.front();
    if (cmd == "plasticity" && opt.amplitudes) type = "amplitude_series";
    if (cmd == "staircase" && opt.reset) type = "reset_staircase";
    cfg.experiment = make_experiment(type);
    cfg.sim = default_sim(cfg.experiment);
  }

  // seed priority: --seed, config, MEMSYN_SEED, 0
  if (opt.seed) {
    cfg.sim.seed = *opt.seed;
  } else if (!seed_in_config) {
    cfg.sim.seed = 0;
    if (const char* env = std::getenv("MEMSYN_SEED")) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0') throw ConfigError("MEMSYN_SEED must be an unsigned integer");
      cfg.sim.seed = v;
    }
  }
  if (!opt.format.empty()) cfg.format = opt.format == "json" ? OutputFormat::kJson : OutputFormat::kCsv;
  if (!opt.out.empty()) cfg.output = opt.out;
  if (opt.cycles) {
    std::visit(
        [&](auto& s) {
          if constexpr (requires { s.n; }) s.n = *opt.cycles;
        },
        cfg.experiment);
  }

  const Output result = std::visit([&](const auto& s) { return run_one(s, cfg); }, cfg.experiment);
  if (cfg.output) {
    std::ofstream file(*cfg.output, std::ios::binary);
    if (!file) throw SimulationError("cannot write '" + *cfg.output + "'");
    emit(result, cfg, file);
    file.flush();
    if (!file) throw SimulationError("write failed for '" + *cfg.output + "'");
  } else {
    emit(result, cfg, out);
  }
  (void)err;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graphene-oxide memristive synapse simulator", "memsyn"};
  app.require_subcommand(1);
  Common opt;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"sweep", "DC I-V cycling (CSV: full trace)"},
      {"endurance", "pulsed SET/RESET endurance"},
      {"retention", "zero-bias retention of LRS and HRS"},
      {"multilevel", "LRS resistance versus compliance"},
      {"plasticity", "LTP/LTD pulse trains (--amplitudes: amplitude series)"},
      {"stdp", "spike-timing-dependent plasticity"},
      {"staircase", "SET-voltage staircase (--reset: RESET-voltage staircase)"},
      {"fit", "calibrate device parameters against target features"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output file (default: stdout)");
    sub->add_option("--seed", opt.seed, "RNG seed (overrides config and MEMSYN_SEED)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (name == "sweep" || name == "endurance" || name == "plasticity") {
      sub->add_option("--cycles", opt.cycles, "override the cycle or pulse count");
    }
    if (name == "plasticity") sub->add_flag("--amplitudes", opt.amplitudes, "run the amplitude series");
    if (name == "staircase") sub->add_flag("--reset", opt.reset, "run the RESET-voltage staircase");
  }
  app.add_subcommand("selftest", "run the acceptance suite on the calibrated parameters");

  if (argc <= 1) {
    err << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << e.what() << '\n' << app.help();
    return 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "selftest") {
      const auto results = run_acceptance(DeviceParams::calibrated(), &out);
      std::size_t passed = 0;
      for (const auto& r : results) passed += r.pass ? 1 : 0;
      out << passed << "/" << results.size() << " criteria passed\n";
      return passed == results.size() ? 0 : 3;
    }
    return execute(cmd, opt, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace memsyn
