#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <type_traits>

#include "json.hpp"
#include "memsyn/cli_io.hpp"
#include "memsyn/errors.hpp"

namespace memsyn {

namespace {

using Json = nlohmann::ordered_json;

// ------------------------------------------------------------ field tables
// Each struct lists its config keys once; the reader and writer share them.

template <class V> void fields(ReadSpec& s, V&& v) {
  v("v_read", s.v_read);
  v("w_read", s.w_read);
}

template <class V> void fields(SpikeShape& s, V&& v) {
  v("v_a", s.v_a);
  v("w_s", s.w_s);
  v("tail_ratio", s.tail_ratio);
  v("tail_width", s.tail_width);
}

template <class V> void fields(PreconditionSpec& s, V&& v) {
  v("tolerance", s.tolerance);
  v("max_pulses", s.max_pulses);
  v("amp", s.amp);
  v("reset_amp", s.reset_amp);
  v("width", s.width);
  v("gap", s.gap);
  v("read", s.read);
}

template <class V> void fields(IvCyclesSpec& s, V&& v) {
  v("n", s.n);
  v("v_pos", s.v_pos);
  v("v_neg", s.v_neg);
  v("rate", s.rate);
  v("i_cc", s.i_cc);
  v("read", s.read);
  v("gap", s.gap);
}

template <class V> void fields(EnduranceSpec& s, V&& v) {
  v("v_set", s.v_set);
  v("v_reset", s.v_reset);
  v("width", s.width);
  v("n", s.n);
  v("gap", s.gap);
  v("read", s.read);
}

template <class V> void fields(RetentionSpec& s, V&& v) {
  v("t_total", s.t_total);
  v("read_period", s.read_period);
  v("x_lrs", s.x_lrs);
  v("x_hrs", s.x_hrs);
  v("read", s.read);
}

template <class V> void fields(MultilevelSpec& s, V&& v) {
  v("i_cc_list", s.i_cc_list);
  v("v_set", s.v_set);
  v("rate", s.rate);
  v("read", s.read);
}

template <class V> void fields(LtpLtdSpec& s, V&& v) {
  v("amp", s.amp);
  v("width", s.width);
  v("n", s.n);
  v("gap", s.gap);
  v("read", s.read);
}

template <class V> void fields(AmplitudeSeriesSpec& s, V&& v) {
  v("amps", s.amps);
  v("width", s.width);
  v("n", s.n);
  v("gap", s.gap);
  v("read", s.read);
}

template <class V> void fields(ResetStaircaseSpec& s, V&& v) {
  v("v_list", s.v_list);
  v("i_cc", s.i_cc);
  v("set_v", s.set_v);
  v("set_rate", s.set_rate);
  v("reset_rate", s.reset_rate);
  v("read", s.read);
}

template <class V> void fields(SetStaircaseSpec& s, V&& v) {
  v("v_list", s.v_list);
  v("i_cc", s.i_cc);
  v("reset_v", s.reset_v);
  v("reset_rate", s.reset_rate);
  v("set_rate", s.set_rate);
  v("read", s.read);
}

template <class V> void fields(StdpSpec& s, V&& v) {
  v("delta_ts", s.delta_ts);
  v("spike", s.spike);
  v("g_before_pos", s.g_before_pos);
  v("g_before_neg", s.g_before_neg);
  v("precondition", s.precondition);
  v("gap", s.gap);
}

template <class V> void fields(Target& s, V&& v) {
  v("value", s.value);
  v("weight", s.weight);
}

template <class V> void fields(TargetFeatures& s, V&& v) {
  v("hrs_slope_low", s.hrs_slope_low);
  v("slope_boundary_v", s.slope_boundary_v);
  v("on_off_dc", s.on_off_dc);
  v("on_off_pulsed", s.on_off_pulsed);
  v("failure_cycle", s.failure_cycle);
  v("ltp_min_rise", s.ltp_min_rise);
  v("ltp_amp", s.ltp_amp);
  v("ltp_width", s.ltp_width);
  v("stdp_decay", s.stdp_decay);
  v("power_order_weight", s.power_order_weight);
}

template <class V> void fields(FitDimension& s, V&& v) {
  v("name", s.name);
  v("lo", s.lo);
  v("hi", s.hi);
}

// base and seed come from the run's device section and resolved seed
template <class V> void fields(FitConfig& s, V&& v) {
  v("restarts", s.restarts);
  v("max_evals", s.max_evals);
  v("reflection", s.reflection);
  v("expansion", s.expansion);
  v("contraction", s.contraction);
  v("shrink", s.shrink);
  v("dims", s.dims);
  v("dc_cycles", s.dc_cycles);
  v("endurance_cycles", s.endurance_cycles);
}

template <class V> void fields(FitSpec& s, V&& v) {
  v("targets", s.targets);
  v("config", s.config);
}

template <class V> void fields(SimConfig& s, V&& v) {
  v("dt_max", s.dt_max);
  v("dx_max", s.dx_max);
  v("i_cc", s.i_cc);
  v("seed", s.seed);
  v("decimation", s.decimation);
}

template <class T>
concept HasFields = requires(T& t) { fields(t, [](const char*, auto&) {}); };

// ------------------------------------------------------------------ reading

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void read_value(const Json& j, double& out, const std::string& path);
void read_value(const Json& j, std::string& out, const std::string& path);
template <class T>
  requires std::is_unsigned_v<T>
void read_value(const Json& j, T& out, const std::string& path);
template <class T> void read_value(const Json& j, std::optional<T>& out, const std::string& path);
template <class T> void read_value(const Json& j, std::vector<T>& out, const std::string& path);
template <HasFields T> void read_value(const Json& j, T& out, const std::string& path);

void read_value(const Json& j, double& out, const std::string& path) {
  if (j.is_number()) {
    out = j.get<double>();
  } else if (j.is_string() && (j == "inf" || j == "+inf")) {
    out = std::numeric_limits<double>::infinity();
  } else if (j.is_string() && j == "-inf") {
    out = -std::numeric_limits<double>::infinity();
  } else {
    fail(path, "expected a number");
  }
}

void read_value(const Json& j, std::string& out, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  out = j.get<std::string>();
}

template <class T>
  requires std::is_unsigned_v<T>
void read_value(const Json& j, T& out, const std::string& path) {
  if (j.is_number_unsigned()) {
    out = j.get<T>();
  } else if (j.is_number_integer()) {
    fail(path, "must be >= 0");
  } else {
    fail(path, "expected a non-negative integer");
  }
}

template <class T> void read_value(const Json& j, std::optional<T>& out, const std::string& path) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  T v{};
  read_value(j, v, path);
  out = v;
}

template <class T> void read_value(const Json& j, std::vector<T>& out, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  out.clear();
  for (std::size_t k = 0; k < j.size(); ++k) {
    T v{};
    read_value(j[k], v, path + "[" + std::to_string(k) + "]");
    out.push_back(std::move(v));
  }
}

template <HasFields T> void read_value(const Json& j, T& out, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> known;
  fields(out, [&](const char* key, auto& field) {
    known.insert(key);
    if (j.contains(key)) read_value(j.at(key), field, path + "." + key);
  });
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) fail(path + "." + key, "unknown key");
  }
}

void read_device(const Json& j, DeviceParams& out) {
  if (!j.is_object()) fail("device", "expected an object");
  for (const auto& [key, value] : j.items()) {
    double* field = nullptr;
    try {
      field = &param_ref(out, key);
    } catch (const InvalidInput&) {
      fail("device." + key, "unknown key");
    }
    read_value(value, *field, "device." + key);
  }
}

// ------------------------------------------------------------------ writing

Json write_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
Json write_value(const std::string& v) { return v; }
template <class T>
  requires std::is_unsigned_v<T>
Json write_value(T v) {
  return v;
}
template <class T> Json write_value(const std::optional<T>& v) {
  return v ? write_value(*v) : Json(nullptr);
}
template <HasFields T> Json write_value(const T& v);
template <class T> Json write_value(const std::vector<T>& v) {
  Json arr = Json::array();
  for (const auto& e : v) arr.push_back(write_value(e));
  return arr;
}
template <HasFields T> Json write_value(const T& v) {
  T copy = v;
  Json obj = Json::object();
  fields(copy, [&](const char* key, auto& field) { obj[key] = write_value(field); });
  return obj;
}

// ------------------------------------------------------------ experiments

template <class T> struct Tag;
template <> struct Tag<IvCyclesSpec> { static constexpr const char* name = "iv_cycles"; };
template <> struct Tag<EnduranceSpec> { static constexpr const char* name = "endurance"; };
template <> struct Tag<RetentionSpec> { static constexpr const char* name = "retention"; };
template <> struct Tag<MultilevelSpec> { static constexpr const char* name = "multilevel"; };
template <> struct Tag<LtpLtdSpec> { static constexpr const char* name = "ltp_ltd"; };
template <> struct Tag<AmplitudeSeriesSpec> { static constexpr const char* name = "amplitude_series"; };
template <> struct Tag<ResetStaircaseSpec> { static constexpr const char* name = "reset_staircase"; };
template <> struct Tag<SetStaircaseSpec> { static constexpr const char* name = "set_staircase"; };
template <> struct Tag<StdpSpec> { static constexpr const char* name = "stdp"; };
template <> struct Tag<FitSpec> { static constexpr const char* name = "fit"; };

template <std::size_t I = 0>
Experiment experiment_by_tag(std::string_view type) {
  if constexpr (I == std::variant_size_v<Experiment>) {
    throw ConfigError("experiment.type: unknown experiment '" + std::string(type) + "'");
  } else {
    using T = std::variant_alternative_t<I, Experiment>;
    if (type == Tag<T>::name) return T{};
    return experiment_by_tag<I + 1>(type);
  }
}

void validate_experiment(const Experiment& e) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        try {
          if constexpr (std::is_same_v<T, StdpSpec>) s.spike.validate();
          if constexpr (std::is_same_v<T, FitSpec>) {
            s.targets.validate();
            s.config.validate();
            for (const auto& d : s.config.dims) param_value(DeviceParams{}, d.name);
          }
        } catch (const InvalidInput& err) {
          throw ConfigError(std::string("experiment: ") + err.what());
        }
      },
      e);
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string experiment_type(const Experiment& e) {
  return std::visit([](const auto& s) { return std::string(Tag<std::decay_t<decltype(s)>>::name); },
                    e);
}

Experiment make_experiment(std::string_view type) { return experiment_by_tag(type); }

SimConfig default_sim(const Experiment& e) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IvCyclesSpec> || std::is_same_v<T, MultilevelSpec> ||
                      std::is_same_v<T, ResetStaircaseSpec> ||
                      std::is_same_v<T, SetStaircaseSpec>) {
          return SimConfig::dc();
        } else if constexpr (std::is_same_v<T, RetentionSpec>) {
          // zero-bias holds; the state update is exact, so long steps are safe
          SimConfig c;
          c.dt_max = 1.0;
          return c;
        } else {
          return SimConfig::pulse();
        }
      },
      e);
}

RunConfig load_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    // keep only the reason; the location is recomputed from the byte offset
    std::string why = e.what();
    if (const auto at = why.find("column"); at != std::string::npos) {
      if (const auto colon = why.find(": ", at); colon != std::string::npos) why = why.substr(colon + 2);
    }
    throw ConfigError("parse error at " + line_column(text, e.byte) + ": " + why);
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "device" && key != "sim" && key != "experiment" && key != "output" &&
        key != "format") {
      fail(key, "unknown key");
    }
  }
  if (!j.contains("experiment")) throw ConfigError("experiment required");

  RunConfig cfg;
  const Json& ej = j.at("experiment");
  if (!ej.is_object()) fail("experiment", "expected an object");
  if (!ej.contains("type") || !ej.at("type").is_string()) {
    fail("experiment.type", "required string naming the experiment");
  }
  cfg.experiment = make_experiment(ej.at("type").get<std::string>());
  Json body = ej;
  body.erase("type");
  std::visit([&](auto& s) { read_value(body, s, "experiment"); }, cfg.experiment);

  if (j.contains("device")) read_device(j.at("device"), cfg.device);
  cfg.sim = default_sim(cfg.experiment);
  if (j.contains("sim")) read_value(j.at("sim"), cfg.sim, "sim");
  if (j.contains("output")) {
    std::string out;
    read_value(j.at("output"), out, "output");
    cfg.output = out;
  }
  if (j.contains("format")) {
    std::string f;
    read_value(j.at("format"), f, "format");
    if (f == "csv") {
      cfg.format = OutputFormat::kCsv;
    } else if (f == "json") {
      cfg.format = OutputFormat::kJson;
    } else {
      fail("format", "must be \"csv\" or \"json\"");
    }
  }

  try {
    cfg.device.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("device: ") + e.what());
  }
  try {
    cfg.sim.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("sim: ") + e.what());
  }
  validate_experiment(cfg.experiment);
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  Json j = Json::object();
  Json dev = Json::object();
  for (auto name : param_names()) dev[std::string(name)] = write_value(param_value(cfg.device, name));
  j["device"] = dev;
  j["sim"] = write_value(cfg.sim);
  Json e = Json::object();
  e["type"] = experiment_type(cfg.experiment);
  std::visit([&](const auto& s) { e.update(write_value(s)); }, cfg.experiment);
  j["experiment"] = e;
  if (cfg.output) j["output"] = *cfg.output;
  j["format"] = cfg.format == OutputFormat::kCsv ? "csv" : "json";
  return j.dump(2);
}

}  // namespace memsyn
