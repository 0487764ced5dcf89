#pragma once
#include <array>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailsim/errors.hpp"
#include "tailsim/sim_engine.hpp"

namespace tailsim {

using Json = nlohmann::ordered_json;

namespace config_detail {

inline ModelVector expand_vector_field(const Json& v, int dim, const char* what) {
  if (v.is_number()) return ModelVector(static_cast<std::size_t>(dim), v.get<double>());
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != dim) {
      throw ConfigError(std::string("config: ") + what + " must have length dim=" +
                        std::to_string(dim));
    }
    return v.get<ModelVector>();
  }
  if (v.is_object() && v.contains("min") && v.contains("max")) {
    // linspace(min, max, dim)
    const double lo = v.at("min").get<double>();
    const double hi = v.at("max").get<double>();
    ModelVector out(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      out[static_cast<std::size_t>(i)] =
          dim == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(dim - 1);
    }
    return out;
  }
  throw ConfigError(std::string("config: ") + what +
                    " must be a number, an array, or {min, max}");
}

inline double parse_schedule_number(const Json& v, const char* what) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInfThreshold;
    throw ConfigError(std::string("config: ") + what + R"( accepts numbers or "inf")");
  }
  return v.get<double>();
}

inline Json schedule_number_to_json(double v) {
  if (std::isinf(v)) return Json("inf");
  return Json(v);
}

template <typename Enum, std::size_t N>
Enum parse_enum(const Json& v, const char* what,
                const std::array<std::pair<const char*, Enum>, N>& table) {
  const std::string s = v.get<std::string>();
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  std::string options;
  for (const auto& [name, value] : table) {
    if (!options.empty()) options += ", ";
    options += name;
  }
  throw ConfigError(std::string("config: unknown ") + what + " \"" + s + "\" (expected one of: " +
                    options + ")");
}

template <typename Enum, std::size_t N>
const char* enum_name(Enum v, const std::array<std::pair<const char*, Enum>, N>& table) {
  for (const auto& [name, value] : table) {
    if (v == value) return name;
  }
  return "?";
}

inline const auto& mode_table() {
  static const std::array<std::pair<const char*, Mode>, 3> table{{
      {"synchronous", Mode::Synchronous},
      {"server_centric", Mode::ServerCentric},
      {"client_centric", Mode::ClientCentric}}};
  return table;
}

inline const auto& policy_table() {
  static const std::array<std::pair<const char*, PolicyKind>, 5> table{{
      {"sgdclip", PolicyKind::SgdClip},
      {"clip2", PolicyKind::Clip2},
      {"sgdclip_sd", PolicyKind::SgdClipSD},
      {"clip2_sd", PolicyKind::Clip2SD},
      {"clip2_dc", PolicyKind::Clip2DC}}};
  return table;
}

inline const auto& noise_table() {
  static const std::array<std::pair<const char*, NoiseKind>, 4> table{{
      {"pareto_symmetric", NoiseKind::ParetoSymmetric},
      {"student_t", NoiseKind::StudentT},
      {"gaussian", NoiseKind::Gaussian},
      {"zero", NoiseKind::Zero}}};
  return table;
}

inline const auto& runtime_class_table() {
  static const std::array<std::pair<const char*, RuntimeClass>, 5> table{{
      {"small", RuntimeClass::Small},
      {"medium", RuntimeClass::Medium},
      {"large_mild", RuntimeClass::LargeMild},
      {"large_severe", RuntimeClass::LargeSevere},
      {"custom", RuntimeClass::Custom}}};
  return table;
}

inline const auto& preset_table() {
  static const std::array<std::pair<const char*, PresetName>, 7> table{{
      {"sgdclip_vanilla", PresetName::SGDClipVanilla},
      {"clip2_vanilla", PresetName::Clip2Vanilla},
      {"clip2_vanilla_alt", PresetName::Clip2VanillaAlt},
      {"sd_sgdclip", PresetName::SDSGDClip},
      {"sd_clip2", PresetName::SDClip2},
      {"dc_clip2", PresetName::DCClip2},
      {"constant", PresetName::Constant}}};
  return table;
}

inline void apply_schedule_override(PowerSchedule& s, const Json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string("config: schedules.") + what + " must be an object");
  if (j.contains("base")) s.base = parse_schedule_number(j.at("base"), what);
  if (j.contains("exponent")) s.exponent = j.at("exponent").get<double>();
  if (j.contains("floor")) s.floor = parse_schedule_number(j.at("floor"), what);
}

}  // namespace config_detail

/// Parses the structured run description into an executable RunConfig.
/// See the README for the full annotated format.
inline RunConfig parse_run_config(const Json& j) {
  namespace cd = config_detail;
  RunConfig cfg;
  try {
    const Json& pj = j.at("problem");
    const int dim = pj.at("dim").get<int>();
    if (dim < 1) throw ConfigError("config: problem.dim must be >= 1");
    const std::string pkind = pj.at("kind").get<std::string>();
    ModelVector reference;
    if (pkind == "quadratic_diag") {
      ModelVector h = cd::expand_vector_field(pj.value("h", Json(1.0)), dim, "problem.h");
      ModelVector xs = cd::expand_vector_field(pj.value("optimum", Json(0.0)), dim, "problem.optimum");
      cfg.problem = Problem::quadratic_diag(std::move(h), std::move(xs));
    } else if (pkind == "logistic_synthetic") {
      const int n = pj.value("num_samples", 8 * dim);
      const auto data_seed = pj.value("data_seed", std::uint64_t{0});
      cfg.problem = Problem::logistic_synthetic(dim, n, data_seed);
    } else if (pkind == "nonconvex_wells") {
      ModelVector c = cd::expand_vector_field(pj.value("well_scale", Json(1.0)), dim, "problem.well_scale");
      ModelVector m = cd::expand_vector_field(pj.value("centers", Json(0.0)), dim, "problem.centers");
      cfg.problem = Problem::nonconvex_wells(std::move(c), std::move(m));
    } else {
      throw ConfigError("config: unknown problem.kind \"" + pkind + "\"");
    }
    const ModelVector offset =
        cd::expand_vector_field(pj.value("x0_offset", Json(1.0)), dim, "problem.x0_offset");
    cfg.x0 = axpy(cfg.problem.reference_point(), 1.0, offset);

    const Json& nj = j.at("noise");
    cfg.noise.kind = cd::parse_enum(nj.at("kind"), "noise.kind", cd::noise_table());
    cfg.noise.tail_index = nj.value("tail_index", 1.5);
    cfg.noise.scale = nj.value("scale", 1.0);
    cfg.noise.dim = dim;

    cfg.mode = cd::parse_enum(j.at("mode"), "mode", cd::mode_table());
    cfg.num_clients = j.at("num_clients").get<int>();
    cfg.buffer = j.at("buffer").get<int>();
    cfg.local_steps = j.at("local_steps").get<int>();
    cfg.rounds = j.at("rounds").get<long>();
    cfg.policy = cd::parse_enum(j.at("policy"), "policy", cd::policy_table());
    if (j.contains("clip_mode")) {
      const std::string cm = j.at("clip_mode").get<std::string>();
      if (cm == "coordinate") {
        cfg.clip_mode = ClipMode::Coordinatewise;
      } else if (cm == "l2") {
        cfg.clip_mode = ClipMode::L2Ball;
      } else {
        throw ConfigError("config: clip_mode must be \"coordinate\" or \"l2\"");
      }
    }
    cfg.track_hessian = j.value("track_hessian", false);
    cfg.master_seed = j.value("seed", std::uint64_t{0});
    cfg.history_capacity = j.value("history_capacity", 0L);

    const Json& sj = j.at("schedules");
    if (sj.contains("preset")) {
      SchedulePreset preset;
      preset.name = cd::parse_enum(sj.at("preset"), "schedules.preset", cd::preset_table());
      preset.alpha = sj.value("alpha", cfg.noise.tail_index);
      preset.horizon_T = cfg.rounds;
      cfg.schedules = resolve_preset(preset);
    } else {
      cfg.schedules.eta_outer = PowerSchedule::constant(1.0);
      cfg.schedules.eta_local = PowerSchedule::constant(1.0);
      cfg.schedules.u_local = PowerSchedule::infinite();
      cfg.schedules.u_outer = PowerSchedule::infinite();
    }
    if (sj.contains("eta_outer")) cd::apply_schedule_override(cfg.schedules.eta_outer, sj.at("eta_outer"), "eta_outer");
    if (sj.contains("eta_local")) cd::apply_schedule_override(cfg.schedules.eta_local, sj.at("eta_local"), "eta_local");
    if (sj.contains("u_local")) cd::apply_schedule_override(cfg.schedules.u_local, sj.at("u_local"), "u_local");
    if (sj.contains("u_outer")) cd::apply_schedule_override(cfg.schedules.u_outer, sj.at("u_outer"), "u_outer");

    cfg.client_groups.clear();
    for (const Json& gj : j.at("clients")) {
      RuntimeGroup g;
      g.cls = cd::parse_enum(gj.at("class"), "clients[].class", cd::runtime_class_table());
      g.count = gj.at("count").get<int>();
      if (g.cls == RuntimeClass::Custom) {
        g.lo = gj.at("lo").get<double>();
        g.hi = gj.at("hi").get<double>();
      }
      cfg.client_groups.push_back(g);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

/// Canonical serialized form of a parsed config; parse(serialize(cfg))
/// reproduces cfg field-for-field.
inline Json serialize_run_config(const RunConfig& cfg) {
  namespace cd = config_detail;
  Json j;
  Json pj;
  switch (cfg.problem.kind()) {
    case ProblemKind::QuadraticDiag:
      pj["kind"] = "quadratic_diag";
      pj["dim"] = cfg.problem.dim();
      pj["h"] = cfg.problem.curvature_diag();
      pj["optimum"] = cfg.problem.reference_point();
      break;
    case ProblemKind::LogisticSynthetic:
      pj["kind"] = "logistic_synthetic";
      pj["dim"] = cfg.problem.dim();
      pj["num_samples"] = cfg.problem.num_samples();
      pj["data_seed"] = cfg.problem.data_seed();
      break;
    case ProblemKind::NonconvexSmoothTest:
      pj["kind"] = "nonconvex_wells";
      pj["dim"] = cfg.problem.dim();
      pj["well_scale"] = cfg.problem.well_scales();
      pj["centers"] = cfg.problem.reference_point();
      break;
  }
  pj["x0_offset"] = sub(cfg.x0, cfg.problem.reference_point());
  j["problem"] = pj;

  Json nj;
  nj["kind"] = cd::enum_name(cfg.noise.kind, cd::noise_table());
  nj["tail_index"] = cfg.noise.tail_index;
  nj["scale"] = cfg.noise.scale;
  j["noise"] = nj;

  j["mode"] = cd::enum_name(cfg.mode, cd::mode_table());
  j["num_clients"] = cfg.num_clients;
  j["buffer"] = cfg.buffer;
  j["local_steps"] = cfg.local_steps;
  j["rounds"] = cfg.rounds;
  j["policy"] = cd::enum_name(cfg.policy, cd::policy_table());
  j["clip_mode"] = cfg.clip_mode == ClipMode::Coordinatewise ? "coordinate" : "l2";
  j["track_hessian"] = cfg.track_hessian;
  j["seed"] = cfg.master_seed;
  j["history_capacity"] = cfg.history_capacity;

  auto sched = [](const PowerSchedule& s) {
    Json o;
    o["base"] = cd::schedule_number_to_json(s.base);
    o["exponent"] = s.exponent;
    o["floor"] = cd::schedule_number_to_json(s.floor);
    return o;
  };
  Json sj;
  sj["eta_outer"] = sched(cfg.schedules.eta_outer);
  sj["eta_local"] = sched(cfg.schedules.eta_local);
  sj["u_local"] = sched(cfg.schedules.u_local);
  sj["u_outer"] = sched(cfg.schedules.u_outer);
  j["schedules"] = sj;

  Json groups = Json::array();
  for (const auto& g : cfg.client_groups) {
    Json gj;
    gj["class"] = cd::enum_name(g.cls, cd::runtime_class_table());
    gj["count"] = g.count;
    if (g.cls == RuntimeClass::Custom) {
      gj["lo"] = g.lo;
      gj["hi"] = g.hi;
    }
    groups.push_back(gj);
  }
  j["clients"] = groups;
  return j;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw ConfigError("failed to parse " + path + ": " + e.what());
  }
}

/// Applies one `key=value` override to a JSON document; the key is a dotted
/// path, the value is parsed as JSON when possible and kept as a string
/// otherwise.
inline void apply_override(Json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like key=value, got \"" + spec + "\"");
  }
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::exception&) {
    value = raw;  // bare strings need no quotes on the command line
  }
  Json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override path has an empty segment: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace tailsim
