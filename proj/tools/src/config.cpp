#include "fracsl/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "fracsl/error.hpp"

namespace fracsl::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Kind { kNumber, kInteger, kBool, kString, kNumbers, kPotential, kDrive, kCertificate };

struct Field {
  std::string name;
  Kind kind = Kind::kNumber;
  bool required = false;
  json fallback;  ///< default; null means absent stays absent
  double lo = -kInf, hi = kInf;
  bool lo_open = false, hi_open = false;
  std::vector<std::string> choices;
  std::string doc;

  Field& req(bool on = true) {
    required = on;
    return *this;
  }
  Field& def(json v) {
    fallback = std::move(v);
    return *this;
  }
  Field& range(double a, double b, bool open_a = false, bool open_b = false) {
    lo = a;
    hi = b;
    lo_open = open_a;
    hi_open = open_b;
    return *this;
  }
  Field& one_of(std::vector<std::string> c) {
    choices = std::move(c);
    return *this;
  }
  Field& describe(std::string d) {
    doc = std::move(d);
    return *this;
  }
};

Field field(std::string name, Kind kind) {
  Field f;
  f.name = std::move(name);
  f.kind = kind;
  return f;
}

struct CommandSchema {
  std::vector<Field> fields;
  // extra cross-field rules, run after the per-field checks
  std::function<void(const json&, std::vector<SchemaError>&)> rules;
};

Field robin(const char* name) {
  return field(name, Kind::kNumber).def(0.0).range(0.0, kInf).describe("Robin coefficient");
}

Field alpha_field() {
  return field("alpha", Kind::kNumber).req().range(0.0, 1.0, true, false).describe("fractional order");
}

const std::map<std::string, CommandSchema>& schemas() {
  static const std::map<std::string, CommandSchema> table = [] {
    std::map<std::string, CommandSchema> t;
    t["eigensolve"].fields = {
        field("potential", Kind::kPotential).req(),
        robin("h"),
        robin("H"),
        field("n_max", Kind::kInteger).req().range(0, 5000).describe("highest eigenvalue index"),
        field("grid_size", Kind::kInteger).range(16, 65536),
    };
    t["forward"].fields = {
        field("potential", Kind::kPotential).req(),
        robin("h"),
        robin("H"),
        alpha_field(),
        field("drive", Kind::kDrive).req(),
        field("x_points", Kind::kNumbers).def(json::array({0.0, 0.25, 0.5, 0.75, 1.0})).range(0.0, 1.0),
        field("method", Kind::kString).def("both").one_of({"spectral", "l1fd", "both"}),
        field("n_modes", Kind::kInteger).def(64).range(1, 2000),
        field("nx", Kind::kInteger).def(256).range(32, 8192),
        field("tolerance", Kind::kNumber).def(1e-3).range(0.0, kInf, true),
        field("refinement_budget", Kind::kBool).def(true).describe("add the FD self-refinement gap to the tolerance"),
    };
    t["kernel"].fields = {
        field("potential", Kind::kPotential).req(),
        robin("h"),
        robin("H"),
        alpha_field(),
        field("x", Kind::kNumber).req().range(0.0, 1.0),
        field("t_max", Kind::kNumber).range(0.0, kInf, true),
        field("nt", Kind::kInteger).def(256).range(2, 100000),
        field("n_modes", Kind::kInteger).def(64).range(1, 2000),
        field("drive", Kind::kDrive).describe("if present, the kernel uses the drive grid and a Duhamel check runs"),
        field("duhamel_tolerance", Kind::kNumber).def(1e-4).range(0.0, kInf, true),
    };
    t["kernel"].rules = [](const json& p, std::vector<SchemaError>& errs) {
      if (!p.contains("t_max") && !p.contains("drive")) {
        errs.push_back({"parameters.t_max", "required unless a drive is given"});
      }
    };
    t["weyl-scan"].fields = {
        field("scan", Kind::kString).req().one_of({"m", "F", "wronskian"}),
        field("potential", Kind::kPotential),
        field("q1", Kind::kPotential),
        field("q2", Kind::kPotential),
        robin("h"),
        robin("h1"),
        robin("h2"),
        robin("H"),
        field("x", Kind::kNumber).def(1.0).range(0.0, 1.0, true),
        field("d", Kind::kNumber).def(0.4).range(0.0, 1.0, true, true),
        field("y_min", Kind::kNumber).def(100.0).range(0.0, kInf, true),
        field("y_max", Kind::kNumber).def(1600.0).range(0.0, 1600.0, true),
        field("count", Kind::kInteger).def(15).range(3, 1000),
        field("angle", Kind::kNumber).def(std::numbers::pi / 2).range(0.0, std::numbers::pi),
        field("n_modes", Kind::kInteger).def(200).range(10, 2000),
    };
    t["weyl-scan"].rules = [](const json& p, std::vector<SchemaError>& errs) {
      const std::string scan = p.value("scan", "");
      if (scan == "m" && !p.contains("potential")) errs.push_back({"parameters.potential", "required for scan m"});
      if (scan == "F" || scan == "wronskian") {
        for (const char* k : {"q1", "q2"}) {
          if (!p.contains(k)) errs.push_back({std::string("parameters.") + k, "required for scan " + scan});
        }
      }
      if (p.contains("y_min") && p.contains("y_max") && p["y_min"].is_number() && p["y_max"].is_number() &&
          !(p["y_min"].get<double>() < p["y_max"].get<double>())) {
        errs.push_back({"parameters.y_max", "must exceed y_min"});
      }
    };
    t["counting"].fields = {
        field("potential", Kind::kPotential).req(),
        robin("h"),
        robin("H"),
        field("n_max", Kind::kInteger).def(300).range(1, 5000),
        field("x0", Kind::kNumber).req().range(0.0, 1.0),
        field("tau", Kind::kNumber).def(1e-6).range(0.0, 1.0, true),
        field("s_min", Kind::kNumber).def(100.0).range(0.0, kInf, true),
        field("s_max", Kind::kNumber).def(1e6).range(0.0, kInf, true),
        field("s_count", Kind::kInteger).def(41).range(2, 100000),
        field("A", Kind::kNumber).range(0.0, kInf, true).describe("density certificate to test"),
        field("inclusion", Kind::kBool).def(true),
    };
    t["region-map"].fields = {
        field("resolution", Kind::kInteger).req().range(10, 1000),
        field("certificate", Kind::kCertificate),
    };
    t["reconstruct"].fields = {
        field("recipe", Kind::kString).def("twin").one_of({"twin"}),
        field("noise_level", Kind::kNumber).def(0.0).range(0.0, 1.0),
        field("basis_dim", Kind::kInteger).def(8).range(0, 16),
        field("gamma", Kind::kNumber).def(1e-10).range(0.0, kInf),
        field("discrepancy", Kind::kBool),
        field("discrepancy_factor", Kind::kNumber).def(1.1).range(1.0, 10.0).describe("Morozov safety factor"),
        field("estimate_h", Kind::kBool).def(true),
        field("max_iterations", Kind::kInteger).def(200).range(1, 10000),
        field("fd_nx", Kind::kInteger).def(256).range(32, 4096),
        field("fd_nt", Kind::kInteger).def(4096).range(64, 65536),
        field("rel_l2_threshold", Kind::kNumber).def(0.05).range(0.0, kInf, true),
        field("h_threshold", Kind::kNumber).def(0.02).range(0.0, kInf, true),
    };
    t["distinguish"].fields = {
        field("pairs", Kind::kInteger).def(20).range(1, 1000),
        field("d", Kind::kNumber).def(0.5).range(0.0, 1.0, true, true),
        field("x0", Kind::kNumber).def(0.6).range(0.0, 1.0),
        alpha_field().req(false).def(0.5),
        field("h", Kind::kNumber).def(0.5).range(0.0, kInf),
        robin("H"),
        field("amplitude", Kind::kNumber).def(0.8).range(0.0, kInf, true),
        field("drive", Kind::kDrive).def(json{{"type", "power"}, {"power", 2.0}, {"T", 1.0}, {"n", 1024}}),
        field("samples", Kind::kInteger).def(128).range(2, 100000),
        field("fd_nx", Kind::kInteger).def(128).range(32, 4096),
        field("fd_nt", Kind::kInteger).def(1024).range(32, 65536),
        field("margin", Kind::kNumber).def(10.0).range(0.0, kInf, true),
    };
    t["verify-all"].fields = {};
    return t;
  }();
  return table;
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void check_range(const Field& f, double v, const std::string& path, std::vector<SchemaError>& errs) {
  const bool below = f.lo_open ? !(v > f.lo) : !(v >= f.lo);
  const bool above = f.hi_open ? !(v < f.hi) : !(v <= f.hi);
  if (below || above) {
    errs.push_back({path, "value " + fmt(v) + " outside " + (f.lo_open ? "(" : "[") + fmt(f.lo) + ", " + fmt(f.hi) +
                              (f.hi_open ? ")" : "]")});
  }
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& path,
                std::vector<SchemaError>& errs) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      errs.push_back({join(path, it.key()), "unknown key"});
    }
  }
}

bool expect_number(const json& obj, const char* key, const std::string& path, std::vector<SchemaError>& errs,
                   bool required = true) {
  if (!obj.contains(key)) {
    if (required) errs.push_back({join(path, key), "missing required field"});
    return false;
  }
  if (!obj[key].is_number()) {
    errs.push_back({join(path, key), "expected a number"});
    return false;
  }
  return true;
}

void validate_potential(const json& v, const std::string& path, std::vector<SchemaError>& errs) {
  if (!v.is_object()) {
    errs.push_back({path, "expected an object"});
    return;
  }
  if (!v.contains("type") || !v["type"].is_string()) {
    errs.push_back({join(path, "type"), "missing required field"});
    return;
  }
  const std::string type = v["type"];
  if (v.contains("grid_size")) {
    const auto& g = v["grid_size"];
    if (!g.is_number_integer() || g.get<long long>() < 16 || g.get<long long>() > 65536) {
      errs.push_back({join(path, "grid_size"), "expected an integer in [16, 65536]"});
    }
  }
  if (type == "constant") {
    check_keys(v, {"type", "value", "grid_size"}, path, errs);
    expect_number(v, "value", path, errs);
  } else if (type == "samples") {
    check_keys(v, {"type", "samples"}, path, errs);
    if (!v.contains("samples") || !v["samples"].is_array() || v["samples"].size() < 17) {
      errs.push_back({join(path, "samples"), "expected an array of at least 17 numbers"});
    } else {
      for (std::size_t i = 0; i < v["samples"].size(); ++i) {
        if (!v["samples"][i].is_number()) errs.push_back({join(path, "samples") + "[" + std::to_string(i) + "]", "expected a number"});
      }
    }
  } else if (type == "bump") {
    check_keys(v, {"type", "amplitude", "a", "b", "grid_size"}, path, errs);
    expect_number(v, "amplitude", path, errs);
    const bool a = expect_number(v, "a", path, errs), b = expect_number(v, "b", path, errs);
    if (a && b) {
      const double lo = v["a"], hi = v["b"];
      if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) errs.push_back({join(path, "b"), "need 0 <= a < b <= 1"});
    }
  } else if (type == "well") {
    check_keys(v, {"type", "depth", "d", "grid_size"}, path, errs);
    expect_number(v, "depth", path, errs);
    if (expect_number(v, "d", path, errs)) {
      const double d = v["d"];
      if (!(d > 0.0 && d <= 1.0)) errs.push_back({join(path, "d"), "value " + fmt(d) + " outside (0, 1]"});
    }
  } else {
    errs.push_back({join(path, "type"), "unknown potential type '" + type + "'"});
  }
}

void validate_drive(const json& v, const std::string& path, std::vector<SchemaError>& errs) {
  if (!v.is_object()) {
    errs.push_back({path, "expected an object"});
    return;
  }
  if (!v.contains("type") || !v["type"].is_string()) {
    errs.push_back({join(path, "type"), "missing required field"});
    return;
  }
  const std::string type = v["type"];
  if (type == "samples") {
    check_keys(v, {"type", "t", "values"}, path, errs);
    if (!v.contains("t") || !v["t"].is_array() || !v.contains("values") || !v["values"].is_array() ||
        v["t"].size() != v["values"].size() || v["t"].size() < 2) {
      errs.push_back({join(path, "values"), "expected arrays t and values of equal length >= 2"});
    }
    return;
  }
  const std::map<std::string, std::string> shape_param = {
      {"power", "power"}, {"sine", "omega"}, {"chirp", "rate"}, {"relax", "rate"}};
  const auto it = shape_param.find(type);
  if (it == shape_param.end()) {
    errs.push_back({join(path, "type"), "unknown drive type '" + type + "'"});
    return;
  }
  check_keys(v, {"type", "T", "n", "amplitude", it->second}, path, errs);
  if (expect_number(v, "T", path, errs) && !(v["T"].get<double>() > 0.0)) {
    errs.push_back({join(path, "T"), "must be positive"});
  }
  if (v.contains("n")) {
    const auto& n = v["n"];
    if (!n.is_number_integer() || n.get<long long>() < 4 || n.get<long long>() > 65536) {
      errs.push_back({join(path, "n"), "expected an integer in [4, 65536]"});
    }
  }
  expect_number(v, "amplitude", path, errs, false);
  if (expect_number(v, it->second.c_str(), path, errs) && type == "power" && !(v["power"].get<double>() > 0.0)) {
    errs.push_back({join(path, "power"), "must be positive so that eta(0) = 0"});
  }
}

void validate_field(const Field& f, const json& v, const std::string& path, std::vector<SchemaError>& errs) {
  switch (f.kind) {
    case Kind::kNumber:
      if (!v.is_number()) {
        errs.push_back({path, "expected a number"});
        return;
      }
      check_range(f, v.get<double>(), path, errs);
      return;
    case Kind::kInteger:
      if (!v.is_number_integer()) {
        errs.push_back({path, "expected an integer"});
        return;
      }
      check_range(f, static_cast<double>(v.get<long long>()), path, errs);
      return;
    case Kind::kBool:
      if (!v.is_boolean()) errs.push_back({path, "expected a boolean"});
      return;
    case Kind::kString:
      if (!v.is_string()) {
        errs.push_back({path, "expected a string"});
        return;
      }
      if (!f.choices.empty() &&
          std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) == f.choices.end()) {
        std::string all;
        for (const auto& c : f.choices) all += (all.empty() ? "" : ", ") + c;
        errs.push_back({path, "expected one of: " + all});
      }
      return;
    case Kind::kNumbers:
      if (!v.is_array() || v.empty()) {
        errs.push_back({path, "expected a nonempty array of numbers"});
        return;
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_number()) {
          errs.push_back({p, "expected a number"});
        } else {
          check_range(f, v[i].get<double>(), p, errs);
        }
      }
      return;
    case Kind::kPotential:
      validate_potential(v, path, errs);
      return;
    case Kind::kDrive:
      validate_drive(v, path, errs);
      return;
    case Kind::kCertificate:
      if (!v.is_object()) {
        errs.push_back({path, "expected an object {A, B}"});
        return;
      }
      check_keys(v, {"A", "B"}, path, errs);
      expect_number(v, "A", path, errs);
      expect_number(v, "B", path, errs);
      return;
  }
}

struct Validated {
  std::vector<SchemaError> errors;
  ExperimentConfig config;
};

Validated validate_impl(const std::string& text) {
  Validated out;
  auto& errs = out.errors;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    errs.push_back({"", std::string("JSON parse error: ") + e.what()});
    return out;
  }
  if (!root.is_object()) {
    errs.push_back({"", "configuration must be a JSON object"});
    return out;
  }
  check_keys(root, {"command", "parameters", "output_dir", "seed"}, "", errs);
  if (!root.contains("command") || !root["command"].is_string()) {
    errs.push_back({"command", "missing required field"});
    return out;
  }
  const std::string command = root["command"];
  const auto it = schemas().find(command);
  if (it == schemas().end()) {
    errs.push_back({"command", "unknown command '" + command + "'"});
    return out;
  }
  if (root.contains("output_dir") && !root["output_dir"].is_string()) {
    errs.push_back({"output_dir", "expected a string"});
  }
  if (root.contains("seed") && (!root["seed"].is_number_integer() || root["seed"].get<long long>() < 0)) {
    errs.push_back({"seed", "expected a nonnegative integer"});
  }
  json params = root.value("parameters", json::object());
  if (!params.is_object()) {
    errs.push_back({"parameters", "expected an object"});
    return out;
  }
  const auto& schema = it->second;
  std::vector<std::string> allowed;
  for (const auto& f : schema.fields) allowed.push_back(f.name);
  check_keys(params, allowed, "parameters", errs);
  for (const auto& f : schema.fields) {
    const std::string path = "parameters." + f.name;
    if (!params.contains(f.name)) {
      if (f.required) {
        errs.push_back({path, "missing required field"});
      } else if (!f.fallback.is_null()) {
        params[f.name] = f.fallback;
      }
      continue;
    }
    validate_field(f, params[f.name], path, errs);
  }
  if (schema.rules) schema.rules(params, errs);
  out.config.command = command;
  out.config.parameters = std::move(params);
  out.config.output_dir = root.value("output_dir", std::string{});
  if (root.contains("seed") && root["seed"].is_number_integer()) out.config.seed = root["seed"].get<std::uint64_t>();
  return out;
}

json field_schema(const Field& f) {
  json s;
  switch (f.kind) {
    case Kind::kNumber:
    case Kind::kInteger:
      s["type"] = f.kind == Kind::kNumber ? "number" : "integer";
      if (std::isfinite(f.lo)) s[f.lo_open ? "exclusiveMinimum" : "minimum"] = f.lo;
      if (std::isfinite(f.hi)) s[f.hi_open ? "exclusiveMaximum" : "maximum"] = f.hi;
      break;
    case Kind::kBool:
      s["type"] = "boolean";
      break;
    case Kind::kString:
      s["type"] = "string";
      if (!f.choices.empty()) s["enum"] = f.choices;
      break;
    case Kind::kNumbers:
      s["type"] = "array";
      s["minItems"] = 1;
      s["items"] = {{"type", "number"}};
      if (std::isfinite(f.lo)) s["items"]["minimum"] = f.lo;
      if (std::isfinite(f.hi)) s["items"]["maximum"] = f.hi;
      break;
    case Kind::kPotential:
      s["$ref"] = "#/$defs/potential";
      break;
    case Kind::kDrive:
      s["$ref"] = "#/$defs/drive";
      break;
    case Kind::kCertificate:
      s = {{"type", "object"},
           {"required", {"A", "B"}},
           {"additionalProperties", false},
           {"properties", {{"A", {{"type", "number"}}}, {"B", {{"type", "number"}}}}}};
      break;
  }
  if (!f.fallback.is_null()) s["default"] = f.fallback;
  if (!f.doc.empty()) s["description"] = f.doc;
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<SchemaError> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration";
        for (const auto& e : errors) msg += "\n  " + (e.path.empty() ? std::string("<root>") : e.path) + ": " + e.message;
        return msg;
      }()),
      errors_(std::move(errors)) {}

std::vector<SchemaError> validate(const std::string& config_text) { return validate_impl(config_text).errors; }

ExperimentConfig parse_config(const std::string& config_text) {
  auto v = validate_impl(config_text);
  if (!v.errors.empty()) throw ConfigError(std::move(v.errors));
  return std::move(v.config);
}

json published_schema() {
  json root;
  root["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  root["title"] = "fracsl experiment configuration";
  root["type"] = "object";
  root["required"] = {"command"};
  root["additionalProperties"] = false;
  root["properties"] = {{"command", {{"enum", command_names()}}},
                        {"parameters", {{"type", "object"}}},
                        {"output_dir", {{"type", "string"}}},
                        {"seed", {{"type", "integer"}, {"minimum", 0}}}};
  json all_of = json::array();
  for (const auto& [name, schema] : schemas()) {
    json params = {{"type", "object"}, {"additionalProperties", false}, {"properties", json::object()}};
    json required = json::array();
    for (const auto& f : schema.fields) {
      params["properties"][f.name] = field_schema(f);
      if (f.required) required.push_back(f.name);
    }
    if (!required.empty()) params["required"] = required;
    all_of.push_back({{"if", {{"properties", {{"command", {{"const", name}}}}}}},
                      {"then", {{"properties", {{"parameters", params}}}}}});
  }
  root["allOf"] = all_of;
  const json num = {{"type", "number"}};
  root["$defs"]["potential"] = {
      {"type", "object"},
      {"required", {"type"}},
      {"properties",
       {{"type", {{"enum", {"constant", "samples", "bump", "well"}}}},
        {"value", num},
        {"samples", {{"type", "array"}, {"minItems", 17}, {"items", num}}},
        {"amplitude", num},
        {"a", num},
        {"b", num},
        {"depth", num},
        {"d", num},
        {"grid_size", {{"type", "integer"}, {"minimum", 16}, {"maximum", 65536}}}}},
      {"description",
       "constant: q = value; samples: uniform-grid values on [0,1]; bump: amplitude sin^2(pi (x-a)/(b-a)) on [a,b]; "
       "well: -depth (1 - x/d)^2 on [0,d]"}};
  root["$defs"]["drive"] = {
      {"type", "object"},
      {"required", {"type"}},
      {"properties",
       {{"type", {{"enum", {"power", "sine", "chirp", "relax", "samples"}}}},
        {"T", {{"type", "number"}, {"exclusiveMinimum", 0}}},
        {"n", {{"type", "integer"}, {"minimum", 4}, {"maximum", 65536}}},
        {"amplitude", num},
        {"power", {{"type", "number"}, {"exclusiveMinimum", 0}}},
        {"omega", num},
        {"rate", num},
        {"t", {{"type", "array"}, {"items", num}}},
        {"values", {{"type", "array"}, {"items", num}}}}},
      {"description",
       "power: a t^p; sine: a sin(omega t); chirp: a sin(rate t^2); relax: a (1 - exp(-rate t)); samples: explicit "
       "grid; n intervals on [0,T], default 512"}};
  return root;
}

PotentialSpec build_potential(const json& spec) {
  const std::string type = spec.at("type");
  const int grid = spec.value("grid_size", kDefaultGridSize);
  if (type == "constant") return PotentialSpec::constant(spec.at("value").get<double>(), grid);
  if (type == "samples") return PotentialSpec(spec.at("samples").get<std::vector<double>>());
  if (type == "bump") {
    const double amp = spec.at("amplitude"), a = spec.at("a"), b = spec.at("b");
    return PotentialSpec::sampled(
        [=](double x) {
          if (x < a || x > b) return 0.0;
          const double s = std::sin(std::numbers::pi * (x - a) / (b - a));
          return amp * s * s;
        },
        grid);
  }
  if (type == "well") {
    const double depth = spec.at("depth"), d = spec.at("d");
    return PotentialSpec::sampled([=](double x) { return x < d ? -depth * (1.0 - x / d) * (1.0 - x / d) : 0.0; },
                                  grid);
  }
  raise(ErrorKind::kDomain, "unknown potential type " + type);
}

fwd::DriveSignal build_drive(const json& spec) {
  const std::string type = spec.at("type");
  if (type == "samples") {
    return fwd::DriveSignal(spec.at("t").get<std::vector<double>>(), spec.at("values").get<std::vector<double>>(),
                            "samples");
  }
  const double T = spec.at("T");
  const int n = spec.value("n", 512);
  const double a = spec.value("amplitude", 1.0);
  std::function<double(double)> f;
  std::ostringstream desc;
  if (type == "power") {
    const double p = spec.at("power");
    f = [=](double t) { return a * std::pow(t, p); };
    desc << a << " t^" << p;
  } else if (type == "sine") {
    const double w = spec.at("omega");
    f = [=](double t) { return a * std::sin(w * t); };
    desc << a << " sin(" << w << " t)";
  } else if (type == "chirp") {
    const double r = spec.at("rate");
    f = [=](double t) { return a * std::sin(r * t * t); };
    desc << a << " sin(" << r << " t^2)";
  } else if (type == "relax") {
    const double r = spec.at("rate");
    f = [=](double t) { return a * -std::expm1(-r * t); };
    desc << a << " (1 - exp(-" << r << " t))";
  } else {
    raise(ErrorKind::kDomain, "unknown drive type " + type);
  }
  return fwd::DriveSignal::sampled(f, T, n, desc.str());
}

}  // namespace fracsl::cli
