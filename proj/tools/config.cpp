#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace cmvspec::cli {

using nlohmann::json;

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::walk: return "walk";
    case ModelKind::cmv_electric: return "cmv-electric";
    case ModelKind::cmv_skew: return "cmv-skew";
  }
  return "?";
}

namespace {

bool is_integer_text(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

std::string convention_name(model::ElectricConvention c) {
  if (c.walk_matched) return c.conjugate ? "walk-matched-conjugate" : "walk-matched";
  return c.conjugate ? "conjugate" : "plain";
}

model::ElectricConvention parse_convention(const std::string& s) {
  if (s == "walk-matched") return {false, true};
  if (s == "walk-matched-conjugate") return {true, true};
  if (s == "plain") return {false, false};
  if (s == "conjugate") return {true, false};
  throw ConfigError("convention must be one of walk-matched, walk-matched-conjugate, plain, conjugate");
}

Complex parse_complex(const json& v, const char* field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(std::string(field) + " must be a number or [re, im]");
}

std::int64_t parse_int(const json& v, const char* field) {
  if (!v.is_number_integer()) throw ConfigError(std::string(field) + " must be an integer");
  return v.get<std::int64_t>();
}

json angle_json(const AngleSpec& a) { return a.text; }

}  // namespace

AngleSpec AngleSpec::parse(std::string_view text) {
  AngleSpec out;
  out.text = std::string(text);
  if (text == "golden") {
    out.value = torus::golden_turn().value();
    return out;
  }
  if (text.find('/') != std::string_view::npos || is_integer_text(text)) {
    try {
      out.exact = torus::parse_rational_turn(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bad angle '" + out.text + "': " + e.what());
    }
    out.value = torus::to_turn(*out.exact).value();
    return out;
  }
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v, std::chars_format::fixed);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ConfigError("bad angle '" + out.text + "'");
  out.value = Turn(v).value();
  return out;
}

AngleSpec AngleSpec::from_json(const json& v) {
  if (v.is_string()) return parse(v.get<std::string>());
  if (v.is_number_integer()) return parse(std::to_string(v.get<std::int64_t>()));
  if (v.is_number_float()) {
    AngleSpec out;
    out.text = v.dump();
    out.value = Turn(v.get<double>()).value();
    return out;
  }
  throw ConfigError("angle must be a number, \"p/q\" or \"golden\"");
}

RationalTurn AngleSpec::rational() const {
  if (!exact) throw ConfigError("angle '" + text + "' has no exact form; use \"p/q\"");
  return *exact;
}

template <>
torus::BasicTurn<double> AngleSpec::as<double>() const {
  return turn();
}

template <>
torus::BasicTurn<torus::Rational> AngleSpec::as<torus::Rational>() const {
  return rational();
}

template <class Number>
model::WalkParams<Number> ExperimentConfig::walk_params() const {
  model::WalkParams<Number> p;
  p.omega = omega.as<Number>();
  p.theta = theta.as<Number>();
  p.eta = eta.as<Number>();
  p.a = a;
  p.b = b;
  return p;
}

template <class Number>
model::SkewParams<Number> ExperimentConfig::skew_params() const {
  model::SkewParams<Number> p;
  p.d = d;
  p.omega = omega.as<Number>();
  std::vector<torus::BasicTurn<Number>> coords(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < x.size(); ++k) coords[k] = x[k].as<Number>();
  p.x = torus::TorusPoint<Number>(coords);
  p.a = a;
  p.b = b;
  return p;
}

template model::WalkParams<double> ExperimentConfig::walk_params() const;
template model::WalkParams<torus::Rational> ExperimentConfig::walk_params() const;
template model::SkewParams<double> ExperimentConfig::skew_params() const;
template model::SkewParams<torus::Rational> ExperimentConfig::skew_params() const;

json ExperimentConfig::to_json() const {
  json j;
  j["model"] = to_string(model);
  j["d"] = d;
  j["omega"] = angle_json(omega);
  j["theta"] = angle_json(theta);
  j["eta"] = angle_json(eta);
  j["tau"] = angle_json(tau);
  j["a"] = {a.real(), a.imag()};
  j["b"] = {b.real(), b.imag()};
  json xs = json::array();
  for (const auto& t : x) xs.push_back(angle_json(t));
  j["x"] = xs;
  j["window"] = window;
  j["block"] = block;
  j["seed"] = seed;
  j["convention"] = convention_name(convention);
  if (!omegas.empty()) {
    json os = json::array();
    for (const auto& t : omegas) os.push_back(angle_json(t));
    j["omegas"] = os;
  }
  return j;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"model", "d",      "omega", "theta", "eta",        "a",   "b",
                                              "x",     "window", "block", "seed",  "convention", "tau", "omegas"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");

  ExperimentConfig c;
  if (j.contains("model")) {
    const auto m = j["model"].is_string() ? j["model"].get<std::string>() : std::string();
    if (m == "walk") c.model = ModelKind::walk;
    else if (m == "cmv-electric") c.model = ModelKind::cmv_electric;
    else if (m == "cmv-skew") c.model = ModelKind::cmv_skew;
    else throw ConfigError("model must be walk, cmv-electric or cmv-skew");
  }
  if (j.contains("d")) c.d = static_cast<int>(parse_int(j["d"], "d"));
  if (j.contains("omega")) c.omega = AngleSpec::from_json(j["omega"]);
  if (j.contains("theta")) c.theta = AngleSpec::from_json(j["theta"]);
  if (j.contains("eta")) c.eta = AngleSpec::from_json(j["eta"]);
  if (j.contains("tau")) c.tau = AngleSpec::from_json(j["tau"]);
  if (j.contains("a")) c.a = parse_complex(j["a"], "a");
  if (j.contains("b")) c.b = parse_complex(j["b"], "b");
  if (j.contains("x")) {
    if (!j["x"].is_array()) throw ConfigError("x must be a list of angles");
    for (const auto& v : j["x"]) c.x.push_back(AngleSpec::from_json(v));
  }
  if (j.contains("window")) c.window = parse_int(j["window"], "window");
  if (j.contains("block")) c.block = parse_int(j["block"], "block");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("convention")) {
    if (!j["convention"].is_string()) throw ConfigError("convention must be a string");
    c.convention = parse_convention(j["convention"].get<std::string>());
  }
  if (j.contains("omegas")) {
    if (!j["omegas"].is_array()) throw ConfigError("omegas must be a list of angles");
    for (const auto& v : j["omegas"]) c.omegas.push_back(AngleSpec::from_json(v));
  }

  try {
    model::check_coin_norm(c.a, c.b);
  } catch (const model::ModelError& e) {
    throw ConfigError(e.what());
  }
  if (c.model == ModelKind::cmv_skew && c.d < 2) throw ConfigError("cmv-skew needs d >= 2");
  if (c.d < 1) throw ConfigError("d must be positive");
  if (!c.x.empty() && c.x.size() != static_cast<std::size_t>(c.d))
    throw ConfigError("x must have exactly d coordinates");
  if (c.window <= 0 || c.block <= 0) throw ConfigError("window and block must be positive");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace cmvspec::cli
