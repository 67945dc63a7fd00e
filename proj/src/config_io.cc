#include "rodlqg/config_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rodlqg/errors.h"

namespace rodlqg {
namespace {

using nlohmann::json;

// "actuators[1].xi" -> {"actuators", "1", "xi"}
std::vector<std::string> SplitPath(const std::string& key) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : key) {
    if (ch == '.' || ch == '[' || ch == ']') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

bool IsIndex(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return c >= '0' && c <= '9'; });
}

// Line of the field's key: each key is searched after its parent, skipping
// earlier array elements by counting repeated keys.
int LocateField(std::string_view text, const std::string& field) {
  std::size_t pos = 0;
  bool found_any = false;
  const auto parts = SplitPath(field.substr(0, field.find(':')));
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (IsIndex(parts[p])) continue;
    int skip = 0;
    if (p > 0 && IsIndex(parts[p - 1])) skip = std::stoi(parts[p - 1]);
    const std::string needle = "\"" + parts[p] + "\"";
    std::size_t at = text.find(needle, pos);
    for (int s = 0; s < skip && at != std::string_view::npos; ++s) {
      at = text.find(needle, at + 1);
    }
    if (at == std::string_view::npos) break;
    pos = at;
    found_any = true;
  }
  if (!found_any) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Reader {
 public:
  Reader(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  [[noreturn]] void Fail(const std::string& field, const std::string& why) const {
    const int line = LocateField(text_, field);
    std::string where = source_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ValidationError(where + ": " + field + ": " + why);
  }

  double Number(const json& j, const std::string& field) const {
    if (!j.is_number()) Fail(field, "expected a number");
    return j.get<double>();
  }

  double NumberOr(const json& obj, const char* key, const std::string& field,
                  double fallback) const {
    if (!obj.contains(key)) return fallback;
    return Number(obj.at(key), field);
  }

  std::vector<double> Numbers(const json& j, const std::string& field) const {
    if (!j.is_array()) Fail(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(Number(j[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  void Keys(const json& obj, const std::string& field,
            std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) Fail(field, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; })) {
        Fail(field.empty() ? key : field + "." + key, "unknown key");
      }
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string_view text_;
  std::string source_;
};

void ApplyOverride(json& doc, const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--set " + entry + ": expected key=value");
  }
  const std::string key = entry.substr(0, eq);
  const std::string raw = entry.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  const auto parts = SplitPath(key);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const bool last = p + 1 == parts.size();
    if (IsIndex(parts[p])) {
      const std::size_t i = std::stoul(parts[p]);
      if (!node->is_array() || i >= node->size()) {
        throw ValidationError("--set " + key + ": index " + parts[p] +
                              " out of range");
      }
      node = &(*node)[i];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw ValidationError("--set " + key + ": " + parts[p] +
                              " is not inside an object");
      }
      node = &(*node)[parts[p]];
    }
    if (last) *node = value;
  }
}

ModalVector ReadModal(const Reader& rd, const json& j, const std::string& field) {
  if (j.is_array()) {
    auto c = rd.Numbers(j, field);
    if (c.empty()) rd.Fail(field, "needs at least one coefficient");
    return ModalVector(Basis::kOrthonormal, std::move(c));
  }
  rd.Keys(j, field, {"basis", "coeffs"});
  Basis basis = Basis::kOrthonormal;
  if (j.contains("basis")) {
    const auto& b = j.at("basis");
    if (b == "orthonormal") {
      basis = Basis::kOrthonormal;
    } else if (b == "plain") {
      basis = Basis::kPlainCosine;
    } else {
      rd.Fail(field + ".basis", "expected \"orthonormal\" or \"plain\"");
    }
  }
  if (!j.contains("coeffs")) rd.Fail(field, "missing coeffs");
  auto c = rd.Numbers(j.at("coeffs"), field + ".coeffs");
  if (c.empty()) rd.Fail(field + ".coeffs", "needs at least one coefficient");
  for (double v : c) {
    if (!std::isfinite(v)) rd.Fail(field + ".coeffs", "must be finite");
  }
  return ModalVector(basis, std::move(c));
}

SimSection ReadSim(const Reader& rd, const json& j) {
  rd.Keys(j, "sim",
          {"n", "dt", "t", "seed", "noise", "initial_state", "initial_estimate",
           "feedback", "window", "integrator", "record_stride"});
  SimSection out;
  SimConfig& s = out.sim;
  if (j.contains("n")) {
    const auto& n = j.at("n");
    if (!n.is_number_integer() || n.get<long long>() < 0 ||
        n.get<long long>() > 4096) {
      rd.Fail("sim.n", "expected an integer in [0, 4096]");
    }
    s.order = n.get<int>();
  }
  s.dt = rd.NumberOr(j, "dt", "sim.dt", s.dt);
  s.horizon = rd.NumberOr(j, "t", "sim.t", s.horizon);
  if (!(s.dt > 0.0)) rd.Fail("sim.dt", "time step must be positive");
  if (!(s.horizon >= s.dt)) rd.Fail("sim.t", "horizon must be >= dt");
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned()) rd.Fail("sim.seed", "expected a nonnegative integer");
    s.seed = v.get<std::uint64_t>();
  }
  if (j.contains("noise")) {
    if (!j.at("noise").is_boolean()) rd.Fail("sim.noise", "expected true or false");
    s.noise_enabled = j.at("noise").get<bool>();
  }
  if (j.contains("initial_state")) {
    s.initial_state = ReadModal(rd, j.at("initial_state"), "sim.initial_state");
  } else {
    s.initial_state = ModalVector::Unit(Basis::kOrthonormal, 1, 1);
  }
  if (j.contains("initial_estimate")) {
    s.initial_estimate =
        ReadModal(rd, j.at("initial_estimate"), "sim.initial_estimate");
  }
  if (j.contains("feedback")) {
    const auto& f = j.at("feedback");
    if (f == "none") {
      out.feedback = FeedbackSource::kNone;
    } else if (f == "state") {
      out.feedback = FeedbackSource::kState;
    } else if (f == "estimate") {
      out.feedback = FeedbackSource::kEstimate;
    } else {
      rd.Fail("sim.feedback", "expected \"none\", \"state\" or \"estimate\"");
    }
  }
  if (j.contains("integrator")) {
    const auto& f = j.at("integrator");
    if (f == "euler") {
      s.integrator = Integrator::kExplicitEuler;
    } else if (f == "exponential") {
      s.integrator = Integrator::kExponentialEuler;
    } else {
      rd.Fail("sim.integrator", "expected \"euler\" or \"exponential\"");
    }
  }
  if (j.contains("record_stride")) {
    const auto& v = j.at("record_stride");
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      rd.Fail("sim.record_stride", "expected a positive integer");
    }
    s.record_stride = v.get<int>();
  }
  if (j.contains("window")) {
    const auto w = rd.Numbers(j.at("window"), "sim.window");
    if (w.size() != 2 || !(w[1] > w[0]) || w[0] < 0.0) {
      rd.Fail("sim.window", "expected [t0, t1] with 0 <= t0 < t1");
    }
    out.window = std::array<double, 2>{w[0], w[1]};
  }
  return out;
}

Eigen::MatrixXd ReadWeight(const Reader& rd, const json& j, int m) {
  if (!j.is_array()) rd.Fail("R", "expected a row-major array");
  Eigen::MatrixXd r(m, m);
  if (!j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != m) {
      rd.Fail("R", "expected " + std::to_string(m) + " rows");
    }
    for (int i = 0; i < m; ++i) {
      const auto row = rd.Numbers(j[i], "R[" + std::to_string(i) + "]");
      if (static_cast<int>(row.size()) != m) {
        rd.Fail("R", "row " + std::to_string(i) + " needs " +
                         std::to_string(m) + " entries");
      }
      for (int k = 0; k < m; ++k) r(i, k) = row[k];
    }
    return r;
  }
  const auto flat = rd.Numbers(j, "R");
  if (static_cast<int>(flat.size()) != m * m) {
    rd.Fail("R", "expected " + std::to_string(m * m) + " entries for " +
                     std::to_string(m) + " actuators, got " +
                     std::to_string(flat.size()));
  }
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) r(i, k) = flat[i * m + k];
  }
  return r;
}

}  // namespace

LoadedConfig ParseConfig(std::string_view text, const std::string& source,
                         const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
  const Reader rd(text, source);
  for (const auto& o : overrides) ApplyOverride(doc, o);
  rd.Keys(doc, "", {"actuators", "sensors", "q", "R", "b", "b_profile", "sim"});

  LoadedConfig out;
  RodConfig& c = out.rod;
  if (!doc.contains("actuators")) rd.Fail("actuators", "missing");
  const auto& acts = doc.at("actuators");
  if (!acts.is_array()) rd.Fail("actuators", "expected an array");
  for (std::size_t k = 0; k < acts.size(); ++k) {
    const std::string f = "actuators[" + std::to_string(k) + "]";
    rd.Keys(acts[k], f, {"xi", "beta"});
    if (!acts[k].contains("xi")) rd.Fail(f, "missing xi");
    if (!acts[k].contains("beta")) rd.Fail(f, "missing beta");
    c.actuators.push_back({rd.Number(acts[k].at("xi"), f + ".xi"),
                           rd.Number(acts[k].at("beta"), f + ".beta")});
  }
  if (doc.contains("sensors")) {
    const auto& sens = doc.at("sensors");
    if (!sens.is_array()) rd.Fail("sensors", "expected an array");
    for (std::size_t i = 0; i < sens.size(); ++i) {
      const std::string f = "sensors[" + std::to_string(i) + "]";
      rd.Keys(sens[i], f, {"zeta", "c", "d"});
      if (!sens[i].contains("zeta")) rd.Fail(f, "missing zeta");
      c.sensors.push_back({rd.Number(sens[i].at("zeta"), f + ".zeta"),
                           rd.NumberOr(sens[i], "c", f + ".c", 1.0),
                           rd.NumberOr(sens[i], "d", f + ".d", 1.0)});
    }
  }
  c.q = rd.NumberOr(doc, "q", "q", 1.0);
  const int m = c.num_actuators();
  c.r = doc.contains("R") ? ReadWeight(rd, doc.at("R"), m)
                          : Eigen::MatrixXd::Identity(m, m);
  c.b = rd.NumberOr(doc, "b", "b", 1.0);
  if (doc.contains("b_profile")) {
    c.b_profile = rd.Numbers(doc.at("b_profile"), "b_profile");
  }
  if (doc.contains("sim")) {
    out.sim = ReadSim(rd, doc.at("sim"));
  } else {
    out.sim.sim.initial_state = ModalVector::Unit(Basis::kOrthonormal, 1, 1);
  }

  try {
    c.Validate();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon == std::string::npos) throw ValidationError(source + ": " + msg);
    rd.Fail(msg.substr(0, colon), msg.substr(colon + 2));
  }
  return out;
}

LoadedConfig LoadConfig(const std::string& path,
                        const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path, overrides);
}

std::string ExampleConfigJson(int id) {
  switch (id) {
    case 1:
      return R"({
  "actuators": [{"xi": 0.0, "beta": 1.0}, {"xi": 1.0, "beta": 1.0}],
  "q": 1.0,
  "R": [1, 0, 0, 1]
}
)";
    case 2:
      return R"({
  "actuators": [
    {"xi": 0.0, "beta": 1.0},
    {"xi": 0.5, "beta": 2.0},
    {"xi": 1.0, "beta": 1.0}
  ],
  "q": 1.0,
  "R": [1, 0, 0, 0, 1, 0, 0, 0, 1]
}
)";
    case 3:
      return R"({
  "actuators": [
    {"xi": 0.0, "beta": 1.0},
    {"xi": 0.5, "beta": 2.0},
    {"xi": 1.0, "beta": 1.0}
  ],
  "sensors": [
    {"zeta": 0.25, "c": 1.0, "d": 1.0},
    {"zeta": 0.75, "c": 1.0, "d": 1.0}
  ],
  "q": 1.0,
  "R": [1, 0, 0, 0, 1, 0, 0, 0, 1],
  "b": 1.0
}
)";
    default:
      throw ValidationError("example id must be 1, 2 or 3");
  }
}

}  // namespace rodlqg
