#include <string>

#include <doctest.h>

#include "rodlqg/config_io.h"
#include "rodlqg/errors.h"

using namespace rodlqg;

namespace {

std::string Error(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    ParseConfig(text, "cfg.json", overrides);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

const char* kBothEnds = R"({
  "actuators": [
    {"xi": 0.0, "beta": 1.0},
    {"xi": 1.0, "beta": 1.0}
  ],
  "q": 1.0,
  "R": [1, 0, 0, 1]
})";

}  // namespace

TEST_CASE("bundled example documents") {
  const LoadedConfig e1 = ParseConfig(ExampleConfigJson(1), "e1");
  CHECK(e1.rod.num_actuators() == 2);
  CHECK(e1.rod.actuators[1].xi == 1.0);
  CHECK(e1.rod.q == 1.0);
  CHECK(e1.rod.r.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  const LoadedConfig e3 = ParseConfig(ExampleConfigJson(3), "e3");
  CHECK(e3.rod.num_sensors() == 2);
  CHECK(e3.rod.sensors[1].zeta == 0.75);
  CHECK_THROWS_AS(ExampleConfigJson(4), ValidationError);
}

TEST_CASE("nested weight rows and defaults") {
  const LoadedConfig c = ParseConfig(R"({"actuators": [{"xi": 0, "beta": 1}, {"xi": 1, "beta": 2}],
    "R": [[2, 0.5], [0.5, 1]], "sensors": [{"zeta": 0.5}]})", "x");
  CHECK(c.rod.r(0, 1) == 0.5);
  CHECK(c.rod.sensors[0].c == 1.0);
  CHECK(c.rod.sensors[0].d == 1.0);
  CHECK(c.rod.b == 1.0);
  CHECK(c.sim.sim.order == 64);
  CHECK(!c.sim.feedback);
}

TEST_CASE("invariant violations name the field and line") {
  std::string e = Error(R"({
  "actuators": [
    {"xi": 0.0, "beta": -1.0},
    {"xi": 1.0, "beta": 1.0}
  ],
  "R": [1, 0, 0, 1]
})");
  CHECK(e.find("cfg.json:3:") == 0);
  CHECK(e.find("beta must be nonnegative") != std::string::npos);

  e = Error(R"({
  "actuators": [
    {"xi": 0.5, "beta": 1.0},
    {"xi": 0.5, "beta": 1.0}
  ],
  "R": [1, 0, 0, 1]
})");
  CHECK(e.find("cfg.json:4:") == 0);
  CHECK(e.find("actuator positions must be strictly increasing") != std::string::npos);

  e = Error(R"({
  "actuators": [{"xi": 0.0, "beta": 1.0}, {"xi": 1.0, "beta": 1.0}],
  "R": [1, 2, 2, 1]
})");
  CHECK(e.find("cfg.json:3: R:") == 0);
  CHECK(e.find("positive definite") != std::string::npos);
}

TEST_CASE("parse errors carry a position") {
  const std::string e = Error("{\n  \"q\": 1,\n  \"actuators\": [,]\n}");
  CHECK(e.find("cfg.json") == 0);
  CHECK(e.find("line 3") != std::string::npos);
}

TEST_CASE("schema errors") {
  CHECK(Error(R"({"actuators": [{"xi": 0, "beta": 1}], "R": [1], "qq": 1})").find("qq: unknown key") !=
        std::string::npos);
  CHECK(Error(R"({"actuators": [{"xi": 0, "beta": 1}], "R": [1, 0]})").find("expected 1 entries") !=
        std::string::npos);
  CHECK(Error(R"({"actuators": [{"xi": "left", "beta": 1}], "R": [1]})").find("expected a number") !=
        std::string::npos);
  CHECK(Error(R"({"R": [1]})").find("actuators: missing") != std::string::npos);
  CHECK(Error(R"({"actuators": [{"xi": 0, "beta": 1}], "R": [1], "sim": {"dt": -1}})").find("sim.dt") !=
        std::string::npos);
  CHECK(Error(R"({"actuators": [{"xi": 0, "beta": 1}], "R": [1], "sim": {"feedback": "x"}})").find(
            "sim.feedback") != std::string::npos);
}

TEST_CASE("overrides apply before validation") {
  const LoadedConfig c = ParseConfig(kBothEnds, "cfg.json", {"q=2.5", "actuators[1].beta=3", "sim.dt=0.001"});
  CHECK(c.rod.q == 2.5);
  CHECK(c.rod.actuators[1].beta == 3.0);
  CHECK(c.sim.sim.dt == 0.001);
  CHECK(Error(kBothEnds, {"actuators[0].beta=-2"}).find("beta must be nonnegative") != std::string::npos);
  CHECK(Error(kBothEnds, {"actuators[5].beta=1"}).find("out of range") != std::string::npos);
  CHECK(Error(kBothEnds, {"novalue"}).find("key=value") != std::string::npos);
}

TEST_CASE("sim section") {
  const LoadedConfig c = ParseConfig(R"({
    "actuators": [{"xi": 0, "beta": 1}], "R": [1],
    "sim": {"n": 12, "dt": 1e-4, "t": 0.5, "seed": 99, "noise": true,
            "initial_state": {"basis": "plain", "coeffs": [0, 1]},
            "initial_estimate": [0.5], "feedback": "none", "window": [0.1, 0.4],
            "integrator": "exponential", "record_stride": 5}})", "s");
  const SimConfig& s = c.sim.sim;
  CHECK(s.order == 12);
  CHECK(s.seed == 99);
  CHECK(s.noise_enabled);
  CHECK(s.initial_state.basis() == Basis::kPlainCosine);
  CHECK((*s.initial_estimate)[0] == 0.5);
  CHECK(*c.sim.feedback == FeedbackSource::kNone);
  CHECK((*c.sim.window)[1] == 0.4);
  CHECK(s.integrator == Integrator::kExponentialEuler);
  CHECK(s.record_stride == 5);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(LoadConfig("/nonexistent/config.json"), ValidationError);
}
