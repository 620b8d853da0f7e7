#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrate/config.hpp"

using namespace qrate;

#ifndef QRATE_CONFIG_DIR
#error "QRATE_CONFIG_DIR must point at configs/"
#endif

namespace {

const char* kMinimal = R"(name = tiny
plant.A = [[0.5]]
plant.B = [[1]]
plant.D = [[1]]
plant.K = [[-2]]
plant.tau_s = 0.1
plant.N = 3
sim.x0 = [0.2]
sim.horizon = 2
)";

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("minimal config uses defaults") {
    const ScenarioConfig c = parse_config(kMinimal);
    CHECK(c.name == "tiny");
    CHECK(c.plant.N == 3);
    CHECK(c.design.E0 == 0.5);
    CHECK(c.design.eps == 0.2);
    CHECK(c.substeps == 100);
    CHECK(c.disturbance.kind_name() == "zero");
    CHECK_FALSE(c.synthesize_if_invalid);
}

TEST_CASE("comments and disturbance kinds") {
    std::string text = kMinimal;
    text += "# a comment line\n";
    text += "disturbance.kind = pulse_train   # trailing comment\n";
    text += "disturbance.pulses = [[0.5, 0.7, [1.5]], [1.0, 1.2, [-1]]]\n";
    const ScenarioConfig c = parse_config(text);
    const auto* train = std::get_if<PulseTrainSignal>(&c.disturbance.kind());
    REQUIRE(train);
    REQUIRE(train->pulses.size() == 2);
    CHECK(train->pulses[1].level == Vector{-1.0});

    std::string named = kMinimal;
    named.replace(0, 11, "name = \"with # hash\"");
    CHECK(parse_config(named).name == "with # hash");
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "name = again\n"), ConfigError);
}

TEST_CASE("round trip is the identity") {
    for (const std::string& name : builtin_names()) {
        const ScenarioConfig c = load_config("builtin:" + name);
        const std::string text = serialize_config(c);
        const ScenarioConfig back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
    }
    std::string text = kMinimal;
    text += "disturbance.kind = sinusoid\ndisturbance.amplitude = [0.1]\ndisturbance.frequency_hz = 0.3\n"
            "disturbance.phase = 0.1\n";
    const ScenarioConfig c = parse_config(text);
    CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("bundled scenarios equal the shipped files") {
    CHECK(builtin_names() == std::vector<std::string>{"paper_sec7", "paper_sec7_certified", "scalar_toy"});
    for (const std::string& name : builtin_names()) {
        const std::string path = std::string(QRATE_CONFIG_DIR) + "/" + name + ".cfg";
        CHECK(builtin_text(name) == read_file(path));
        CHECK(load_config(path) == load_config("builtin:" + name));
    }
    CHECK_THROWS_AS(load_config("builtin:nope"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("bundled two-state scenario") {
    const ScenarioConfig c = load_config("builtin:paper_sec7");
    CHECK(c.plant.tau_s == 0.1);
    CHECK(c.plant.N == 5);
    CHECK(c.x0 == Vector{1.0, 1.0});
    CHECK(c.horizon == 40.0);
    CHECK(c.design.rho == 0.1);
    CHECK(c.design.phi == 0.01);
    CHECK(c.synthesize_if_invalid);
    CHECK(c.disturbance.onsets(40.0) == std::vector<double>{10.5, 22.5});
}

TEST_CASE("errors carry line and field") {
    std::string bad_n = kMinimal;
    bad_n.replace(bad_n.find("plant.N = 3"), 11, "plant.N = 1");
    try {
        parse_config(bad_n);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 7);
        CHECK(e.field() == "plant.N");
    }

    CHECK(error_line(std::string(kMinimal) + "plant.bogus = 3\n") == 10);
    CHECK(error_line(std::string(kMinimal) + "sim.horizon = 4\n") == 10);
    CHECK(error_line(std::string(kMinimal) + "design.rho = [1, \n") == 10);
    CHECK(error_line(std::string(kMinimal) + "no equals sign here\n") == 10);
    CHECK(error_line(std::string(kMinimal) + "design.rho = -1\n") == 10);
    CHECK(error_line(std::string(kMinimal) + "disturbance.level = [1]\n") != -1);  // kind is zero
    CHECK(error_line("plant.A = [[1, 2]]\n") != -1);
}

TEST_CASE("dimension mismatches are rejected") {
    std::string text = kMinimal;
    text.replace(text.find("sim.x0 = [0.2]"), 14, "sim.x0 = [0.2, 1]");
    CHECK_THROWS_AS(parse_config(text), ConfigError);
    std::string pulses = kMinimal;
    pulses += "disturbance.kind = pulse_train\ndisturbance.pulses = [[0.7, 0.5, [1]]]\n";
    CHECK_THROWS_AS(parse_config(pulses), ConfigError);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 213.02845467331204, 3.7893168592656076e-05, -0.0, 1e300}) {
        CHECK(std::stod(format_number(v)) == v);
    }
}
