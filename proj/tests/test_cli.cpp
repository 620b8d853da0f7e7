#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrate/commands.hpp"
#include "qrate/output.hpp"

#ifndef QRATE_CLI
#error "QRATE_CLI must name the qrate executable"
#endif

using namespace qrate;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qrate_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

fs::path write_cfg(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

CommandOptions opts(const std::string& config, const fs::path& out) {
    CommandOptions o;
    o.config = config;
    o.out_dir = out.string();
    return o;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QRATE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kEquilibrium = R"(name = rest
plant.A = [[1, 0], [0, -1.5]]
plant.B = [[1], [0.5]]
plant.D = [[1], [0]]
plant.K = [[-3.5, 0]]
plant.tau_s = 0.1
plant.N = 5
sim.x0 = [0, 0]
sim.horizon = 3
)";

}  // namespace

TEST_CASE("validate") {
    std::ostringstream out, err;
    const fs::path dir = scratch("validate");
    CHECK(cmd_validate(opts("builtin:paper_sec7_certified", dir), out, err) == kExitOk);
    const std::string json = slurp(dir / "certificate.json");
    CHECK(json.find("\"assumption1_ok\": true") != std::string::npos);
    CHECK(cmd_validate(opts("builtin:paper_sec7", dir), out, err) == kExitFail);

    const std::string open = std::string(kEquilibrium).replace(std::string(kEquilibrium).find("[[-3.5, 0]]"), 11,
                                                                "[[0, 0]]");
    const fs::path cfg = write_cfg(dir, "open.cfg", open);
    CHECK(cmd_validate(opts(cfg.string(), dir), out, err) == kExitFail);

    std::string one = kEquilibrium;
    one.replace(one.find("plant.N = 5"), 11, "plant.N = 1");
    const fs::path bad = write_cfg(dir, "bad.cfg", one);
    CHECK(cmd_validate(opts(bad.string(), dir), out, err) == kExitUsage);
    CHECK(cmd_validate(opts((dir / "missing.cfg").string(), dir), out, err) == kExitUsage);
}

TEST_CASE("synthesize writes a certified config") {
    std::ostringstream out, err;
    const fs::path dir = scratch("synth");
    CHECK(cmd_synthesize(opts("builtin:paper_sec7", dir), out, err) == kExitOk);
    const ScenarioConfig cfg = load_config((dir / "synthesized.cfg").string());
    CHECK(validate_design(cfg.plant, cfg.design).certified());
}

TEST_CASE("simulate at rest produces empty events and zero states") {
    std::ostringstream out, err;
    const fs::path dir = scratch("rest");
    const fs::path cfg = write_cfg(dir, "rest.cfg", kEquilibrium);
    CHECK(cmd_simulate(opts(cfg.string(), dir / "out"), out, err) == kExitOk);
    CHECK(slurp(dir / "out" / "events.csv") == "kind,k,t\n");
    CHECK(first_line(dir / "out" / "samples.csv") == "k,t,x_1,x_2,xhat_1,xhat_2,symbol,stage,E,V,d_sup_prev");
    std::ifstream in(dir / "out" / "samples.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string k, t, x1, x2;
        std::getline(ss, k, ',');
        std::getline(ss, t, ',');
        std::getline(ss, x1, ',');
        std::getline(ss, x2, ',');
        CHECK(std::stod(x1) == 0.0);
        CHECK(std::stod(x2) == 0.0);
        ++rows;
    }
    CHECK(rows == 30);
    for (const char* f : {"dense.csv", "err_E.svg", "x1_aux.svg", "report.txt"}) CHECK(fs::exists(dir / "out" / f));
}

TEST_CASE("simulate is byte-identical across runs") {
    std::ostringstream out, err;
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    CHECK(cmd_simulate(opts("builtin:scalar_toy", a), out, err) == kExitOk);
    CHECK(cmd_simulate(opts("builtin:scalar_toy", b), out, err) == kExitOk);
    for (const char* f : {"samples.csv", "dense.csv", "events.csv", "err_E.svg"})
        CHECK(slurp(a / f) == slurp(b / f));

    const fs::path c = scratch("det_c");
    CommandOptions reseeded = opts("builtin:scalar_toy", c);
    reseeded.seed = 8;
    CHECK(cmd_simulate(reseeded, out, err) == kExitOk);
    CHECK(slurp(a / "samples.csv") != slurp(c / "samples.csv"));
}

TEST_CASE("two-state events") {
    std::ostringstream out, err;
    const fs::path dir = scratch("events");
    CHECK(cmd_simulate(opts("builtin:paper_sec7", dir), out, err) == kExitOk);
    std::ifstream in(dir / "events.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> kinds;
    std::vector<double> times;
    while (std::getline(in, line)) {
        kinds.push_back(line.substr(0, line.find(',')));
        times.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    }
    REQUIRE(kinds.size() == 5);
    CHECK(kinds[0] == "Captured");
    CHECK(times[0] <= 0.4 + 1e-12);
    CHECK(kinds[1] == "Escaped");
    CHECK(times[1] > 10.5);
    CHECK(kinds[3] == "Escaped");
    CHECK(times[3] > 22.5);
}

TEST_CASE("check and reproduce-paper") {
    std::ostringstream out, err;
    CHECK(cmd_check(opts("builtin:paper_sec7_certified", scratch("check")), out, err) == kExitOk);

    CommandOptions bad = opts("builtin:paper_sec7_certified", scratch("corrupt"));
    bad.corrupt_sample = 50;
    CHECK(cmd_check(bad, out, err) == kExitFail);

    const fs::path dir = scratch("raw");
    CHECK(cmd_reproduce_paper(opts("builtin:paper_sec7", dir), out, err) == kExitOk);
    CHECK(slurp(dir / "checks.csv").find(",fail") == std::string::npos);
}

TEST_CASE("uncertified check reports not_certified rows") {
    std::ostringstream out, err;
    const fs::path dir = scratch("gate");
    std::string text = builtin_text("paper_sec7");
    text.replace(text.find("sim.synthesize_if_invalid = true"), 32, "sim.synthesize_if_invalid = false");
    const fs::path cfg = write_cfg(dir, "gate.cfg", text);
    CHECK(cmd_check(opts(cfg.string(), dir), out, err) == kExitOk);
    const std::string checks = slurp(dir / "checks.csv");
    CHECK(checks.find("lyapunov_decay") != std::string::npos);
    CHECK(checks.find("not_certified") != std::string::npos);
    CHECK(checks.find(",fail") == std::string::npos);
}

TEST_CASE("gains") {
    std::ostringstream out, err;
    const fs::path dir = scratch("gains");
    CommandOptions o = opts("builtin:scalar_toy", dir);
    o.points = 10;
    CHECK(cmd_gains(o, out, err) == kExitOk);
    std::ifstream in(dir / "gains.csv");
    std::string header, zero;
    std::getline(in, header);
    std::getline(in, zero);
    CHECK(header.rfind("s,", 0) == 0);
    std::stringstream ss(zero);
    std::string cell;
    while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) == 0.0);
    int rows = 1;
    while (std::getline(in, cell)) ++rows;
    CHECK(rows == 11);

    std::string raw = builtin_text("paper_sec7");
    raw.replace(raw.find("sim.synthesize_if_invalid = true"), 32, "sim.synthesize_if_invalid = false");
    const fs::path cfg = write_cfg(dir, "raw.cfg", raw);
    CHECK(cmd_gains(opts(cfg.string(), dir), out, err) == kExitFail);
}

TEST_CASE("batch writes one directory per config") {
    std::ostringstream out, err;
    const fs::path dir = scratch("batch");
    CommandOptions o;
    o.out_dir = dir.string();
    CHECK(cmd_batch({"builtin:scalar_toy", "builtin:paper_sec7_certified"}, o, out, err) == kExitOk);
    CHECK(fs::exists(dir / "scalar_toy" / "samples.csv"));
    CHECK(fs::exists(dir / "paper_sec7_certified" / "checks.csv"));
}

TEST_CASE("output directory precedence") {
    ScenarioConfig cfg = load_config("builtin:scalar_toy");
    CommandOptions o;
    cfg.output_dir = "from_cfg";
    CHECK(resolve_out_dir(o, cfg) == "from_cfg");
    o.out_dir = "from_flag";
    CHECK(resolve_out_dir(o, cfg) == "from_flag");
}

TEST_CASE("executable exit codes") {
    const fs::path dir = scratch("exe");
    const std::string out = " --out " + dir.string();
    CHECK(run_cli("validate --config builtin:paper_sec7_certified" + out) == 0);
    CHECK(run_cli("validate --config builtin:paper_sec7" + out) == 1);
    CHECK(run_cli("validate --config " + (dir / "nope.cfg").string() + out) == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("check --config builtin:paper_sec7_certified --corrupt-log 50" + out) == 1);
    CHECK(run_cli("gains --config builtin:scalar_toy --points 5" + out) == 0);
}
