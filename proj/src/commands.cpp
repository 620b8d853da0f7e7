#include "qrate/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "qrate/batch.hpp"
#include "qrate/output.hpp"

namespace qrate {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return format_number(v); }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot write " + path.string());
    }
    f << content;
    if (!f) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

template <class F>
std::string to_text(F&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

// Shared driver: config errors -> 2, anything else -> 1.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
}

std::string certificate_text(const CertificateReport& r) {
    std::ostringstream os;
    os << "  assumption 1 (A+BK Hurwitz):        " << (r.assumption1_ok ? "ok" : "FAILS") << "\n";
    os << "  assumption 2 (Lambda < N):          " << (r.assumption2_ok ? "ok" : "FAILS") << "\n";
    if (r.assumption1_ok) {
        os << "  psi condition  lhs = " << num(r.lhs_psi) << "  " << (r.psi_ok ? "ok" : "FAILS") << "\n";
        os << "  rho condition  lhs = " << num(r.lhs_rho) << "  " << (r.rho_ok ? "ok" : "FAILS") << "\n";
        os << "  contraction    nu  = " << num(r.nu) << "  " << (r.nu_ok ? "ok" : "FAILS") << "\n";
    }
    os << "  certified: " << (r.certified() ? "yes" : "no") << "\n";
    for (const std::string& m : r.messages) {
        os << "  - " << m << "\n";
    }
    return os.str();
}

nlohmann::json certificate_json(const CertificateReport& r) {
    return {{"assumption1_ok", r.assumption1_ok}, {"assumption2_ok", r.assumption2_ok},
            {"psi_ok", r.psi_ok},                 {"rho_ok", r.rho_ok},
            {"nu_ok", r.nu_ok},                   {"lhs_psi", r.lhs_psi},
            {"lhs_rho", r.lhs_rho},               {"nu", r.nu},
            {"certified", r.certified()},         {"messages", r.messages}};
}

std::string triple_text(const DesignParams& p) {
    return "psi = " + num(p.psi) + ", rho = " + num(p.rho) + ", phi = " + num(p.phi);
}

std::string constants_text(const DerivedConstants& d, const GainConstants& g) {
    std::ostringstream os;
    os << "  Lambda = " << num(d.Lambda) << "  Lambda_eff = " << num(d.Lambda_eff) << "  Phi = " << num(d.Phi)
       << "\n";
    os << "  chi = " << num(d.chi) << "  nu = " << num(d.nu) << "  H_tilde = " << num(d.H_tilde)
       << "  r_eps = " << num(d.r_eps) << "\n";
    os << "  lambda_min(P) = " << num(d.lambda_min_P) << "  lambda_max(P) = " << num(d.lambda_max_P)
       << "  ||S|| = " << num(d.norm_S) << "\n";
    os << "  data rate = " << num(d.data_rate_bits) << " bit/s\n";
    os << "  C1 = " << num(g.C1) << "  C2 = " << num(g.C2) << "  C3 = " << num(g.C3) << "  Gamma = " << num(g.Gamma)
       << "  H = " << num(g.H) << "\n";
    if (g.valid) {
        os << "  C = " << num(g.C) << "  lambda = " << num(g.lambda) << "  kappa = " << num(g.kappa) << "\n";
    } else {
        os << "  C, lambda, kappa: undefined (nu >= 1)\n";
    }
    return os.str();
}

std::string events_text(const TrajectoryLog& log) {
    std::ostringstream os;
    os << "  state at t_0: " << (log.samples.front().visible() ? "visible" : "lost") << "\n";
    if (log.events.empty()) {
        os << "  no capture/escape events\n";
    }
    for (const Event& e : log.events) {
        os << "  " << to_string(e.kind) << " at k = " << e.k << " (t = " << num(e.t) << ")\n";
    }
    os << "  final E_k = " << num(log.samples.back().E) << ", final |x(t_k)| = " << num(inf_norm(log.samples.back().x))
       << "\n";
    return os.str();
}

std::string checks_text(const CheckReport& r) {
    std::ostringstream os;
    for (const CheckResult& c : r.checks) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-28s %8zu  %-14s margin %s\n", c.name.c_str(), c.samples_checked,
                      std::string(to_string(c.verdict)).c_str(), num(c.worst_margin).c_str());
        os << line;
    }
    os << "  overall: " << (r.passed() ? "PASS" : "FAIL") << (r.certified ? "" : " (design not certified)") << "\n";
    return os.str();
}

struct Pipeline {
    ScenarioConfig cfg;
    ResolvedDesign design;
    DerivedConstants d;
    GainConstants g;
    TrajectoryLog log;
    std::optional<CheckReport> report;
};

void write_outputs(const fs::path& dir, const Pipeline& p) {
    write_file(dir / "samples.csv", to_text([&](std::ostream& os) { write_samples_csv(os, p.log); }));
    write_file(dir / "dense.csv", to_text([&](std::ostream& os) { write_dense_csv(os, p.log); }));
    write_file(dir / "events.csv", to_text([&](std::ostream& os) { write_events_csv(os, p.log); }));
    write_file(dir / "err_E.svg", plot_error_radius(p.log, p.cfg.disturbance));
    write_file(dir / "x1_aux.svg", plot_state_aux(p.log, p.cfg.disturbance));

    std::ostringstream rep;
    rep << "scenario: " << p.cfg.name << "\n";
    rep << "plant: n_x = " << p.cfg.plant.nx() << ", n_u = " << p.cfg.plant.nu() << ", n_d = " << p.cfg.plant.nd()
        << ", tau_s = " << num(p.cfg.plant.tau_s) << ", N = " << p.cfg.plant.N << "\n\n";
    rep << "configured design: " << triple_text(p.cfg.design) << "\n" << certificate_text(p.design.configured);
    if (p.design.synthesized) {
        rep << "\nsynthesized design: " << triple_text(p.design.params) << "\n" << certificate_text(p.design.used);
    }
    rep << "\nconstants:\n" << constants_text(p.d, p.g);
    rep << "\nrun: horizon = " << num(p.log.horizon) << " s, " << p.log.samples.size() << " samples, "
        << p.cfg.substeps << " substeps\n"
        << events_text(p.log);
    if (p.report) {
        rep << "\nchecks:\n" << checks_text(*p.report);
        write_file(dir / "checks.csv", to_text([&](std::ostream& os) { write_checks_csv(os, *p.report); }));
    }
    write_file(dir / "report.txt", rep.str());
}

Pipeline run_pipeline(const ScenarioConfig& cfg, bool check, std::optional<std::uint64_t> corrupt) {
    Pipeline p;
    p.cfg = cfg;
    p.design = resolve_design(cfg);
    if (!p.design.used.assumption1_ok) {
        throw std::domain_error("A + BK is not Hurwitz; nothing to simulate");
    }
    p.d = derive_constants(cfg.plant, p.design.params);
    p.g = gain_constants(p.d, p.design.params);
    RunOptions ro;
    ro.substeps = cfg.substeps;
    ro.decimation = cfg.decimation;
    p.log = run_closed_loop(cfg.plant, p.design.params, p.d, cfg.disturbance, cfg.x0, cfg.horizon, ro);
    if (check) {
        if (corrupt) {
            if (*corrupt >= p.log.samples.size()) {
                throw ConfigError("--corrupt-log", 0, "", "sample index beyond the horizon");
            }
            p.log.samples[*corrupt].E *= 0.5;
        }
        const GainFunctions f(p.d, p.design.params, p.g);
        p.report = check_trajectory(p.log, p.d, p.design.params, p.g, f, cfg.disturbance, cfg.x0);
    }
    return p;
}

ScenarioConfig load(const CommandOptions& opt) {
    if (opt.config.empty()) {
        throw ConfigError("--config", 0, "", "no configuration given");
    }
    return apply_overrides(load_config(opt.config), opt);
}

}  // namespace

ResolvedDesign resolve_design(const ScenarioConfig& cfg) {
    ResolvedDesign r;
    r.params = cfg.design;
    r.configured = validate_design(cfg.plant, cfg.design);
    r.used = r.configured;
    if (!r.configured.certified() && cfg.synthesize_if_invalid && r.configured.assumption1_ok &&
        r.configured.assumption2_ok) {
        r.params = synthesize_design(cfg.plant, cfg.design);
        r.used = validate_design(cfg.plant, r.params);
        r.synthesized = true;
    }
    return r;
}

ScenarioConfig apply_overrides(ScenarioConfig cfg, const CommandOptions& opt) {
    if (opt.seed) {
        cfg.disturbance.reseed(*opt.seed);
    }
    if (opt.substeps) {
        if (*opt.substeps < 1) {
            throw ConfigError("--substeps", 0, "", "must be at least 1");
        }
        cfg.substeps = *opt.substeps;
    }
    return cfg;
}

std::string resolve_out_dir(const CommandOptions& opt, const ScenarioConfig& cfg) {
    if (!opt.out_dir.empty()) {
        return opt.out_dir;
    }
    if (!cfg.output_dir.empty()) {
        return cfg.output_dir;
    }
    if (const char* env = std::getenv("QRATE_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "qrate_out";
}

int cmd_validate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ScenarioConfig cfg = load(opt);
        const CertificateReport r = validate_design(cfg.plant, cfg.design);
        out << "scenario " << cfg.name << ": " << triple_text(cfg.design) << "\n" << certificate_text(r);
        nlohmann::json j = certificate_json(r);
        j["scenario"] = cfg.name;
        j["design"] = {{"psi", cfg.design.psi}, {"rho", cfg.design.rho}, {"phi", cfg.design.phi}};
        const fs::path dir = prepare_dir(resolve_out_dir(opt, cfg));
        write_file(dir / "certificate.json", j.dump(2) + "\n");
        return r.certified() ? kExitOk : kExitFail;
    });
}

int cmd_synthesize(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ScenarioConfig cfg = load(opt);
        cfg.design = synthesize_design(cfg.plant, cfg.design);
        cfg.synthesize_if_invalid = false;
        const CertificateReport r = validate_design(cfg.plant, cfg.design);
        out << "synthesized " << triple_text(cfg.design) << "\n" << certificate_text(r);
        const fs::path dir = prepare_dir(resolve_out_dir(opt, cfg));
        write_file(dir / "synthesized.cfg", serialize_config(cfg));
        out << "wrote " << (dir / "synthesized.cfg").string() << "\n";
        return r.certified() ? kExitOk : kExitFail;
    });
}

int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ScenarioConfig cfg = load(opt);
        const Pipeline p = run_pipeline(cfg, false, std::nullopt);
        const fs::path dir = prepare_dir(resolve_out_dir(opt, cfg));
        write_outputs(dir, p);
        out << "scenario " << cfg.name << (p.design.synthesized ? " (synthesized design)" : "") << "\n"
            << events_text(p.log) << "outputs in " << dir.string() << "\n";
        return kExitOk;
    });
}

int cmd_check(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ScenarioConfig cfg = load(opt);
        const Pipeline p = run_pipeline(cfg, true, opt.corrupt_sample);
        const fs::path dir = prepare_dir(resolve_out_dir(opt, cfg));
        write_outputs(dir, p);
        out << "scenario " << cfg.name << (p.design.synthesized ? " (synthesized design)" : "") << "\n"
            << checks_text(*p.report) << "outputs in " << dir.string() << "\n";
        return p.report->passed() ? kExitOk : kExitFail;
    });
}

int cmd_gains(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ScenarioConfig cfg = load(opt);
        const ResolvedDesign rd = resolve_design(cfg);
        if (!rd.used.certified()) {
            err << "design is not certified; the ISS gains are undefined. Run `qrate validate` for details.\n";
            return kExitFail;
        }
        const DerivedConstants d = derive_constants(cfg.plant, rd.params);
        const GainFunctions f = iss_gains(d, rd.params, gain_constants(d, rd.params));
        const std::vector<double> grid = gain_grid(opt.s_min, opt.s_max, opt.points);
        const fs::path dir = prepare_dir(resolve_out_dir(opt, cfg));
        write_file(dir / "gains.csv", to_text([&](std::ostream& os) { write_gains_csv(os, f, grid); }));
        out << "wrote " << grid.size() << " rows to " << (dir / "gains.csv").string() << "\n";
        return kExitOk;
    });
}

int cmd_reproduce_paper(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    CommandOptions o = opt;
    if (o.config.empty()) {
        o.config = "builtin:paper_sec7";
    }
    return guarded(err, [&] {
        const ScenarioConfig cfg = load(o);
        const Pipeline p = run_pipeline(cfg, true, o.corrupt_sample);
        const fs::path dir = prepare_dir(resolve_out_dir(o, cfg));
        write_outputs(dir, p);

        out << "configured triple: " << triple_text(cfg.design) << "\n" << certificate_text(p.design.configured);
        if (p.design.synthesized) {
            out << "running with synthesized triple: " << triple_text(p.design.params) << " (nu = "
                << num(p.d.nu) << ")\n";
        }
        out << events_text(p.log);
        out << checks_text(*p.report) << "outputs in " << dir.string() << "\n";
        return p.report->passed() ? kExitOk : kExitFail;
    });
}

int cmd_batch(const std::vector<std::string>& configs, const CommandOptions& opt, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        if (configs.empty()) {
            throw ConfigError("batch", 0, "", "no configurations given");
        }
        std::vector<ScenarioConfig> cfgs;
        std::vector<Scenario> scenarios;
        std::map<std::string, int> seen;
        for (const std::string& path : configs) {
            CommandOptions o = opt;
            o.config = path;
            ScenarioConfig cfg = load(o);
            if (const int n = seen[cfg.name]++; n > 0) {
                cfg.name += "_" + std::to_string(n);
            }
            const ResolvedDesign rd = resolve_design(cfg);
            scenarios.push_back({cfg.name, cfg.plant, rd.params, cfg.disturbance, cfg.x0, cfg.horizon, cfg.substeps,
                                 cfg.decimation, true});
            cfgs.push_back(std::move(cfg));
        }
        const std::vector<ScenarioResult> results = run_batch(scenarios, Exec::parallel);
        const fs::path root = prepare_dir(opt.out_dir.empty() ? resolve_out_dir(opt, cfgs.front()) : opt.out_dir);
        bool all_ok = true;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const ScenarioResult& r = results[i];
            if (!r.ok()) {
                out << r.name << ": error: " << r.error << "\n";
                all_ok = false;
                continue;
            }
            Pipeline p;
            p.cfg = cfgs[i];
            p.design = resolve_design(cfgs[i]);
            p.d = derive_constants(p.cfg.plant, p.design.params);
            p.g = gain_constants(p.d, p.design.params);
            p.log = r.log;
            p.report = r.report;
            write_outputs(prepare_dir((root / r.name).string()), p);
            const bool passed = r.report && r.report->passed();
            all_ok = all_ok && passed;
            out << r.name << ": " << (passed ? "PASS" : "FAIL") << ", " << r.log.events.size() << " events\n";
        }
        return all_ok ? kExitOk : kExitFail;
    });
}

}  // namespace qrate
