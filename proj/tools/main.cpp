// smaflow command line interface: preset experiment runners, a config-driven
// custom runner, an energy-log checker and a defaults printer.

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "smaflow/experiments.hpp"
#include "smaflow/io.hpp"
#include "smaflow/potential.hpp"

namespace {

using namespace smaflow;

struct CommonFlags {
    std::string config;
    std::optional<double> dt, t_final, noise_amp, stab_s, energy_tol;
    std::optional<int> nx, ny, snapshot_every;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool strict_energy = false;
    bool allow_unstable = false;
    bool csv_snapshots = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "config file (flat key = value lines)");
    cmd->add_option("--dt", f.dt, "time step");
    cmd->add_option("--nx", f.nx, "x resolution (even)");
    cmd->add_option("--ny", f.ny, "y resolution");
    cmd->add_option("--t-final", f.t_final, "final time");
    cmd->add_option("--seed", f.seed, "perturbation seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--snapshot-every", f.snapshot_every, "extra snapshot cadence in steps");
    cmd->add_option("--noise-amp", f.noise_amp, "perturbation amplitude");
    cmd->add_option("--stab-s", f.stab_s, "director stabilizer (default lambda*L/2)");
    cmd->add_option("--energy-tol", f.energy_tol, "energy monotonicity tolerance");
    cmd->add_flag("--strict-energy", f.strict_energy, "abort on an energy violation");
    cmd->add_flag("--allow-unstable", f.allow_unstable,
                  "accept a stabilizer below lambda*L/2");
    cmd->add_flag("--csv-snapshots", f.csv_snapshots, "also export snapshots as CSV");
}

ExperimentConfig build_config(Preset preset, const CommonFlags& f) {
    ExperimentConfig cfg;
    switch (preset) {
        case Preset::Accuracy: cfg = preset_accuracy(); break;
        case Preset::Chevron: cfg = preset_chevron(f.seed.value_or(42)); break;
        case Preset::Shear: cfg = preset_shear(f.seed.value_or(42)); break;
        case Preset::Custom: cfg.preset = Preset::Custom; break;
    }
    if (!f.config.empty()) apply_config(cfg, read_config_file(f.config));
    if (f.dt) cfg.scheme.dt = *f.dt;
    if (f.nx) cfg.nx = *f.nx;
    if (f.ny) cfg.ny = *f.ny;
    if (f.t_final) cfg.t_final = *f.t_final;
    if (f.seed) cfg.seed = *f.seed;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.snapshot_every) cfg.snapshot_every = *f.snapshot_every;
    if (f.noise_amp) cfg.noise_amp = *f.noise_amp;
    if (f.stab_s) cfg.scheme.stab_s = *f.stab_s;
    if (f.energy_tol) cfg.energy_tol = *f.energy_tol;
    cfg.strict_energy = cfg.strict_energy || f.strict_energy;
    cfg.allow_unstable = cfg.allow_unstable || f.allow_unstable;
    cfg.csv_snapshots = cfg.csv_snapshots || f.csv_snapshots;
    return cfg;
}

int run_and_summarize(ExperimentConfig cfg) {
    RunResult res = run_simulation(cfg);
    std::printf("preset=%s steps=%ld wall=%.1fs\n", preset_name(cfg.preset).c_str(),
                res.stats.steps, res.wall_seconds);
    std::printf("energy: initial %.10g final %.10g violations %d\n",
                res.energy.front().e_total, res.energy.back().e_total, res.violations);
    if (!cfg.no_flow) std::printf("max relative divergence: %.3e\n", res.max_div_rel);
    for (const PatternMetrics& m : res.metrics)
        std::printf("t=%.3f max|d1|=%.4f undulations=%d max|phi-y|=%.4f\n", m.time,
                    m.max_abs_d1, m.undulations, m.max_phi_dev);
    return 0;
}

int cmd_accuracy(const CommonFlags& f, const std::vector<double>& dt_list,
                 double dt_benchmark) {
    ExperimentConfig cfg = build_config(Preset::Accuracy, f);
    ConvergenceTable t = run_accuracy(cfg, dt_list, dt_benchmark);
    std::printf("%12s %12s %11s %11s %11s %11s %11s %11s\n", "dt", "dt_actual", "err_phi",
                "err_d1", "err_d2", "err_u", "err_v", "err_p");
    for (const auto& e : t.entries)
        std::printf("%12.5g %12.5g %11.4e %11.4e %11.4e %11.4e %11.4e %11.4e\n",
                    e.dt_requested, e.dt_actual, e.err_phi, e.err_d1, e.err_d2, e.err_u,
                    e.err_v, e.err_p);
    std::printf("slopes: phi %.3f d1 %.3f d2 %.3f u %.3f v %.3f p %.3f%s\n", t.slope_phi,
                t.slope_d1, t.slope_d2, t.slope_u, t.slope_v, t.slope_p,
                t.monotone ? "" : "  (warning: non-monotone error sequence)");
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::string body = "dt,dt_actual,err_phi,err_d1,err_d2,err_u,err_v,err_p\n";
        char line[256];
        for (const auto& e : t.entries) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          e.dt_requested, e.dt_actual, e.err_phi, e.err_d1, e.err_d2, e.err_u,
                          e.err_v, e.err_p);
            body += line;
        }
        std::ofstream out(cfg.out_dir + "/accuracy.csv");
        out << body;
    }
    return 0;
}

int cmd_check_energy(const std::string& path, double tol) {
    const std::vector<EnergyReport> log = read_energy_log(path);
    int violations = 0;
    double worst = 0.0;
    for (std::size_t i = 1; i < log.size(); ++i) {
        const MonotoneCheck c = check_monotone(log[i - 1], log[i], tol);
        if (!c.ok) {
            ++violations;
            worst = std::max(worst, c.violation);
            std::printf("violation at step %ld: e_modified rose by %.6e\n", log[i].step,
                        c.violation);
        }
    }
    std::printf("%zu rows, %d violations%s\n", log.size(), violations,
                violations ? "" : " (monotone)");
    if (violations) {
        std::printf("worst violation: %.6e\n", worst);
        return 3;
    }
    return 0;
}

int cmd_info() {
    PhysParams phys;  // defaults
    const double L = hessian_bound(phys.eps);
    const double smin = min_stabilizer(phys.lambda, L);
    std::printf("defaults:\n");
    std::printf("  lambda=%g eta=%g eps=%g tau=%g m1=%g m2=%g mu4=%g h=(%g,%g)\n", phys.lambda,
                phys.eta, phys.eps, phys.tau, phys.m1, phys.m2, phys.mu4, phys.hx_dir,
                phys.hy_dir);
    std::printf("  potential Hessian bound L = 2/eps^2 = %.10g\n", L);
    std::printf("  minimal stabilizer lambda*L/2 = %.10g\n", smin);
    std::printf("presets: accuracy (domain [0,4]x[0,2], Neumann), chevron and shear\n");
    std::printf("  (domain [0,4]x[-1,1], Dirichlet walls, 128x128, dt=1e-3, t_final=0.8)\n");
    std::printf("config keys:\n ");
    int col = 1;
    for (const auto& [k, v] : config_to_map(ExperimentConfig{})) {
        col += int(k.size()) + 1;
        if (col > 78) {
            std::printf("\n ");
            col = int(k.size()) + 2;
        }
        std::printf(" %s", k.c_str());
    }
    std::printf("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smaflow: 2D smectic-A liquid crystal flow simulator"};
    app.require_subcommand(1);

    CommonFlags run_f, acc_f, chev_f, shear_f;
    CLI::App* run_cmd = app.add_subcommand("run", "run a custom configuration");
    add_common(run_cmd, run_f);
    CLI::App* acc_cmd = app.add_subcommand("accuracy", "temporal convergence study");
    add_common(acc_cmd, acc_f);
    std::vector<double> dt_list{8e-3, 4e-3, 2e-3, 1e-3, 5e-4};
    double dt_benchmark = 1e-4;
    acc_cmd->add_option("--dt-list", dt_list, "time steps to test");
    acc_cmd->add_option("--dt-benchmark", dt_benchmark, "benchmark time step");
    CLI::App* chev_cmd = app.add_subcommand("chevron", "magnetic chevron instability (no flow)");
    add_common(chev_cmd, chev_f);
    CLI::App* shear_cmd = app.add_subcommand("shear", "chevron under wall-driven shear");
    add_common(shear_cmd, shear_f);

    std::string log_path;
    double check_tol = 1e-8;
    CLI::App* check_cmd = app.add_subcommand("check-energy", "re-verify an energy log");
    check_cmd->add_option("log", log_path, "energy CSV path")->required();
    check_cmd->add_option("--tol", check_tol, "relative tolerance");

    app.add_subcommand("info", "print defaults, the Hessian bound L and lambda*L/2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // 0 is --help; anything else is a usage error
    }

    try {
        if (run_cmd->parsed()) return run_and_summarize(build_config(Preset::Custom, run_f));
        if (acc_cmd->parsed()) return cmd_accuracy(acc_f, dt_list, dt_benchmark);
        if (chev_cmd->parsed()) return run_and_summarize(build_config(Preset::Chevron, chev_f));
        if (shear_cmd->parsed()) return run_and_summarize(build_config(Preset::Shear, shear_f));
        if (check_cmd->parsed()) return cmd_check_energy(log_path, check_tol);
        return cmd_info();
    } catch (const EnergyViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const SolveError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
