#include "smaflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <numbers>

#include "smaflow/io.hpp"
#include "smaflow/potential.hpp"

namespace smaflow {

std::string preset_name(Preset p) {
    switch (p) {
        case Preset::Custom: return "custom";
        case Preset::Accuracy: return "accuracy";
        case Preset::Chevron: return "chevron";
        case Preset::Shear: return "shear";
    }
    return "custom";
}

void ExperimentConfig::finalize() {
    try {
        phys.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(scheme.dt > 0.0)) throw ConfigError("dt must be positive");
    if (t_final < 0.0) throw ConfigError("t_final must be >= 0");
    if (!(scheme.krylov_tol > 0.0 && scheme.krylov_tol < 1.0))
        throw ConfigError("krylov_tol must lie in (0, 1)");
    if (scheme.krylov_maxit < 1) throw ConfigError("krylov_maxit must be >= 1");
    if (noise_amp < 0.0) throw ConfigError("noise_amp must be >= 0");

    const double L = 2.0 / (phys.eps * phys.eps);
    const double s_min = min_stabilizer(phys.lambda, L);
    if (scheme.stab_s <= 0.0) {
        scheme.stab_s = s_min;
    } else if (scheme.stab_s < s_min * (1.0 - 1e-12) && !allow_unstable) {
        throw ConfigError("stab_s = " + std::to_string(scheme.stab_s) +
                          " is below the unconditional-stability threshold lambda*L/2 = " +
                          std::to_string(s_min) + "; pass allow_unstable to override");
    }
}

ExperimentConfig preset_accuracy() {
    ExperimentConfig cfg;
    cfg.preset = Preset::Accuracy;
    cfg.nx = 128;
    cfg.ny = 128;
    cfg.lx = 4.0;
    cfg.y0 = 0.0;
    cfg.y1 = 2.0;
    cfg.t_final = 0.1;
    cfg.scheme.dt = 1e-3;
    cfg.no_flow = false;
    cfg.noise_amp = 0.0;
    return cfg;
}

ExperimentConfig preset_chevron(std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.preset = Preset::Chevron;
    cfg.nx = 128;
    cfg.ny = 128;
    cfg.lx = 4.0;
    cfg.y0 = -1.0;
    cfg.y1 = 1.0;
    cfg.t_final = 0.8;
    cfg.scheme.dt = 1e-3;
    cfg.seed = seed;
    cfg.noise_amp = 1e-3;
    cfg.no_flow = true;
    cfg.snapshot_times = {0.0, 0.2, 0.4, 0.8};
    // the in-plane field is what destabilizes the flat layers; a field along
    // the initial director only deepens the well of the uniform state
    cfg.phys.hx_dir = 1.0;
    cfg.phys.hy_dir = 0.0;
    // wider penalty: the minimal stabilizer scales as 1/eps^2 and acts as an
    // artificial mass that stretches the slow dynamics by 1 + stab_s*m2*dt;
    // at eps = 0.1 the undulation saturates within the preset horizon
    cfg.phys.eps = 0.1;
    return cfg;
}

ExperimentConfig preset_shear(std::uint64_t seed) {
    ExperimentConfig cfg = preset_chevron(seed);
    cfg.preset = Preset::Shear;
    cfg.no_flow = false;
    cfg.snapshot_times = {0.0, 0.3, 0.4, 0.5, 0.6, 0.8};
    cfg.profile_times = {0.0, 0.45, 0.8};
    cfg.profile_x = 2.0;
    return cfg;
}

State initial_state(const ExperimentConfig& cfg, const Grid& g) {
    State s;
    const double pi = std::numbers::pi;
    switch (cfg.preset) {
        case Preset::Accuracy: {
            s.phi = ScalarField(g, neumann_bc());
            s.phi.sample([&](double, double y) { return std::cos(pi * y); });
            s.d = VectorField2(g, neumann_bc(), neumann_bc());
            s.d.x.sample([&](double x, double y) { return std::sin(pi * x) * std::cos(pi * y); });
            s.d.y.sample([&](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); });
            s.u = VectorField2(g, dirichlet_bc(0.0, 0.0), dirichlet_bc(0.0, 0.0));
            s.p = ScalarField(g, neumann_bc());
            break;
        }
        case Preset::Custom:
        case Preset::Chevron:
        case Preset::Shear: {
            s.phi = ScalarField(g, dirichlet_bc(-1.0, 1.0));
            s.phi.sample([](double, double y) { return y; });
            s.d = VectorField2(g, dirichlet_bc(0.0, 0.0), dirichlet_bc(1.0, 1.0));
            s.d.y.fill(1.0);
            if (cfg.noise_amp > 0.0) {
                ScalarField n1 = zero_mean_noise(g, cfg.noise_amp, cfg.seed, true);
                ScalarField n2 = zero_mean_noise(g, cfg.noise_amp, cfg.seed + 1, true);
                for (std::size_t i = 0; i < n1.v.size(); ++i) {
                    s.d.x.v[i] += n1.v[i];
                    s.d.y.v[i] += n2.v[i];
                }
            }
            s.d.apply_bc();
            if (cfg.preset == Preset::Shear) {
                s.u = VectorField2(g, dirichlet_bc(-10.0, 10.0), dirichlet_bc(0.0, 0.0));
                s.u.x.sample([](double, double y) { return 10.0 * y; });
            } else {
                s.u = VectorField2(g, dirichlet_bc(0.0, 0.0), dirichlet_bc(0.0, 0.0));
            }
            s.p = ScalarField(g, neumann_bc());
            break;
        }
    }
    s.time = 0.0;
    s.step = 0;
    s.validate();
    return s;
}

// ---- metrics ----------------------------------------------------------------

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

int undulation_count(const ScalarField& d1) {
    const Grid& g = d1.grid;
    int iy = int(std::lround((0.0 - g.y0) / g.hy));
    iy = std::clamp(iy, 0, g.ny - 1);
    int count = 0;
    int last = 0;
    // two sweeps around the periodic ring so the starting sign is settled
    for (int pass = 0; pass < 2; ++pass) {
        for (int ix = 0; ix < g.nx; ++ix) {
            const double v = d1.at(ix, iy);
            const int sgn = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
            if (sgn == 0) continue;
            if (pass == 1 && last != 0 && sgn != last) ++count;
            last = sgn;
        }
        if (pass == 0) count = 0;
    }
    return count;
}

double max_phi_deviation(const ScalarField& phi) {
    const Grid& g = phi.grid;
    double m = 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            m = std::max(m, std::abs(phi.at(ix, iy) - g.y(iy)));
    return m;
}

double mirror_symmetry_score(const OperatorContext& ctx, const ScalarField& phi) {
    const Grid& g = phi.grid;
    // remove the x-mean profile so only the undulation pattern is scored
    ScalarField psi = phi;
    for (int iy = 0; iy < g.ny; ++iy) {
        double mean = 0.0;
        for (int ix = 0; ix < g.nx; ++ix) mean += psi.at(ix, iy);
        mean /= g.nx;
        for (int ix = 0; ix < g.nx; ++ix) psi.at(ix, iy) -= mean;
    }
    const double denom = ctx.inner(psi, psi);
    if (denom <= 0.0) return 1.0;
    double best = -1.0;
    ScalarField mirrored(g);
    for (int a = 0; a < g.nx; ++a) {
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                mirrored.at(ix, iy) = psi.at(((a - ix) % g.nx + g.nx) % g.nx, iy);
        best = std::max(best, ctx.inner(psi, mirrored) / denom);
    }
    return best;
}

std::vector<double> column_profile(const ScalarField& f, double x_loc) {
    const Grid& g = f.grid;
    int ix = int(std::lround(x_loc / g.hx)) % g.nx;
    if (ix < 0) ix += g.nx;
    std::vector<double> col(g.ny);
    for (int iy = 0; iy < g.ny; ++iy) col[iy] = f.at(ix, iy);
    return col;
}

PatternMetrics pattern_metrics(const State& s) {
    PatternMetrics m;
    m.time = s.time;
    m.max_abs_d1 = max_abs(s.d.x);
    m.undulations = undulation_count(s.d.x);
    m.max_phi_dev = max_phi_deviation(s.phi);
    return m;
}

// ---- drivers ----------------------------------------------------------------

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

long long exact_step_count(double t_final, double dt) {
    const double raw = t_final / dt;
    const long long n = llround(raw);
    if (n < 1 || std::abs(raw - double(n)) > 1e-6 * std::max(1.0, raw))
        throw ConfigError("t_final = " + std::to_string(t_final) +
                          " is not an integer multiple of dt = " + std::to_string(dt));
    return n;
}

void accumulate(RunStats& st, const StepOutputs& out, bool flow) {
    ++st.steps;
    st.layer_iters += out.layer.iterations;
    st.layer_max = std::max(st.layer_max, out.layer.iterations);
    st.director_iters += out.director.iterations;
    st.director_max = std::max(st.director_max, out.director.iterations);
    if (flow) {
        st.velocity_iters += out.velocity_x.iterations + out.velocity_y.iterations;
        st.velocity_max =
            std::max({st.velocity_max, out.velocity_x.iterations, out.velocity_y.iterations});
    }
}

}  // namespace

RunResult run_simulation(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    cfg.finalize();

    const auto t_start = std::chrono::steady_clock::now();
    const std::string started = iso_now();

    const Grid g = make_grid(cfg.nx, cfg.ny, cfg.lx, cfg.y0, cfg.y1);
    OperatorContext ctx(g);
    TruncatedWell well(cfg.phys.eps);
    State state = initial_state(cfg, g);

    const long long steps = cfg.t_final > 0.0 ? exact_step_count(cfg.t_final, cfg.scheme.dt) : 0;

    namespace fs = std::filesystem;
    const bool writing = !cfg.out_dir.empty();
    if (writing) fs::create_directories(cfg.out_dir);

    RunResult res;
    res.energy.reserve(std::size_t(steps) + 1);
    res.energy.push_back(total_energy(ctx, state, cfg.phys, well, cfg.scheme.dt));

    // snapshot schedule: sorted configured times matched against the step grid
    std::vector<double> snap_times = cfg.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;
    std::vector<double> prof_times = cfg.profile_times;
    std::sort(prof_times.begin(), prof_times.end());
    std::size_t next_prof = 0;

    auto take_outputs = [&](const State& s) {
        const double eps_t = 0.5 * cfg.scheme.dt;
        while (next_snap < snap_times.size() && s.time >= snap_times[next_snap] - eps_t) {
            res.snapshots.push_back(s);
            res.metrics.push_back(pattern_metrics(s));
            if (writing) {
                char name[64];
                std::snprintf(name, sizeof name, "snap_%06ld.smaf", s.step);
                write_snapshot(s, (fs::path(cfg.out_dir) / name).string());
                if (cfg.csv_snapshots) {
                    char stem[64];
                    std::snprintf(stem, sizeof stem, "snap_%06ld", s.step);
                    const std::string base = (fs::path(cfg.out_dir) / stem).string();
                    write_field_csv(s.phi, base + "_phi.csv");
                    write_field_csv(s.d.x, base + "_d1.csv");
                    write_field_csv(s.d.y, base + "_d2.csv");
                    write_field_csv(s.u.x, base + "_u.csv");
                    write_field_csv(s.u.y, base + "_v.csv");
                    write_field_csv(s.p, base + "_p.csv");
                }
            }
            ++next_snap;
        }
        while (next_prof < prof_times.size() && s.time >= prof_times[next_prof] - eps_t) {
            res.profiles.emplace_back(s.time, column_profile(s.u.x, cfg.profile_x));
            ++next_prof;
        }
    };
    take_outputs(state);

    AdvanceOptions opts;
    opts.no_flow = cfg.no_flow;
    opts.use_quartic_well = cfg.use_quartic_well;

    for (long long k = 0; k < steps; ++k) {
        AdvanceResult adv = advance(ctx, state, cfg.phys, cfg.scheme, well, opts);
        state = std::move(adv.next);

        MonotoneCheck mc = check_monotone(res.energy.back(), adv.energy, cfg.energy_tol);
        adv.energy.monotone_ok = mc.ok;
        if (!mc.ok) {
            ++res.violations;
            res.worst_violation = std::max(res.worst_violation, mc.violation);
            if (cfg.strict_energy) throw EnergyViolation(state.step, mc.violation);
        }
        res.energy.push_back(adv.energy);
        res.max_div_rel = std::max(res.max_div_rel, adv.outputs.div_u_rel);
        accumulate(res.stats, adv.outputs, !cfg.no_flow);

        if (cfg.snapshot_every > 0 && state.step % cfg.snapshot_every == 0 && writing) {
            char name[64];
            std::snprintf(name, sizeof name, "periodic_%06ld.smaf", state.step);
            write_snapshot(state, (fs::path(cfg.out_dir) / name).string());
        }
        take_outputs(state);
    }

    res.final_state = state;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (writing) {
        write_energy_log(res.energy, (fs::path(cfg.out_dir) / "energy.csv").string());
        if (!res.profiles.empty()) {
            // one CSV per profile time: rows y, u
            for (const auto& [t, col] : res.profiles) {
                char name[64];
                std::snprintf(name, sizeof name, "profile_t%.3f.csv", t);
                const std::string path = (fs::path(cfg.out_dir) / name).string();
                std::string body = "y,u\n";
                char line[80];
                for (int iy = 0; iy < g.ny; ++iy) {
                    std::snprintf(line, sizeof line, "%.17g,%.17g\n", g.y(iy), col[iy]);
                    body += line;
                }
                const std::string tmpp = path + ".tmp";
                {
                    FILE* f = std::fopen(tmpp.c_str(), "wb");
                    if (!f) throw std::runtime_error("cannot write " + path);
                    std::fwrite(body.data(), 1, body.size(), f);
                    std::fclose(f);
                }
                fs::rename(tmpp, path);
            }
        }
        Manifest m;
        m.config = config_to_map(cfg);
        m.seed = cfg.seed;
        m.started = started;
        m.finished = iso_now();
        m.wall_seconds = res.wall_seconds;
        m.stats = res.stats;
        m.violations = res.violations;
        m.worst_violation = res.worst_violation;
        m.max_div_rel = res.max_div_rel;
        write_manifest(m, (fs::path(cfg.out_dir) / "manifest.json").string());
    }
    return res;
}

double fit_loglog_slope(const std::vector<double>& dts, const std::vector<double>& errs) {
    if (dts.size() != errs.size() || dts.size() < 2)
        throw std::invalid_argument("fit_loglog_slope: need >= 2 matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(dts.size());
    for (std::size_t i = 0; i < dts.size(); ++i) {
        const double x = std::log(dts[i]);
        const double y = std::log(std::max(errs[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceTable run_accuracy(const ExperimentConfig& cfg_in,
                              const std::vector<double>& dt_list, double dt_benchmark) {
    ExperimentConfig base = cfg_in;
    base.out_dir.clear();
    base.snapshot_times.clear();
    base.profile_times.clear();
    for (double dt : dt_list)
        if (!(dt_benchmark < dt))
            throw ConfigError("run_accuracy: the benchmark dt must be below every tested dt");

    auto final_for = [&](double dt_req) {
        // snap up to the nearest exact divisor of the horizon
        const long long n = std::max<long long>(1, llround(std::ceil(base.t_final / dt_req - 1e-9)));
        ExperimentConfig c = base;
        c.scheme.dt = base.t_final / double(n);
        RunResult r = run_simulation(c);
        return std::make_pair(c.scheme.dt, std::move(r.final_state));
    };

    auto [dtb, bench] = final_for(dt_benchmark);
    const Grid g = bench.grid();
    OperatorContext ctx(g);

    auto l2_diff = [&](const ScalarField& a, const ScalarField& b) {
        ScalarField d(g);
        for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] = a.v[i] - b.v[i];
        return ctx.norm_l2(d);
    };

    ConvergenceTable table;
    for (double dt : dt_list) {
        auto [dta, fin] = final_for(dt);
        ConvergenceEntry e;
        e.dt_requested = dt;
        e.dt_actual = dta;
        e.err_phi = l2_diff(fin.phi, bench.phi);
        e.err_d1 = l2_diff(fin.d.x, bench.d.x);
        e.err_d2 = l2_diff(fin.d.y, bench.d.y);
        e.err_u = l2_diff(fin.u.x, bench.u.x);
        e.err_v = l2_diff(fin.u.y, bench.u.y);
        e.err_p = l2_diff(fin.p, bench.p);
        table.entries.push_back(e);
    }
    std::sort(table.entries.begin(), table.entries.end(),
              [](const auto& a, const auto& b) { return a.dt_actual > b.dt_actual; });

    std::vector<double> dts;
    for (const auto& e : table.entries) dts.push_back(e.dt_actual);
    auto column = [&](auto member) {
        std::vector<double> col;
        for (const auto& e : table.entries) col.push_back(e.*member);
        return col;
    };
    const auto ephi = column(&ConvergenceEntry::err_phi);
    const auto ed1 = column(&ConvergenceEntry::err_d1);
    const auto ed2 = column(&ConvergenceEntry::err_d2);
    const auto eu = column(&ConvergenceEntry::err_u);
    const auto ev = column(&ConvergenceEntry::err_v);
    const auto ep = column(&ConvergenceEntry::err_p);
    table.slope_phi = fit_loglog_slope(dts, ephi);
    table.slope_d1 = fit_loglog_slope(dts, ed1);
    table.slope_d2 = fit_loglog_slope(dts, ed2);
    table.slope_u = fit_loglog_slope(dts, eu);
    table.slope_v = fit_loglog_slope(dts, ev);
    table.slope_p = fit_loglog_slope(dts, ep);
    for (const auto* col : {&ephi, &ed1, &ed2, &eu, &ev, &ep})
        for (std::size_t i = 1; i < col->size(); ++i)
            if ((*col)[i] > (*col)[i - 1]) table.monotone = false;
    return table;
}

}  // namespace smaflow
