#pragma once

// Preset scenarios and harnesses: the temporal accuracy study, the magnetic
// chevron instability and the sheared chevron, plus the pattern metrics used
// to grade them.

#include <cstdint>
#include <string>
#include <vector>

#include "smaflow/scheme.hpp"

namespace smaflow {

enum class Preset { Custom, Accuracy, Chevron, Shear };

std::string preset_name(Preset p);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnergyViolation : std::runtime_error {
    EnergyViolation(long step, double excess)
        : std::runtime_error("energy monotonicity violated at step " + std::to_string(step) +
                             " by " + std::to_string(excess)),
          step(step), excess(excess) {}
    long step;
    double excess;
};

struct ExperimentConfig {
    Preset preset = Preset::Custom;
    int nx = 128, ny = 128;
    double lx = 4.0, y0 = -1.0, y1 = 1.0;
    PhysParams phys;
    SchemeParams scheme;
    double t_final = 0.8;
    std::uint64_t seed = 42;
    double noise_amp = 1e-3;
    std::vector<double> snapshot_times;
    int snapshot_every = 0;       // additional cadence in steps, 0 = off
    std::vector<double> profile_times;
    double profile_x = 2.0;       // x location of the extracted velocity profile
    std::string out_dir;          // empty disables file output
    bool no_flow = false;
    bool strict_energy = false;   // promote energy violations to errors
    bool allow_unstable = false;  // accept a stabilizer below lambda*L/2
    bool csv_snapshots = false;
    bool use_quartic_well = false;
    double energy_tol = 1e-8;

    // Resolves stab_s (non-positive means "minimum stable value"), validates
    // parameters and the stabilizer bound. Throws ConfigError.
    void finalize();
};

// Canned experiment setups with their exact defaults baked in.
ExperimentConfig preset_accuracy();
ExperimentConfig preset_chevron(std::uint64_t seed);
ExperimentConfig preset_shear(std::uint64_t seed);

State initial_state(const ExperimentConfig& cfg, const Grid& g);

struct PatternMetrics {
    double time = 0.0;
    double max_abs_d1 = 0.0;
    int undulations = 0;      // sign changes of d1 along the row nearest y = 0
    double max_phi_dev = 0.0; // max |phi - y|
};

struct RunStats {
    long steps = 0;
    long layer_iters = 0, director_iters = 0, velocity_iters = 0;
    int layer_max = 0, director_max = 0, velocity_max = 0;
};

struct RunResult {
    std::vector<EnergyReport> energy;  // initial state plus one row per step
    int violations = 0;
    double worst_violation = 0.0;
    double max_div_rel = 0.0;
    std::vector<State> snapshots;
    std::vector<PatternMetrics> metrics;  // one per snapshot
    std::vector<std::pair<double, std::vector<double>>> profiles;  // (t, u(x=profile_x, .))
    State final_state;
    RunStats stats;
    double wall_seconds = 0.0;
};

// Integrates the configured problem to t_final, logging energy every step,
// storing snapshots at the configured times and writing files when out_dir
// is set. Deterministic for a fixed (config, seed).
RunResult run_simulation(const ExperimentConfig& cfg);

inline RunResult run_chevron(const ExperimentConfig& cfg) { return run_simulation(cfg); }
inline RunResult run_shear(const ExperimentConfig& cfg) { return run_simulation(cfg); }

struct ConvergenceEntry {
    double dt_requested = 0.0;
    double dt_actual = 0.0;  // snapped to an exact divisor of t_final
    double err_phi = 0.0, err_d1 = 0.0, err_d2 = 0.0, err_u = 0.0, err_v = 0.0, err_p = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceEntry> entries;
    double slope_phi = 0.0, slope_d1 = 0.0, slope_d2 = 0.0;
    double slope_u = 0.0, slope_v = 0.0, slope_p = 0.0;
    bool monotone = true;  // every error column decreases with dt
};

// Runs the benchmark once, then each dt, and compares the final states in
// the L2 norm. dt values that do not divide t_final are snapped up to the
// nearest exact divisor and reported via dt_actual.
ConvergenceTable run_accuracy(const ExperimentConfig& cfg, const std::vector<double>& dt_list,
                              double dt_benchmark);

// least-squares slope of log(err) against log(dt)
double fit_loglog_slope(const std::vector<double>& dts, const std::vector<double>& errs);

// ---- pattern metrics --------------------------------------------------------
double max_abs(const ScalarField& f);
int undulation_count(const ScalarField& d1);
double max_phi_deviation(const ScalarField& phi);  // against the linear profile phi = y
// best mirror correlation of phi - <phi>_x over all reflection axes; 1 means
// perfectly left-right symmetric
double mirror_symmetry_score(const OperatorContext& ctx, const ScalarField& phi);
std::vector<double> column_profile(const ScalarField& f, double x_loc);
PatternMetrics pattern_metrics(const State& s);

}  // namespace smaflow
