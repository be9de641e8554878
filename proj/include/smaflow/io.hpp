#pragma once

// File formats: flat key=value config text, the energy CSV log, the SMAF0001
// binary snapshot, per-field CSV exports and the JSON run manifest. All
// writes go through a temp file plus rename.

#include <map>
#include <string>
#include <vector>

#include "smaflow/energy.hpp"
#include "smaflow/experiments.hpp"

namespace smaflow {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSnapshotMagic = "SMAF0001";

// "#" starts a comment; blank lines ignored; everything else is key = value.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies key=value settings on top of cfg. Unknown keys, type mismatches
// and constraint violations throw ConfigError naming the key.
void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv);

// Resolved config as a flat key=value map (echoed into the manifest and
// reusable as a config file).
std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg);

void write_config_file(const std::map<std::string, std::string>& kv, const std::string& path);

// CSV with 17 significant digits, one row per report; lossless round trip.
void write_energy_log(const std::vector<EnergyReport>& reports, const std::string& path);
std::vector<EnergyReport> read_energy_log(const std::string& path);

// Self-describing binary snapshot: magic "SMAF0001", little-endian int64
// nx, ny, binary64 lx, y0, y1, time, then binary64 arrays phi, d1, d2, u, v,
// p, each stored as ny consecutive y-rows of nx values.
void write_snapshot(const State& state, const std::string& path);
State read_snapshot(const std::string& path);

// plain-text export for external plotting: ny rows of nx comma-separated values
void write_field_csv(const ScalarField& f, const std::string& path);

struct Manifest {
    std::string version = kVersion;
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::string started;   // ISO 8601 UTC
    std::string finished;
    double wall_seconds = 0.0;
    RunStats stats;
    int violations = 0;
    double worst_violation = 0.0;
    double max_div_rel = 0.0;
};

void write_manifest(const Manifest& m, const std::string& path);
Manifest read_manifest(const std::string& path);

}  // namespace smaflow
