#include "smaflow/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace smaflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void atomic_write(const std::string& path, const std::string& data) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(data.data(), std::streamsize(data.size()));
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    fs::rename(tmp, path);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string join_list(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += fmt17(xs[i]);
    }
    return s;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

void apply_config(ExperimentConfig& cfg, const std::map<std::string, std::string>& kv) {
    // the preset resets every default, so resolve it before the other keys
    if (auto it = kv.find("preset"); it != kv.end()) {
        const std::string& value = it->second;
        if (value == "custom") cfg.preset = Preset::Custom;
        else if (value == "accuracy") cfg = preset_accuracy();
        else if (value == "chevron") cfg = preset_chevron(cfg.seed);
        else if (value == "shear") cfg = preset_shear(cfg.seed);
        else throw ConfigError("config key 'preset': unknown preset '" + value + "'");
    }
    for (const auto& [key, value] : kv) {
        if (key == "preset") {
            continue;
        } else if (key == "nx") cfg.nx = int(parse_int(key, value));
        else if (key == "ny") cfg.ny = int(parse_int(key, value));
        else if (key == "lx") cfg.lx = parse_double(key, value);
        else if (key == "y0") cfg.y0 = parse_double(key, value);
        else if (key == "y1") cfg.y1 = parse_double(key, value);
        else if (key == "lambda") cfg.phys.lambda = parse_double(key, value);
        else if (key == "eta") cfg.phys.eta = parse_double(key, value);
        else if (key == "eps") cfg.phys.eps = parse_double(key, value);
        else if (key == "tau") cfg.phys.tau = parse_double(key, value);
        else if (key == "m1") cfg.phys.m1 = parse_double(key, value);
        else if (key == "m2") cfg.phys.m2 = parse_double(key, value);
        else if (key == "mu4") cfg.phys.mu4 = parse_double(key, value);
        else if (key == "hdir_x") cfg.phys.hx_dir = parse_double(key, value);
        else if (key == "hdir_y") cfg.phys.hy_dir = parse_double(key, value);
        else if (key == "dt") cfg.scheme.dt = parse_double(key, value);
        else if (key == "stab_s") cfg.scheme.stab_s = parse_double(key, value);
        else if (key == "krylov_tol") cfg.scheme.krylov_tol = parse_double(key, value);
        else if (key == "krylov_maxit") cfg.scheme.krylov_maxit = int(parse_int(key, value));
        else if (key == "t_final") cfg.t_final = parse_double(key, value);
        else if (key == "seed") cfg.seed = std::uint64_t(parse_int(key, value));
        else if (key == "noise_amp") cfg.noise_amp = parse_double(key, value);
        else if (key == "snapshot_times") cfg.snapshot_times = parse_list(key, value);
        else if (key == "snapshot_every") cfg.snapshot_every = int(parse_int(key, value));
        else if (key == "profile_times") cfg.profile_times = parse_list(key, value);
        else if (key == "profile_x") cfg.profile_x = parse_double(key, value);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "no_flow") cfg.no_flow = parse_bool(key, value);
        else if (key == "strict_energy") cfg.strict_energy = parse_bool(key, value);
        else if (key == "allow_unstable") cfg.allow_unstable = parse_bool(key, value);
        else if (key == "csv_snapshots") cfg.csv_snapshots = parse_bool(key, value);
        else if (key == "use_quartic_well") cfg.use_quartic_well = parse_bool(key, value);
        else if (key == "energy_tol") cfg.energy_tol = parse_double(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["preset"] = preset_name(cfg.preset);
    kv["nx"] = std::to_string(cfg.nx);
    kv["ny"] = std::to_string(cfg.ny);
    kv["lx"] = fmt17(cfg.lx);
    kv["y0"] = fmt17(cfg.y0);
    kv["y1"] = fmt17(cfg.y1);
    kv["lambda"] = fmt17(cfg.phys.lambda);
    kv["eta"] = fmt17(cfg.phys.eta);
    kv["eps"] = fmt17(cfg.phys.eps);
    kv["tau"] = fmt17(cfg.phys.tau);
    kv["m1"] = fmt17(cfg.phys.m1);
    kv["m2"] = fmt17(cfg.phys.m2);
    kv["mu4"] = fmt17(cfg.phys.mu4);
    kv["hdir_x"] = fmt17(cfg.phys.hx_dir);
    kv["hdir_y"] = fmt17(cfg.phys.hy_dir);
    kv["dt"] = fmt17(cfg.scheme.dt);
    kv["stab_s"] = fmt17(cfg.scheme.stab_s);
    kv["krylov_tol"] = fmt17(cfg.scheme.krylov_tol);
    kv["krylov_maxit"] = std::to_string(cfg.scheme.krylov_maxit);
    kv["t_final"] = fmt17(cfg.t_final);
    kv["seed"] = std::to_string(cfg.seed);
    kv["noise_amp"] = fmt17(cfg.noise_amp);
    kv["snapshot_times"] = join_list(cfg.snapshot_times);
    kv["snapshot_every"] = std::to_string(cfg.snapshot_every);
    kv["profile_times"] = join_list(cfg.profile_times);
    kv["profile_x"] = fmt17(cfg.profile_x);
    kv["out_dir"] = cfg.out_dir;
    kv["no_flow"] = cfg.no_flow ? "true" : "false";
    kv["strict_energy"] = cfg.strict_energy ? "true" : "false";
    kv["allow_unstable"] = cfg.allow_unstable ? "true" : "false";
    kv["csv_snapshots"] = cfg.csv_snapshots ? "true" : "false";
    kv["use_quartic_well"] = cfg.use_quartic_well ? "true" : "false";
    kv["energy_tol"] = fmt17(cfg.energy_tol);
    return kv;
}

void write_config_file(const std::map<std::string, std::string>& kv, const std::string& path) {
    std::string body;
    for (const auto& [k, v] : kv) body += k + " = " + v + "\n";
    atomic_write(path, body);
}

void write_energy_log(const std::vector<EnergyReport>& reports, const std::string& path) {
    std::string body =
        "step,time,e_kinetic,e_elastic,e_bulk,e_compat,e_magnetic,e_total,grad_p_sq,"
        "e_modified,monotone_ok\n";
    char line[512];
    for (const EnergyReport& r : reports) {
        std::snprintf(line, sizeof line,
                      "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.step,
                      r.time, r.e_kinetic, r.e_elastic, r.e_bulk, r.e_compat, r.e_magnetic,
                      r.e_total, r.grad_p_sq, r.e_modified, r.monotone_ok ? 1 : 0);
        body += line;
    }
    atomic_write(path, body);
}

std::vector<EnergyReport> read_energy_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open energy log '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty energy log '" + path + "'");
    std::vector<EnergyReport> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        EnergyReport r;
        int mono = 0;
        const int n = std::sscanf(line.c_str(), "%ld,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d",
                                  &r.step, &r.time, &r.e_kinetic, &r.e_elastic, &r.e_bulk,
                                  &r.e_compat, &r.e_magnetic, &r.e_total, &r.grad_p_sq,
                                  &r.e_modified, &mono);
        if (n != 11) throw std::runtime_error("malformed energy log row: " + line);
        r.monotone_ok = mono != 0;
        out.push_back(r);
    }
    return out;
}

namespace {
void put_i64(std::string& s, std::int64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (std::uint64_t(x) >> (8 * i)) & 0xff;
    s.append(reinterpret_cast<char*>(b), 8);
}
void put_f64(std::string& s, double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    put_i64(s, std::int64_t(u));
}
std::int64_t get_i64(const char* p) {
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::int64_t(u);
}
double get_f64(const char* p) {
    const std::uint64_t u = std::uint64_t(get_i64(p));
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}
}  // namespace

void write_snapshot(const State& state, const std::string& path) {
    const Grid& g = state.grid();
    std::string body;
    body.reserve(56 + 6 * g.size() * 8);
    body.append(kSnapshotMagic, 8);
    put_i64(body, g.nx);
    put_i64(body, g.ny);
    put_f64(body, g.lx);
    put_f64(body, g.y0);
    put_f64(body, g.y1);
    put_f64(body, state.time);
    for (const ScalarField* f :
         {&state.phi, &state.d.x, &state.d.y, &state.u.x, &state.u.y, &state.p})
        for (double x : f->v) put_f64(body, x);
    atomic_write(path, body);
}

State read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 56 || data.compare(0, 8, kSnapshotMagic) != 0)
        throw std::runtime_error("snapshot '" + path + "': bad magic");
    const std::int64_t nx = get_i64(data.data() + 8);
    const std::int64_t ny = get_i64(data.data() + 16);
    const double lx = get_f64(data.data() + 24);
    const double y0 = get_f64(data.data() + 32);
    const double y1 = get_f64(data.data() + 40);
    const double time = get_f64(data.data() + 48);
    const Grid g = make_grid(int(nx), int(ny), lx, y0, y1);
    const std::size_t expect = 56 + 6 * g.size() * 8;
    if (data.size() != expect)
        throw std::runtime_error("snapshot '" + path + "': size mismatch, expected " +
                                 std::to_string(expect) + " bytes, got " +
                                 std::to_string(data.size()));
    State s;
    s.phi = ScalarField(g);
    s.d = VectorField2(g);
    s.u = VectorField2(g);
    s.p = ScalarField(g);
    s.time = time;
    const char* p = data.data() + 56;
    for (ScalarField* f : {&s.phi, &s.d.x, &s.d.y, &s.u.x, &s.u.y, &s.p})
        for (double& x : f->v) {
            x = get_f64(p);
            p += 8;
        }
    return s;
}

void write_field_csv(const ScalarField& f, const std::string& path) {
    std::string body;
    char buf[40];
    for (int iy = 0; iy < f.grid.ny; ++iy) {
        for (int ix = 0; ix < f.grid.nx; ++ix) {
            std::snprintf(buf, sizeof buf, "%.17g", f.at(ix, iy));
            body += buf;
            body += (ix + 1 == f.grid.nx) ? "\n" : ",";
        }
    }
    atomic_write(path, body);
}

void write_manifest(const Manifest& m, const std::string& path) {
    json j;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["config"] = m.config;
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["wall_seconds"] = m.wall_seconds;
    j["steps"] = m.stats.steps;
    j["solver"] = {
        {"layer", {{"iterations", m.stats.layer_iters}, {"max", m.stats.layer_max}}},
        {"director", {{"iterations", m.stats.director_iters}, {"max", m.stats.director_max}}},
        {"velocity", {{"iterations", m.stats.velocity_iters}, {"max", m.stats.velocity_max}}},
    };
    j["violations"] = m.violations;
    j["worst_violation"] = m.worst_violation;
    j["max_div_rel"] = m.max_div_rel;
    atomic_write(path, j.dump(2) + "\n");
}

Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
    json j = json::parse(in);
    Manifest m;
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.stats.steps = j.at("steps").get<long>();
    m.stats.layer_iters = j.at("solver").at("layer").at("iterations").get<long>();
    m.stats.layer_max = j.at("solver").at("layer").at("max").get<int>();
    m.stats.director_iters = j.at("solver").at("director").at("iterations").get<long>();
    m.stats.director_max = j.at("solver").at("director").at("max").get<int>();
    m.stats.velocity_iters = j.at("solver").at("velocity").at("iterations").get<long>();
    m.stats.velocity_max = j.at("solver").at("velocity").at("max").get<int>();
    m.violations = j.at("violations").get<int>();
    m.worst_violation = j.at("worst_violation").get<double>();
    m.max_div_rel = j.at("max_div_rel").get<double>();
    return m;
}

}  // namespace smaflow
