#pragma once

// Grid, field storage, parameter bundles and seeded perturbations for the
// smectic-A flow solver. Fields are plain value objects on a uniform tensor
// grid, periodic in x and wall-bounded in y.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace smaflow {

using Vec2 = std::array<double, 2>;

struct Grid {
    int nx = 0;            // x samples (periodic direction, even, >= 4)
    int ny = 0;            // y samples including both wall rows (>= 3)
    double lx = 0.0;       // x period length
    double y0 = 0.0;       // lower wall
    double y1 = 0.0;       // upper wall
    double hx = 0.0;       // lx / nx
    double hy = 0.0;       // (y1 - y0) / (ny - 1)

    double ly() const { return y1 - y0; }
    double x(int ix) const { return ix * hx; }
    double y(int iy) const { return y0 + iy * hy; }
    double area() const { return lx * ly(); }
    std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
    // trapezoidal quadrature weight of a y row
    double wy(int iy) const { return (iy == 0 || iy == ny - 1) ? 0.5 * hy : hy; }
    bool operator==(const Grid&) const = default;
};

// Throws std::invalid_argument on odd nx, undersized grids or degenerate extents.
Grid make_grid(int nx, int ny, double lx, double y0, double y1);

// x is always periodic; the tag selects the wall treatment in y.
enum class BcY { Neumann, Dirichlet };

struct ScalarBc {
    BcY kind = BcY::Neumann;
    double lo = 0.0;  // prescribed value at y0 (Dirichlet only)
    double hi = 0.0;  // prescribed value at y1
    bool operator==(const ScalarBc&) const = default;
};

inline ScalarBc neumann_bc() { return {BcY::Neumann, 0.0, 0.0}; }
inline ScalarBc dirichlet_bc(double lo, double hi) { return {BcY::Dirichlet, lo, hi}; }

struct ScalarField {
    Grid grid;
    ScalarBc bc;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, ScalarBc b = {})
        : grid(g), bc(b), v(g.size(), 0.0) {}

    std::size_t idx(int ix, int iy) const { return std::size_t(iy) * grid.nx + ix; }
    double& at(int ix, int iy) { return v[idx(ix, iy)]; }
    double at(int ix, int iy) const { return v[idx(ix, iy)]; }

    // Writes the prescribed Dirichlet values onto the wall rows. Idempotent.
    void apply_bc();
    bool all_finite() const;
    void fill(double c) { v.assign(v.size(), c); }
    // f(x, y) sampled at the nodes
    void sample(const std::function<double(double, double)>& f);
};

struct VectorField2 {
    ScalarField x;  // first component
    ScalarField y;  // second component

    VectorField2() = default;
    VectorField2(const Grid& g, ScalarBc bx = {}, ScalarBc by = {})
        : x(g, bx), y(g, by) {}

    const Grid& grid() const { return x.grid; }
    void apply_bc() { x.apply_bc(); y.apply_bc(); }
    bool all_finite() const { return x.all_finite() && y.all_finite(); }
};

// Model constants. All normalized; see README for the meaning of each knob.
struct PhysParams {
    double lambda = 2.5;   // energy scale
    double eta = 0.02;     // layer thickness ratio
    double eps = 0.02;     // director penalty width
    double tau = 16.0;     // magnetic field strength
    double m1 = 0.08;      // layer mobility
    double m2 = 2.0;       // director mobility
    double mu4 = 1.0;      // viscosity
    double hx_dir = 0.0;   // magnetic direction, unit vector
    double hy_dir = 1.0;

    // Throws std::invalid_argument if a constant is out of range or |h| != 1.
    void validate() const;
};

struct SchemeParams {
    double dt = 1e-3;
    double stab_s = 0.0;        // director stabilizer, must be >= lambda*L/2
    double krylov_tol = 1e-10;  // relative residual target for the inner solves
    int krylov_maxit = 400;
};

struct State {
    VectorField2 u;
    ScalarField p;
    ScalarField phi;
    VectorField2 d;
    double time = 0.0;
    long step = 0;

    // Throws std::invalid_argument if the fields do not share one grid.
    void validate() const;
    const Grid& grid() const { return phi.grid; }
};

// Uniform samples in [-amplitude, amplitude] from mt19937_64, with the
// arithmetic mean subtracted afterwards. Bit-reproducible for a fixed seed.
// With interior_only the wall rows stay exactly zero and the mean is removed
// over the interior rows alone.
ScalarField zero_mean_noise(const Grid& grid, double amplitude, std::uint64_t seed,
                            bool interior_only = false);

}  // namespace smaflow
