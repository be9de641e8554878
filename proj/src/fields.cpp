#include "smaflow/fields.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace smaflow {

Grid make_grid(int nx, int ny, double lx, double y0, double y1) {
    if (nx < 4 || nx % 2 != 0)
        throw std::invalid_argument("make_grid: nx must be even and >= 4, got " +
                                    std::to_string(nx));
    if (ny < 3)
        throw std::invalid_argument("make_grid: ny must be >= 3, got " + std::to_string(ny));
    if (!(lx > 0.0))
        throw std::invalid_argument("make_grid: lx must be positive");
    if (!(y1 > y0))
        throw std::invalid_argument("make_grid: need y1 > y0");
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.y0 = y0;
    g.y1 = y1;
    g.hx = lx / nx;
    g.hy = (y1 - y0) / (ny - 1);
    return g;
}

void ScalarField::apply_bc() {
    if (bc.kind != BcY::Dirichlet) return;
    for (int ix = 0; ix < grid.nx; ++ix) {
        at(ix, 0) = bc.lo;
        at(ix, grid.ny - 1) = bc.hi;
    }
}

bool ScalarField::all_finite() const {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void ScalarField::sample(const std::function<double(double, double)>& f) {
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
            at(ix, iy) = f(grid.x(ix), grid.y(iy));
}

void PhysParams::validate() const {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0))
            throw std::invalid_argument(std::string("PhysParams: ") + name +
                                        " must be strictly positive");
    };
    positive(lambda, "lambda");
    positive(eta, "eta");
    positive(eps, "eps");
    positive(m1, "m1");
    positive(m2, "m2");
    positive(mu4, "mu4");
    if (tau < 0.0) throw std::invalid_argument("PhysParams: tau must be >= 0");
    const double n = std::sqrt(hx_dir * hx_dir + hy_dir * hy_dir);
    if (std::abs(n - 1.0) > 1e-14)
        throw std::invalid_argument("PhysParams: magnetic direction h must be a unit vector");
}

void State::validate() const {
    const Grid& g = phi.grid;
    if (!(u.x.grid == g && u.y.grid == g && p.grid == g && d.x.grid == g && d.y.grid == g))
        throw std::invalid_argument("State: all fields must share one grid");
}

ScalarField zero_mean_noise(const Grid& grid, double amplitude, std::uint64_t seed,
                            bool interior_only) {
    ScalarField f(grid);
    if (amplitude < 0.0)
        throw std::invalid_argument("zero_mean_noise: amplitude must be >= 0");
    if (amplitude == 0.0) return f;

    std::mt19937_64 rng(seed);
    auto draw = [&rng]() {
        // top 53 bits -> [0,1), then map to [-1,1); keeps the stream portable
        const double u = double(rng() >> 11) * 0x1.0p-53;
        return 2.0 * u - 1.0;
    };

    const int jlo = interior_only ? 1 : 0;
    const int jhi = interior_only ? grid.ny - 1 : grid.ny;
    double sum = 0.0;
    std::size_t count = 0;
    for (int iy = jlo; iy < jhi; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double val = amplitude * draw();
            f.at(ix, iy) = val;
            sum += val;
            ++count;
        }
    const double mean = sum / double(count);
    for (int iy = jlo; iy < jhi; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) f.at(ix, iy) -= mean;
    return f;
}

}  // namespace smaflow
