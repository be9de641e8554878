#pragma once

// Test-side oracles, independent of the production solve paths: random field
// generators, fixed-point iterations for the coupled layer/director updates
// and a straight-loop energy quadrature.

#include <cmath>
#include <random>

#include "smaflow/discrete_ops.hpp"
#include "smaflow/energy.hpp"
#include "smaflow/fields.hpp"
#include "smaflow/linalg.hpp"
#include "smaflow/potential.hpp"

namespace testutil {

using namespace smaflow;

inline ScalarField random_field(const Grid& g, std::uint64_t seed, double amp = 1.0,
                                ScalarBc bc = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-amp, amp);
    ScalarField f(g, bc);
    for (double& x : f.v) x = dist(rng);
    return f;
}

inline ScalarField random_zero_trace(const Grid& g, std::uint64_t seed, double amp = 1.0) {
    ScalarField f = random_field(g, seed, amp, dirichlet_bc(0.0, 0.0));
    f.apply_bc();
    return f;
}

// max-norm distance between two fields
inline double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

inline double max_diff(const VectorField2& a, const VectorField2& b) {
    return std::max(max_diff(a.x, b.x), max_diff(a.y, b.y));
}

// Solve (alpha - beta lap) x = rhs with the field's wall data by defect
// correction around a lift that already satisfies the walls.
inline ScalarField helmholtz_defect_solve(const OperatorContext& ctx, const ModeSolver& solver,
                                          double alpha, double beta, const ScalarField& rhs,
                                          const ScalarField& lift) {
    const Grid& g = ctx.grid();
    ScalarField residual(g, lift.bc);
    ScalarField lap = ctx.lap_natural(lift);
    for (std::size_t i = 0; i < residual.v.size(); ++i)
        residual.v[i] = rhs.v[i] - (alpha * lift.v[i] - beta * lap.v[i]);
    if (lift.bc.kind == BcY::Dirichlet)
        for (int ix = 0; ix < g.nx; ++ix) {
            residual.at(ix, 0) = 0.0;
            residual.at(ix, g.ny - 1) = 0.0;
        }
    ScalarField corr = solver.solve(residual).x;
    ScalarField out = lift;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += corr.v[i];
    return out;
}

struct PicardLayer {
    ScalarField phi_next, phi_dot;
    VectorField2 u_star;
    int iterations = 0;
    bool converged = false;
};

// Fixed-point iteration on the layer/auxiliary-velocity coupling. Each pass
// treats the convective velocity explicitly and solves one constant
// coefficient Helmholtz problem directly.
inline PicardLayer picard_layer(const OperatorContext& ctx, const State& state,
                                const PhysParams& phys, const SchemeParams& sch,
                                double tol = 1e-12, int maxit = 500) {
    const Grid& g = ctx.grid();
    const double dt = sch.dt;
    const double le = phys.lambda / phys.eta;
    const double alpha = 1.0 / (phys.m1 * dt);

    VectorField2 gphi = ctx.grad(state.phi);
    ScalarField divd = ctx.vdiv(state.d);
    ModeSolver solver(ctx, ModeOp::HelmholtzCompact, state.phi.bc.kind, alpha, le);

    PicardLayer out;
    out.u_star = state.u;
    ScalarField rhs(g, state.phi.bc);
    for (int it = 0; it < maxit; ++it) {
        for (std::size_t i = 0; i < rhs.v.size(); ++i) {
            const double adv =
                out.u_star.x.v[i] * gphi.x.v[i] + out.u_star.y.v[i] * gphi.y.v[i];
            rhs.v[i] = alpha * state.phi.v[i] - adv / phys.m1 - le * divd.v[i];
        }
        out.phi_next = helmholtz_defect_solve(ctx, solver, alpha, le, rhs, state.phi);
        out.phi_dot = ScalarField(g);
        VectorField2 u_new = state.u;
        for (std::size_t i = 0; i < rhs.v.size(); ++i) {
            const double adv =
                out.u_star.x.v[i] * gphi.x.v[i] + out.u_star.y.v[i] * gphi.y.v[i];
            const double pd = (out.phi_next.v[i] - state.phi.v[i]) / dt + adv;
            out.phi_dot.v[i] = pd;
            u_new.x.v[i] = state.u.x.v[i] - dt * pd / phys.m1 * gphi.x.v[i];
            u_new.y.v[i] = state.u.y.v[i] - dt * pd / phys.m1 * gphi.y.v[i];
        }
        const double delta = max_diff(u_new, out.u_star);
        out.u_star = u_new;
        out.iterations = it + 1;
        if (delta <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

struct PicardDirector {
    VectorField2 d_next, d_dot, u_starstar;
    int iterations = 0;
    bool converged = false;
};

inline PicardDirector picard_director(const OperatorContext& ctx, const State& state,
                                      const ScalarField& phi_next, const VectorField2& u_star,
                                      const PhysParams& phys, const SchemeParams& sch,
                                      const TruncatedWell& well, double tol = 1e-12,
                                      int maxit = 500) {
    const Grid& g = ctx.grid();
    const std::size_t n = g.size();
    const double dt = sch.dt;
    const double S = sch.stab_s;
    const double le = phys.lambda / phys.eta;
    const double alpha = S + le + 1.0 / (phys.m2 * dt);

    VectorField2 gd1 = ctx.grad(state.d.x);
    VectorField2 gd2 = ctx.grad(state.d.y);
    VectorField2 gphi_v = ctx.vgrad(phi_next);
    ModeSolver solver(ctx, ModeOp::HelmholtzCompact, state.d.x.bc.kind, alpha,
                      phys.lambda * phys.eta);

    PicardDirector out;
    out.u_starstar = u_star;
    ScalarField rhs1(g, state.d.x.bc), rhs2(g, state.d.y.bc);
    for (int it = 0; it < maxit; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const double conv1 =
                gd1.x.v[i] * out.u_starstar.x.v[i] + gd1.y.v[i] * out.u_starstar.y.v[i];
            const double conv2 =
                gd2.x.v[i] * out.u_starstar.x.v[i] + gd2.y.v[i] * out.u_starstar.y.v[i];
            const double d1 = state.d.x.v[i], d2 = state.d.y.v[i];
            const Vec2 gw = well.gradient({d1, d2});
            const double dh = d1 * phys.hx_dir + d2 * phys.hy_dir;
            rhs1.v[i] = S * d1 + d1 / (phys.m2 * dt) - conv1 / phys.m2 - phys.lambda * gw[0] +
                        le * gphi_v.x.v[i] + phys.lambda * phys.tau * dh * phys.hx_dir;
            rhs2.v[i] = S * d2 + d2 / (phys.m2 * dt) - conv2 / phys.m2 - phys.lambda * gw[1] +
                        le * gphi_v.y.v[i] + phys.lambda * phys.tau * dh * phys.hy_dir;
        }
        VectorField2 d_new(g, state.d.x.bc, state.d.y.bc);
        d_new.x = helmholtz_defect_solve(ctx, solver, alpha, phys.lambda * phys.eta, rhs1,
                                         state.d.x);
        d_new.y = helmholtz_defect_solve(ctx, solver, alpha, phys.lambda * phys.eta, rhs2,
                                         state.d.y);
        VectorField2 dd(g), uss(g, u_star.x.bc, u_star.y.bc);
        for (std::size_t i = 0; i < n; ++i) {
            const double conv1 =
                gd1.x.v[i] * out.u_starstar.x.v[i] + gd1.y.v[i] * out.u_starstar.y.v[i];
            const double conv2 =
                gd2.x.v[i] * out.u_starstar.x.v[i] + gd2.y.v[i] * out.u_starstar.y.v[i];
            dd.x.v[i] = (d_new.x.v[i] - state.d.x.v[i]) / dt + conv1;
            dd.y.v[i] = (d_new.y.v[i] - state.d.y.v[i]) / dt + conv2;
            uss.x.v[i] =
                u_star.x.v[i] - dt / phys.m2 * (gd1.x.v[i] * dd.x.v[i] + gd2.x.v[i] * dd.y.v[i]);
            uss.y.v[i] =
                u_star.y.v[i] - dt / phys.m2 * (gd1.y.v[i] * dd.x.v[i] + gd2.y.v[i] * dd.y.v[i]);
        }
        const double delta = max_diff(uss, out.u_starstar);
        out.d_next = d_new;
        out.d_dot = dd;
        out.u_starstar = uss;
        out.iterations = it + 1;
        if (delta <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

// straight-loop reimplementation of the energy quadrature
inline double independent_total_energy(const State& s, const PhysParams& p,
                                       const TruncatedWell& well) {
    const Grid& g = s.grid();
    const int nx = g.nx, ny = g.ny;
    const double hx = g.hx, hy = g.hy;

    // spectral x derivative via a plain O(n^2) DFT
    auto dx_col = [&](const ScalarField& f, int iy, std::vector<double>& out) {
        const double pi = std::acos(-1.0);
        out.assign(nx, 0.0);
        for (int m = 1; m < nx / 2; ++m) {  // Nyquist annihilated
            const double k = 2.0 * pi * m / g.lx;
            double re = 0.0, im = 0.0;
            for (int ix = 0; ix < nx; ++ix) {
                const double ang = 2.0 * pi * m * ix / nx;
                re += f.at(ix, iy) * std::cos(ang);
                im -= f.at(ix, iy) * std::sin(ang);
            }
            for (int ix = 0; ix < nx; ++ix) {
                const double ang = 2.0 * pi * m * ix / nx;
                out[ix] += 2.0 / nx * k * (-re * std::sin(ang) - im * std::cos(ang));
            }
        }
    };

    double kinetic = 0.0, bulk = 0.0, magnetic = 0.0, compat = 0.0, elastic = 0.0;
    std::vector<double> dxphi(nx), dxd1(nx), dxd2(nx);
    for (int iy = 0; iy < ny; ++iy) {
        const double w = g.wy(iy) * hx;
        dx_col(s.phi, iy, dxphi);
        dx_col(s.d.x, iy, dxd1);
        dx_col(s.d.y, iy, dxd2);
        for (int ix = 0; ix < nx; ++ix) {
            const double u1 = s.u.x.at(ix, iy), u2 = s.u.y.at(ix, iy);
            kinetic += 0.5 * w * (u1 * u1 + u2 * u2);
            const double d1 = s.d.x.at(ix, iy), d2 = s.d.y.at(ix, iy);
            bulk += w * well.value({d1, d2});
            const double dh = d1 * p.hx_dir + d2 * p.hy_dir;
            magnetic += w * dh * dh;
            const double rx = d1 - dxphi[ix];
            compat += w * rx * rx;
            elastic += w * (dxd1[ix] * dxd1[ix] + dxd2[ix] * dxd2[ix]);
        }
    }
    for (int j = 0; j + 1 < ny; ++j)
        for (int ix = 0; ix < nx; ++ix) {
            const double gphi = (s.phi.at(ix, j + 1) - s.phi.at(ix, j)) / hy;
            const double ad2 = 0.5 * (s.d.y.at(ix, j) + s.d.y.at(ix, j + 1));
            const double gd1 = (s.d.x.at(ix, j + 1) - s.d.x.at(ix, j)) / hy;
            const double gd2 = (s.d.y.at(ix, j + 1) - s.d.y.at(ix, j)) / hy;
            const double w = hx * hy;
            compat += w * ((ad2 - gphi) * (ad2 - gphi) + 0.25 * hy * hy * gd2 * gd2);
            elastic += w * (gd1 * gd1 + gd2 * gd2);
        }
    return kinetic + p.lambda * (0.5 * p.eta * elastic + bulk + 0.5 / p.eta * compat -
                                 0.5 * p.tau * magnetic);
}

}  // namespace testutil
