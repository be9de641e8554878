#include "smaflow/scheme.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smaflow {

namespace {

std::vector<double> node_weights(const Grid& g) {
    std::vector<double> w(g.size());
    for (int iy = 0; iy < g.ny; ++iy) {
        const double wy = g.wy(iy) * g.hx;
        for (int ix = 0; ix < g.nx; ++ix) w[std::size_t(iy) * g.nx + ix] = wy;
    }
    return w;
}

InnerProduct weighted_inner(std::vector<double> w, int copies) {
    return [w = std::move(w), copies](const std::vector<double>& a,
                                      const std::vector<double>& b) {
        double s = 0.0;
        const std::size_t n = w.size();
        for (int c = 0; c < copies; ++c) {
            const std::size_t off = std::size_t(c) * n;
            for (std::size_t i = 0; i < n; ++i) s += w[i] * a[off + i] * b[off + i];
        }
        return s;
    };
}

void zero_wall_rows(const Grid& g, std::vector<double>& v, std::size_t offset) {
    for (int ix = 0; ix < g.nx; ++ix) {
        v[offset + ix] = 0.0;
        v[offset + std::size_t(g.ny - 1) * g.nx + ix] = 0.0;
    }
}

void check_converged(const char* where, const SolveReport& rep) {
    if (!rep.converged) throw SolveError(where, rep);
}

}  // namespace

Step1Result step1_layer(const OperatorContext& ctx, const State& state,
                        const PhysParams& phys, const SchemeParams& sch) {
    const Grid& g = state.grid();
    const std::size_t n = g.size();
    const double dt = sch.dt;
    const double le = phys.lambda / phys.eta;
    const double c1 = dt / phys.m1;
    const bool dirichlet = state.phi.bc.kind == BcY::Dirichlet;

    VectorField2 gphi = ctx.grad(state.phi);
    // eliminate the auxiliary velocity: the material derivative becomes
    // a(x) [(phi^{n+1}-phi^n)/dt + u^n . grad phi^n] with a = 1/(1+c|g|^2)
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g2 = gphi.x.v[i] * gphi.x.v[i] + gphi.y.v[i] * gphi.y.v[i];
        a[i] = 1.0 / (1.0 + c1 * g2);
    }
    std::vector<double> u_dot_g(n);
    for (std::size_t i = 0; i < n; ++i)
        u_dot_g[i] = state.u.x.v[i] * gphi.x.v[i] + state.u.y.v[i] * gphi.y.v[i];

    ScalarField divd = ctx.vdiv(state.d);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i)
        rhs[i] = a[i] / (phys.m1 * dt) * state.phi.v[i] - a[i] / phys.m1 * u_dot_g[i] -
                 le * divd.v[i];
    if (dirichlet) zero_wall_rows(g, rhs, 0);

    LinearOperator op;
    op.name = "layer";
    op.symmetric = true;
    op.n = n;
    op.apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        ScalarField f(g, state.phi.bc);
        f.v = in;
        ScalarField lf = ctx.lap_natural(f);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = a[i] / (phys.m1 * dt) * in[i] - le * lf.v[i];
        if (dirichlet) zero_wall_rows(g, out, 0);
    };

    double a_max = 0.0;
    for (double ai : a) a_max = std::max(a_max, ai);
    ModeSolver helm(ctx, ModeOp::HelmholtzCompact, state.phi.bc.kind, a_max / (phys.m1 * dt),
                    le);
    Preconditioner precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        ScalarField f(g, state.phi.bc);
        f.v = in;
        out = helm.solve(f).x.v;
    };

    std::vector<double> x0 = state.phi.v;
    {
        ScalarField tmp(g, state.phi.bc);
        tmp.v = x0;
        tmp.apply_bc();
        x0 = tmp.v;
    }
    auto [sol, rep] =
        pcg_solve(op, rhs, precond, weighted_inner(node_weights(g), 1), sch.krylov_tol,
                  sch.krylov_maxit, &x0);
    check_converged("step1_layer", rep);

    Step1Result out;
    out.phi_next = ScalarField(g, state.phi.bc);
    out.phi_next.v = std::move(sol);
    out.phi_dot = ScalarField(g);
    out.u_star = VectorField2(g, state.u.x.bc, state.u.y.bc);
    for (std::size_t i = 0; i < n; ++i) {
        const double pd = a[i] * ((out.phi_next.v[i] - state.phi.v[i]) / dt + u_dot_g[i]);
        out.phi_dot.v[i] = pd;
        out.u_star.x.v[i] = state.u.x.v[i] - dt * pd / phys.m1 * gphi.x.v[i];
        out.u_star.y.v[i] = state.u.y.v[i] - dt * pd / phys.m1 * gphi.y.v[i];
    }
    out.report = rep;
    return out;
}

Step2Result step2_director(const OperatorContext& ctx, const State& state,
                           const ScalarField& phi_next, const VectorField2& u_star,
                           const PhysParams& phys, const SchemeParams& sch,
                           const TruncatedWell& well, bool use_quartic_well, bool pd_check) {
    const Grid& g = state.grid();
    const std::size_t n = g.size();
    const double dt = sch.dt;
    const double S = sch.stab_s;
    const double le = phys.lambda / phys.eta;
    const double c2 = dt / phys.m2;
    const bool dirichlet = state.d.x.bc.kind == BcY::Dirichlet;

    // director Jacobian, J[i][j] = d(d_i)/d(x_j)
    VectorField2 gd1 = ctx.grad(state.d.x);
    VectorField2 gd2 = ctx.grad(state.d.y);
    const std::vector<double>&j11 = gd1.x.v, &j12 = gd1.y.v, &j21 = gd2.x.v, &j22 = gd2.y.v;

    // B = (I + c2 J J^T)^{-1} pointwise; symmetric positive definite with
    // eigenvalues in (0, 1]
    std::vector<double> b11(n), b12(n), b22(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m11 = 1.0 + c2 * (j11[i] * j11[i] + j12[i] * j12[i]);
        const double m12 = c2 * (j11[i] * j21[i] + j12[i] * j22[i]);
        const double m22 = 1.0 + c2 * (j21[i] * j21[i] + j22[i] * j22[i]);
        const Mat2 inv = mat2_inverse({m11, m12, m12, m22});
        b11[i] = inv[0];
        b12[i] = inv[1];
        b22[i] = inv[3];
    }

    if (pd_check) {
        // eigenvalues of B/dt must stay above the closed-form bound
        // 1/dt - s^2/(m2 + dt s^2) with s the Jacobian spectral norm
        for (std::size_t i = 0; i < n; ++i) {
            const double q11 = j11[i] * j11[i] + j12[i] * j12[i];
            const double q12 = j11[i] * j21[i] + j12[i] * j22[i];
            const double q22 = j21[i] * j21[i] + j22[i] * j22[i];
            const double s2 = 0.5 * (q11 + q22) + std::hypot(0.5 * (q11 - q22), q12);
            const double bound = 1.0 / dt - s2 / (phys.m2 + dt * s2);
            const double bmin =
                0.5 * (b11[i] + b22[i]) - std::hypot(0.5 * (b11[i] - b22[i]), b12[i]);
            if (bmin / dt < bound * (1.0 - 1e-9))
                throw std::logic_error(
                    "step2_director: pointwise matrix lost positive definiteness, eig " +
                    std::to_string(bmin / dt) + " < bound " + std::to_string(bound));
        }
    }

    // J u_star
    std::vector<double> jus1(n), jus2(n);
    for (std::size_t i = 0; i < n; ++i) {
        jus1[i] = j11[i] * u_star.x.v[i] + j12[i] * u_star.y.v[i];
        jus2[i] = j21[i] * u_star.x.v[i] + j22[i] * u_star.y.v[i];
    }

    VectorField2 gphi_v = ctx.vgrad(phi_next);
    QuarticWell quartic(phys.eps);

    std::vector<double> rhs(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = state.d.x.v[i], d2 = state.d.y.v[i];
        const Vec2 gw = use_quartic_well ? quartic.gradient({d1, d2}) : well.gradient({d1, d2});
        const double dh = d1 * phys.hx_dir + d2 * phys.hy_dir;
        const double bd1 = b11[i] * d1 + b12[i] * d2;
        const double bd2 = b12[i] * d1 + b22[i] * d2;
        const double bju1 = b11[i] * jus1[i] + b12[i] * jus2[i];
        const double bju2 = b12[i] * jus1[i] + b22[i] * jus2[i];
        rhs[i] = S * d1 + bd1 / (phys.m2 * dt) - bju1 / phys.m2 - phys.lambda * gw[0] +
                 le * gphi_v.x.v[i] + phys.lambda * phys.tau * dh * phys.hx_dir;
        rhs[n + i] = S * d2 + bd2 / (phys.m2 * dt) - bju2 / phys.m2 - phys.lambda * gw[1] +
                     le * gphi_v.y.v[i] + phys.lambda * phys.tau * dh * phys.hy_dir;
    }
    if (dirichlet) {
        zero_wall_rows(g, rhs, 0);
        zero_wall_rows(g, rhs, n);
    }

    LinearOperator op;
    op.name = "director";
    op.symmetric = true;
    op.n = 2 * n;
    ScalarField scratch1(g, state.d.x.bc), scratch2(g, state.d.y.bc);
    op.apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        std::copy(in.begin(), in.begin() + n, scratch1.v.begin());
        std::copy(in.begin() + n, in.end(), scratch2.v.begin());
        ScalarField l1 = ctx.lap_natural(scratch1);
        ScalarField l2 = ctx.lap_natural(scratch2);
        const double mass = S + le;
        const double lam_eta = phys.lambda * phys.eta;
        for (std::size_t i = 0; i < n; ++i) {
            const double d1 = in[i], d2 = in[n + i];
            out[i] = mass * d1 + (b11[i] * d1 + b12[i] * d2) / (phys.m2 * dt) -
                     lam_eta * l1.v[i];
            out[n + i] = mass * d2 + (b12[i] * d1 + b22[i] * d2) / (phys.m2 * dt) -
                         lam_eta * l2.v[i];
        }
        if (dirichlet) {
            zero_wall_rows(g, out, 0);
            zero_wall_rows(g, out, n);
        }
    };

    ModeSolver helm(ctx, ModeOp::HelmholtzCompact, state.d.x.bc.kind,
                    S + le + 1.0 / (phys.m2 * dt), phys.lambda * phys.eta);
    ScalarField pscratch(g, state.d.x.bc);
    Preconditioner precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        std::copy(in.begin(), in.begin() + n, pscratch.v.begin());
        ScalarField z1 = helm.solve(pscratch).x;
        std::copy(in.begin() + n, in.end(), pscratch.v.begin());
        ScalarField z2 = helm.solve(pscratch).x;
        std::copy(z1.v.begin(), z1.v.end(), out.begin());
        std::copy(z2.v.begin(), z2.v.end(), out.begin() + n);
    };

    std::vector<double> x0(2 * n);
    {
        VectorField2 d0 = state.d;
        d0.apply_bc();
        std::copy(d0.x.v.begin(), d0.x.v.end(), x0.begin());
        std::copy(d0.y.v.begin(), d0.y.v.end(), x0.begin() + n);
    }
    auto [sol, rep] =
        pcg_solve(op, rhs, precond, weighted_inner(node_weights(g), 2), sch.krylov_tol,
                  sch.krylov_maxit, &x0);
    check_converged("step2_director", rep);

    Step2Result out;
    out.d_next = VectorField2(g, state.d.x.bc, state.d.y.bc);
    std::copy(sol.begin(), sol.begin() + n, out.d_next.x.v.begin());
    std::copy(sol.begin() + n, sol.end(), out.d_next.y.v.begin());
    out.d_dot = VectorField2(g);
    out.u_starstar = VectorField2(g, u_star.x.bc, u_star.y.bc);
    for (std::size_t i = 0; i < n; ++i) {
        const double r1 = (out.d_next.x.v[i] - state.d.x.v[i]) / dt + jus1[i];
        const double r2 = (out.d_next.y.v[i] - state.d.y.v[i]) / dt + jus2[i];
        const double dd1 = b11[i] * r1 + b12[i] * r2;
        const double dd2 = b12[i] * r1 + b22[i] * r2;
        out.d_dot.x.v[i] = dd1;
        out.d_dot.y.v[i] = dd2;
        out.u_starstar.x.v[i] =
            u_star.x.v[i] - dt / phys.m2 * (j11[i] * dd1 + j21[i] * dd2);
        out.u_starstar.y.v[i] =
            u_star.y.v[i] - dt / phys.m2 * (j12[i] * dd1 + j22[i] * dd2);
    }
    out.report = rep;
    return out;
}

Step3Result step3_velocity(const OperatorContext& ctx, const State& state,
                           const ScalarField& phi_dot, const VectorField2& d_dot,
                           const PhysParams& phys, const SchemeParams& sch) {
    const Grid& g = state.grid();
    const std::size_t n = g.size();
    const double dt = sch.dt;

    VectorField2 gphi = ctx.grad(state.phi);
    VectorField2 gd1 = ctx.grad(state.d.x);
    VectorField2 gd2 = ctx.grad(state.d.y);
    VectorField2 gp = ctx.vgrad(state.p);

    // elastic forces: (phi_dot/m1) grad phi + J^T d_dot / m2
    std::vector<double> fx(n), fy(n);
    for (std::size_t i = 0; i < n; ++i) {
        fx[i] = phi_dot.v[i] / phys.m1 * gphi.x.v[i] +
                (gd1.x.v[i] * d_dot.x.v[i] + gd2.x.v[i] * d_dot.y.v[i]) / phys.m2;
        fy[i] = phi_dot.v[i] / phys.m1 * gphi.y.v[i] +
                (gd1.y.v[i] * d_dot.x.v[i] + gd2.y.v[i] * d_dot.y.v[i]) / phys.m2;
    }

    ModeSolver helm(ctx, ModeOp::HelmholtzCompact, BcY::Dirichlet, 1.0 / dt, phys.mu4);
    const InnerProduct inner = weighted_inner(node_weights(g), 1);

    Step3Result out;
    out.u_tilde = VectorField2(g, state.u.x.bc, state.u.y.bc);

    for (int comp = 0; comp < 2; ++comp) {
        const ScalarField& u_n = comp == 0 ? state.u.x : state.u.y;
        const std::vector<double>& force = comp == 0 ? fx : fy;
        const std::vector<double>& press = comp == 0 ? gp.x.v : gp.y.v;

        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i)
            rhs[i] = u_n.v[i] / dt - press[i] - force[i];
        zero_wall_rows(g, rhs, 0);

        LinearOperator op;
        op.name = comp == 0 ? "velocity_x" : "velocity_y";
        op.n = n;
        op.apply = [&](const std::vector<double>& in, std::vector<double>& outv) {
            ScalarField f(g, dirichlet_bc(0.0, 0.0));
            f.v = in;
            ScalarField conv = ctx.skew_convect(state.u, f);
            ScalarField lf = ctx.lap_natural(f);
            for (std::size_t i = 0; i < n; ++i)
                outv[i] = in[i] / dt + conv.v[i] - phys.mu4 * lf.v[i];
            zero_wall_rows(g, outv, 0);
        };
        Preconditioner precond = [&](const std::vector<double>& in, std::vector<double>& outv) {
            ScalarField f(g, dirichlet_bc(0.0, 0.0));
            f.v = in;
            outv = helm.solve(f).x.v;
        };

        std::vector<double> x0 = u_n.v;
        {
            ScalarField tmp = u_n;
            tmp.apply_bc();
            x0 = tmp.v;
        }
        auto [sol, rep] = bicgstab_solve(op, rhs, precond, inner, sch.krylov_tol,
                                         sch.krylov_maxit, &x0);
        check_converged(comp == 0 ? "step3_velocity_x" : "step3_velocity_y", rep);
        (comp == 0 ? out.u_tilde.x : out.u_tilde.y).v = std::move(sol);
        (comp == 0 ? out.report_x : out.report_y) = rep;
    }
    return out;
}

Step4Result step4_project(const OperatorContext& ctx, const VectorField2& u_tilde,
                          const ScalarField& p_n, const SchemeParams& sch) {
    const Grid& g = u_tilde.grid();
    const double dt = sch.dt;

    ScalarField divu = ctx.vdiv(u_tilde);
    ScalarField rhs(g, neumann_bc());
    for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = -divu.v[i] / dt;

    ModeSolver poisson(ctx, ModeOp::PoissonWide, BcY::Neumann, 0.0, 1.0);
    ModeSolveResult psi = poisson.solve(rhs);

    Step4Result out;
    out.compat_warning = psi.compat_warning;
    out.p_next = p_n;
    for (std::size_t i = 0; i < out.p_next.v.size(); ++i) out.p_next.v[i] += psi.x.v[i];
    const double pmean = ctx.mean(out.p_next);
    for (double& x : out.p_next.v) x -= pmean;

    VectorField2 gpsi = ctx.vgrad(psi.x);
    out.u_next = u_tilde;
    for (std::size_t i = 0; i < out.u_next.x.v.size(); ++i) {
        out.u_next.x.v[i] -= dt * gpsi.x.v[i];
        out.u_next.y.v[i] -= dt * gpsi.y.v[i];
    }

    ScalarField div_next = ctx.vdiv(out.u_next);
    const double h = std::min(g.hx, g.hy);
    const double scale = std::max(ctx.norm_l2(divu), ctx.norm_l2(u_tilde) / h);
    out.div_rel = scale > 0.0 ? ctx.norm_l2(div_next) / scale : 0.0;
    return out;
}

AdvanceResult advance(const OperatorContext& ctx, const State& state, const PhysParams& phys,
                      const SchemeParams& sch, const TruncatedWell& well,
                      const AdvanceOptions& opts) {
    state.validate();
    const bool pd_check =
        opts.pd_check_every > 0 && state.step % opts.pd_check_every == 0;

    Step1Result s1 = step1_layer(ctx, state, phys, sch);
    Step2Result s2 = step2_director(ctx, state, s1.phi_next, s1.u_star, phys, sch, well,
                                    opts.use_quartic_well, pd_check);

    AdvanceResult res;
    res.next.phi = std::move(s1.phi_next);
    res.next.d = std::move(s2.d_next);
    res.outputs.phi_dot = std::move(s1.phi_dot);
    res.outputs.d_dot = std::move(s2.d_dot);
    res.outputs.u_star = std::move(s1.u_star);
    res.outputs.u_starstar = std::move(s2.u_starstar);
    res.outputs.layer = s1.report;
    res.outputs.director = s2.report;

    if (opts.no_flow) {
        res.next.u = state.u;
        res.next.p = state.p;
    } else {
        Step3Result s3 =
            step3_velocity(ctx, state, res.outputs.phi_dot, res.outputs.d_dot, phys, sch);
        Step4Result s4 = step4_project(ctx, s3.u_tilde, state.p, sch);
        res.outputs.u_tilde = std::move(s3.u_tilde);
        res.outputs.velocity_x = s3.report_x;
        res.outputs.velocity_y = s3.report_y;
        res.outputs.projection_compat_warning = s4.compat_warning;
        res.outputs.div_u_rel = s4.div_rel;
        res.next.u = std::move(s4.u_next);
        res.next.p = std::move(s4.p_next);
    }
    res.next.time = state.time + sch.dt;
    res.next.step = state.step + 1;
    res.energy = total_energy(ctx, res.next, phys, well, sch.dt);
    return res;
}

}  // namespace smaflow
