#include "smaflow/energy.hpp"

#include <cmath>

namespace smaflow {

EnergyReport total_energy(const OperatorContext& ctx, const State& state,
                          const PhysParams& phys, const TruncatedWell& well, double dt) {
    const Grid& g = state.grid();
    EnergyReport r;
    r.step = state.step;
    r.time = state.time;

    r.e_kinetic = 0.5 * ctx.inner(state.u, state.u);

    // elastic: nodal quadrature for the spectral x derivatives, cell
    // quadrature for the y differences
    {
        double acc = 0.0;
        for (const ScalarField* c : {&state.d.x, &state.d.y}) {
            ScalarField cx = ctx.dx(*c);
            acc += ctx.inner(cx, cx);
            CellArray cy = ctx.cell_dy(*c);
            acc += ctx.cell_inner(cy, cy);
        }
        r.e_elastic = 0.5 * phys.lambda * phys.eta * acc;
    }

    // bulk: pointwise well on the nodes
    {
        ScalarField gval(g);
        for (std::size_t i = 0; i < gval.v.size(); ++i)
            gval.v[i] = well.value({state.d.x.v[i], state.d.y.v[i]});
        r.e_bulk = phys.lambda * ctx.integral(gval);
    }

    // compatibility: |d1 - dx phi|^2 on the nodes, |avg d2 - dy phi|^2 on the
    // cells plus the quadrature remainder (hy^2/4)|cell_dy d2|^2, which
    // together equal the nodal mass of d2 seen by the director step
    {
        ScalarField phix = ctx.dx(state.phi);
        ScalarField rx(g);
        for (std::size_t i = 0; i < rx.v.size(); ++i)
            rx.v[i] = state.d.x.v[i] - phix.v[i];
        double acc = ctx.inner(rx, rx);

        CellArray d2avg = ctx.cell_avg(state.d.y);
        CellArray phiy = ctx.cell_dy(state.phi);
        for (std::size_t i = 0; i < d2avg.size(); ++i) d2avg[i] -= phiy[i];
        acc += ctx.cell_inner(d2avg, d2avg);

        CellArray d2dy = ctx.cell_dy(state.d.y);
        acc += 0.25 * g.hy * g.hy * ctx.cell_inner(d2dy, d2dy);

        r.e_compat = 0.5 * phys.lambda / phys.eta * acc;
    }

    {
        ScalarField dh(g);
        for (std::size_t i = 0; i < dh.v.size(); ++i)
            dh.v[i] = state.d.x.v[i] * phys.hx_dir + state.d.y.v[i] * phys.hy_dir;
        r.e_magnetic = -0.5 * phys.lambda * phys.tau * ctx.inner(dh, dh);
    }

    r.e_total = r.e_kinetic + r.e_elastic + r.e_bulk + r.e_compat + r.e_magnetic;

    VectorField2 gp = ctx.vgrad(state.p);
    r.grad_p_sq = ctx.inner(gp, gp);
    r.e_modified = r.e_total + 0.5 * dt * dt * r.grad_p_sq;
    return r;
}

MonotoneCheck check_monotone(const EnergyReport& prev, const EnergyReport& curr, double tol) {
    MonotoneCheck c;
    const double slack = tol * std::max(1.0, std::abs(prev.e_modified));
    if (curr.e_modified <= prev.e_modified + slack) return c;
    c.ok = false;
    c.violation = curr.e_modified - prev.e_modified;
    return c;
}

}  // namespace smaflow
