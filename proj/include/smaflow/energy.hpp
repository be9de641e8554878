#pragma once

// Discrete free energy, the modified energy tracked by the monotonicity
// monitor, and the per-step comparison.

#include "smaflow/discrete_ops.hpp"
#include "smaflow/fields.hpp"
#include "smaflow/potential.hpp"

namespace smaflow {

struct EnergyReport {
    long step = 0;
    double time = 0.0;
    double e_kinetic = 0.0;   // ||u||^2 / 2
    double e_elastic = 0.0;   // lambda eta ||grad d||^2 / 2
    double e_bulk = 0.0;      // lambda (G(d), 1)
    double e_compat = 0.0;    // lambda/(2 eta) ||d - grad phi||^2
    double e_magnetic = 0.0;  // -lambda tau ||d . h||^2 / 2
    double e_total = 0.0;
    double grad_p_sq = 0.0;   // ||grad p||^2
    double e_modified = 0.0;  // e_total + dt^2/2 grad_p_sq
    bool monotone_ok = true;  // versus the previous report, set by the driver
};

// Quadratures follow the discretization the time scheme is built on: the
// y parts of the gradient terms are evaluated on the cell layer, which is
// what makes the step-by-step energy identities exact. dt enters only the
// modified energy.
EnergyReport total_energy(const OperatorContext& ctx, const State& state,
                          const PhysParams& phys, const TruncatedWell& well, double dt);

struct MonotoneCheck {
    bool ok = true;
    double violation = 0.0;  // raw excess curr - prev when flagged
};

// ok iff curr.e_modified <= prev.e_modified + tol * max(1, |prev.e_modified|)
MonotoneCheck check_monotone(const EnergyReport& prev, const EnergyReport& curr, double tol);

}  // namespace smaflow
