#pragma once

// The four-step time advance: layer solve, director solve, velocity solve,
// pressure projection. Each step is linear; the transport coupling is
// removed with pointwise 2x2 closed forms so the auxiliary convective
// velocities never require an outer iteration.

#include "smaflow/discrete_ops.hpp"
#include "smaflow/energy.hpp"
#include "smaflow/fields.hpp"
#include "smaflow/linalg.hpp"
#include "smaflow/potential.hpp"

namespace smaflow {

struct Step1Result {
    ScalarField phi_next;
    ScalarField phi_dot;
    VectorField2 u_star;
    SolveReport report;
};

struct Step2Result {
    VectorField2 d_next;
    VectorField2 d_dot;
    VectorField2 u_starstar;
    SolveReport report;
};

struct Step3Result {
    VectorField2 u_tilde;
    SolveReport report_x, report_y;
};

struct Step4Result {
    VectorField2 u_next;
    ScalarField p_next;
    bool compat_warning = false;  // nonzero boundary flux handed to the Poisson solve
    double div_rel = 0.0;         // relative divergence of the corrected velocity
};

// Layer update. Eliminates the auxiliary velocity pointwise, solves the
// resulting symmetric positive definite variable-coefficient Helmholtz
// problem by preconditioned CG, then reconstructs the material derivative
// and the auxiliary velocity. Throws SolveError on non-convergence.
Step1Result step1_layer(const OperatorContext& ctx, const State& state,
                        const PhysParams& phys, const SchemeParams& sch);

// Director update; the two components couple only through a pointwise 2x2
// matrix. pd_check verifies that matrix is positive definite against its
// closed-form eigenvalue bound.
Step2Result step2_director(const OperatorContext& ctx, const State& state,
                           const ScalarField& phi_next, const VectorField2& u_star,
                           const PhysParams& phys, const SchemeParams& sch,
                           const TruncatedWell& well, bool use_quartic_well = false,
                           bool pd_check = false);

// Intermediate velocity: one convection-diffusion solve per component
// (BiCGStab), walls pinned to the velocity Dirichlet data. The convection
// term uses the skew form, which is exactly energy neutral.
Step3Result step3_velocity(const OperatorContext& ctx, const State& state,
                           const ScalarField& phi_dot, const VectorField2& d_dot,
                           const PhysParams& phys, const SchemeParams& sch);

// Pressure-increment projection; the corrected velocity satisfies
// vdiv(u_next) = 0 to round-off on every row. The pressure mean is pinned
// to zero.
Step4Result step4_project(const OperatorContext& ctx, const VectorField2& u_tilde,
                          const ScalarField& p_n, const SchemeParams& sch);

struct StepOutputs {
    ScalarField phi_dot;
    VectorField2 d_dot;
    VectorField2 u_star;
    VectorField2 u_starstar;
    VectorField2 u_tilde;  // pre-projection velocity (empty when no_flow)
    SolveReport layer, director, velocity_x, velocity_y;
    bool projection_compat_warning = false;
    double div_u_rel = 0.0;
};

struct AdvanceOptions {
    bool no_flow = false;        // keep u = 0, p = 0 and skip steps 3 and 4
    int pd_check_every = 50;     // 0 disables the pointwise PD spot check
    bool use_quartic_well = false;
};

struct AdvanceResult {
    State next;
    StepOutputs outputs;
    EnergyReport energy;  // of the new state; monotone_ok left for the driver
};

AdvanceResult advance(const OperatorContext& ctx, const State& state, const PhysParams& phys,
                      const SchemeParams& sch, const TruncatedWell& well,
                      const AdvanceOptions& opts = {});

}  // namespace smaflow
