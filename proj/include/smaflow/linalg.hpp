#pragma once

// Matrix-free linear algebra: pointwise 2x2 closed forms, per-Fourier-mode
// banded direct solves, preconditioned CG and BiCGStab.

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smaflow/discrete_ops.hpp"
#include "smaflow/fields.hpp"

namespace smaflow {

// (I + c g g^T)^{-1} rhs via the closed form rhs - c g (g . rhs)/(1 + c |g|^2).
// The denominator is >= 1 for c >= 0.
Vec2 sherman_morrison_apply(const Vec2& g, double c, const Vec2& rhs);

// row-major 2x2 {a, b, c, d}
using Mat2 = std::array<double, 4>;

Mat2 mat2_inverse(const Mat2& m);  // throws std::domain_error when |det| < 1e-300
Vec2 mat2_apply(const Mat2& m, const Vec2& v);

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
    std::string solver;
};

struct SolveError : std::runtime_error {
    SolveError(const std::string& where, SolveReport rep)
        : std::runtime_error(where + ": linear solve failed after " +
                             std::to_string(rep.iterations) +
                             " iterations, relative residual " +
                             std::to_string(rep.rel_residual)),
          report(std::move(rep)) {}
    SolveReport report;
};

// Symmetric positive definite banded matrix, lower storage, LDL^T factoring.
class BandedSpd {
  public:
    BandedSpd() = default;
    BandedSpd(int n, int bandwidth);
    double& at(int i, int j);  // i >= j, i - j <= bandwidth
    void factor();             // throws std::domain_error on a nonpositive pivot
    void solve(std::vector<double>& b) const;
    int size() const { return n_; }

  private:
    int n_ = 0, bw_ = 0;
    std::vector<double> a_;  // a_[k*n + i] holds A(i, i-k)
    bool factored_ = false;
};

// Direct solver for constant-coefficient operators alpha I - beta L applied
// per Fourier mode in x, with one banded solve in y per mode.
//  * HelmholtzCompact: L is the compact 3-point Laplacian (plus the spectral
//    x part); tridiagonal. Neumann uses natural wall rows, Dirichlet solves
//    the interior with zero-trace walls.
//  * PoissonWide: L is the composition vdiv(vgrad .); bandwidth 2, natural
//    walls. This is the projection operator, so the corrected velocity is
//    discretely divergence free to round-off.
// Modes whose symbol vanishes (zero mode, and the annihilated Nyquist mode,
// when alpha = 0) are singular up to constants: the solver removes the mean
// of the right-hand side there, flags it if it exceeds 1e-10 relative, and
// pins the solution mean to zero.
enum class ModeOp { HelmholtzCompact, PoissonWide };

struct ModeSolveResult {
    ScalarField x;
    bool compat_warning = false;
};

class ModeSolver {
  public:
    ModeSolver(const OperatorContext& ctx, ModeOp kind, BcY bc, double alpha, double beta);
    ModeSolveResult solve(const ScalarField& rhs) const;

  private:
    const OperatorContext& ctx_;
    ModeOp kind_;
    BcY bc_;
    double alpha_, beta_;
    std::vector<BandedSpd> factors_;   // one per mode
    std::vector<char> singular_;       // mode pinned to zero mean
    std::vector<double> wy_;           // y quadrature weights
    BandedSpd wide_stiffness_;         // shared y stiffness for PoissonWide
    void build();
};

struct LinearOperator {
    std::string name;
    bool symmetric = false;
    std::size_t n = 0;
    std::function<void(const std::vector<double>&, std::vector<double>&)> apply;
};

using InnerProduct =
    std::function<double(const std::vector<double>&, const std::vector<double>&)>;
using Preconditioner =
    std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Preconditioned conjugate gradients in the given inner product. The operator
// and preconditioner must both be self-adjoint in that product and positive
// definite. Starts from x0 when given (useful to carry boundary values).
std::pair<std::vector<double>, SolveReport> pcg_solve(
    const LinearOperator& op, const std::vector<double>& rhs, const Preconditioner& precond,
    const InnerProduct& inner, double tol, int maxit,
    const std::vector<double>* x0 = nullptr);

// Right-preconditioned BiCGStab for nonsymmetric systems. On a rho/omega
// breakdown it restarts once from the current iterate, then reports failure.
std::pair<std::vector<double>, SolveReport> bicgstab_solve(
    const LinearOperator& op, const std::vector<double>& rhs, const Preconditioner& precond,
    const InnerProduct& inner, double tol, int maxit,
    const std::vector<double>* x0 = nullptr);

}  // namespace smaflow
