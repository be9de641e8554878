#pragma once

// Discrete differential operators and inner products. x is handled
// pseudospectrally (Fourier), y by second-order finite differences on the
// node grid with a staggered cell layer underneath.
//
// Two operator families coexist:
//  * grad / div / laplacian / convect: boundary-aware consistent stencils,
//    meant for diagnostics, forces and anything graded on truncation error.
//  * vgrad / vdiv and the cell-level pieces: a pair that is exactly adjoint
//    under inner(), i.e. inner(vgrad f, v) == -inner(f, vdiv v) to round-off
//    for arbitrary fields. The time scheme and the energy functional are
//    built on this pair so the discrete energy identities close exactly.

#include <complex>
#include <memory>
#include <vector>

#include "smaflow/fields.hpp"

namespace smaflow {

// y-cell array: (ny - 1) rows of nx values, entry (ix, j) at j*nx + ix.
using CellArray = std::vector<double>;

class OperatorContext {
  public:
    explicit OperatorContext(const Grid& grid);
    ~OperatorContext();
    OperatorContext(const OperatorContext&) = delete;
    OperatorContext& operator=(const OperatorContext&) = delete;

    const Grid& grid() const { return grid_; }

    // ---- spectral x direction -------------------------------------------
    int n_modes() const { return grid_.nx / 2 + 1; }
    // wavenumber of mode m; the Nyquist mode is zeroed so first and second
    // derivatives stay exact adjoints of each other
    double kx(int m) const { return kx_[m]; }

    // Forward transform of every y row; out has ny * n_modes() entries laid
    // out row-major (iy, m). Unnormalized (inverse divides by nx).
    void to_modes(const ScalarField& f, std::complex<double>* out) const;
    void from_modes(const std::complex<double>* in, ScalarField& out) const;

    ScalarField dx(const ScalarField& f) const;
    ScalarField dxx(const ScalarField& f) const;

    // ---- consistent (boundary-aware) operators --------------------------
    // y derivative honoring the field's wall closure: Neumann walls reflect
    // (zero derivative rows), Dirichlet walls use one-sided second order.
    ScalarField dy(const ScalarField& f) const;
    VectorField2 grad(const ScalarField& f) const;
    ScalarField div(const VectorField2& v) const;
    // Compact 3-point Laplacian in y plus the spectral x part. Neumann wall
    // rows are the natural zero-flux rows; Dirichlet wall rows use a shifted
    // one-sided formula (the solver never reads them).
    ScalarField laplacian(const ScalarField& f) const;
    // u . grad(f), formed pointwise from grad
    ScalarField convect(const VectorField2& u, const ScalarField& f) const;
    VectorField2 convect(const VectorField2& u, const VectorField2& f) const;

    // ---- variational (exactly adjoint) operators -------------------------
    // nodal y derivative: centered inside, one-sided first order on walls
    ScalarField dhat(const ScalarField& f) const;
    VectorField2 vgrad(const ScalarField& f) const;     // (dx f, dhat f)
    ScalarField vdiv(const VectorField2& v) const;      // dx v.x + d0(cell_avg v.y)
    CellArray cell_dy(const ScalarField& f) const;      // (f_{j+1} - f_j)/hy
    CellArray cell_avg(const ScalarField& f) const;     // (f_j + f_{j+1})/2
    // adjoint of -cell_dy: cells -> nodes with zero flux ghosts
    ScalarField d0(const CellArray& q) const;
    // compact Laplacian with natural (variational) wall rows everywhere;
    // identical to laplacian() away from Dirichlet walls
    ScalarField lap_natural(const ScalarField& f) const;
    // skew form of u . grad(f): exactly energy-neutral against f
    ScalarField skew_convect(const VectorField2& u, const ScalarField& f) const;

    // ---- inner products ---------------------------------------------------
    // trapezoidal weights in y, uniform in x
    double inner(const ScalarField& a, const ScalarField& b) const;
    double inner(const VectorField2& a, const VectorField2& b) const;
    double norm_l2(const ScalarField& a) const;
    double norm_l2(const VectorField2& a) const;
    double cell_inner(const CellArray& a, const CellArray& b) const;
    double integral(const ScalarField& a) const;  // inner(a, 1)
    double mean(const ScalarField& a) const { return integral(a) / grid_.area(); }

  private:
    Grid grid_;
    std::vector<double> kx_;
    struct FftPlans;
    std::unique_ptr<FftPlans> fft_;

    ScalarField spectral_multiply(const ScalarField& f,
                                  const std::vector<double>& multiplier,
                                  bool imaginary) const;
};

}  // namespace smaflow
