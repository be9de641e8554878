#include "smaflow/discrete_ops.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace smaflow {

struct OperatorContext::FftPlans {
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan r2c{};
    fftw_plan c2r{};
    int nx = 0, ny = 0, nm = 0;

    FftPlans(int nx_, int ny_) : nx(nx_), ny(ny_), nm(nx_ / 2 + 1) {
        real = fftw_alloc_real(std::size_t(nx) * ny);
        cplx = fftw_alloc_complex(std::size_t(nm) * ny);
        r2c = fftw_plan_many_dft_r2c(1, &nx, ny, real, nullptr, 1, nx, cplx, nullptr, 1, nm,
                                     FFTW_ESTIMATE);
        c2r = fftw_plan_many_dft_c2r(1, &nx, ny, cplx, nullptr, 1, nm, real, nullptr, 1, nx,
                                     FFTW_ESTIMATE);
        if (!r2c || !c2r) throw std::runtime_error("OperatorContext: FFT plan creation failed");
    }
    ~FftPlans() {
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
        fftw_free(real);
        fftw_free(cplx);
    }
};

OperatorContext::OperatorContext(const Grid& grid)
    : grid_(grid), fft_(std::make_unique<FftPlans>(grid.nx, grid.ny)) {
    const int nm = n_modes();
    kx_.resize(nm);
    for (int m = 0; m < nm; ++m) kx_[m] = 2.0 * std::numbers::pi * m / grid_.lx;
    kx_[nm - 1] = 0.0;  // Nyquist annihilated; keeps dx and dxx adjoint-consistent
}

OperatorContext::~OperatorContext() = default;

void OperatorContext::to_modes(const ScalarField& f, std::complex<double>* out) const {
    std::memcpy(fft_->real, f.v.data(), sizeof(double) * f.v.size());
    fftw_execute(fft_->r2c);
    const std::size_t nc = std::size_t(fft_->nm) * fft_->ny;
    for (std::size_t i = 0; i < nc; ++i) out[i] = {fft_->cplx[i][0], fft_->cplx[i][1]};
}

void OperatorContext::from_modes(const std::complex<double>* in, ScalarField& out) const {
    const std::size_t nc = std::size_t(fft_->nm) * fft_->ny;
    for (std::size_t i = 0; i < nc; ++i) {
        fft_->cplx[i][0] = in[i].real();
        fft_->cplx[i][1] = in[i].imag();
    }
    fftw_execute(fft_->c2r);
    const double scale = 1.0 / grid_.nx;
    const std::size_t n = grid_.size();
    for (std::size_t i = 0; i < n; ++i) out.v[i] = fft_->real[i] * scale;
}

ScalarField OperatorContext::spectral_multiply(const ScalarField& f,
                                               const std::vector<double>& mult,
                                               bool imaginary) const {
    std::memcpy(fft_->real, f.v.data(), sizeof(double) * f.v.size());
    fftw_execute(fft_->r2c);
    const int nm = fft_->nm;
    for (int iy = 0; iy < grid_.ny; ++iy) {
        fftw_complex* row = fft_->cplx + std::size_t(iy) * nm;
        for (int m = 0; m < nm; ++m) {
            const double re = row[m][0], im = row[m][1];
            if (imaginary) {  // multiply by i*mult
                row[m][0] = -mult[m] * im;
                row[m][1] = mult[m] * re;
            } else {
                row[m][0] = mult[m] * re;
                row[m][1] = mult[m] * im;
            }
        }
    }
    fftw_execute(fft_->c2r);
    ScalarField out(grid_, f.bc);
    const double scale = 1.0 / grid_.nx;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = fft_->real[i] * scale;
    return out;
}

ScalarField OperatorContext::dx(const ScalarField& f) const {
    return spectral_multiply(f, kx_, true);
}

ScalarField OperatorContext::dxx(const ScalarField& f) const {
    std::vector<double> m2(kx_.size());
    for (std::size_t i = 0; i < kx_.size(); ++i) m2[i] = -kx_[i] * kx_[i];
    return spectral_multiply(f, m2, false);
}

ScalarField OperatorContext::dy(const ScalarField& f) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double h = grid_.hy;
    ScalarField out(grid_);
    for (int iy = 1; iy < ny - 1; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            out.at(ix, iy) = (f.at(ix, iy + 1) - f.at(ix, iy - 1)) / (2.0 * h);
    if (f.bc.kind == BcY::Neumann) {
        for (int ix = 0; ix < nx; ++ix) {
            out.at(ix, 0) = 0.0;
            out.at(ix, ny - 1) = 0.0;
        }
    } else {
        for (int ix = 0; ix < nx; ++ix) {
            out.at(ix, 0) = (-3.0 * f.at(ix, 0) + 4.0 * f.at(ix, 1) - f.at(ix, 2)) / (2.0 * h);
            out.at(ix, ny - 1) =
                (3.0 * f.at(ix, ny - 1) - 4.0 * f.at(ix, ny - 2) + f.at(ix, ny - 3)) / (2.0 * h);
        }
    }
    return out;
}

VectorField2 OperatorContext::grad(const ScalarField& f) const {
    VectorField2 g(grid_);
    g.x = dx(f);
    g.y = dy(f);
    return g;
}

ScalarField OperatorContext::div(const VectorField2& v) const {
    ScalarField out = dx(v.x);
    ScalarField dyv = dy(v.y);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += dyv.v[i];
    return out;
}

ScalarField OperatorContext::laplacian(const ScalarField& f) const {
    ScalarField out = lap_natural(f);
    if (f.bc.kind == BcY::Dirichlet) {
        // shifted one-sided second derivative at the walls (diagnostic rows)
        ScalarField fxx = dxx(f);
        const int ny = grid_.ny;
        const double h2 = grid_.hy * grid_.hy;
        for (int ix = 0; ix < grid_.nx; ++ix) {
            out.at(ix, 0) = fxx.at(ix, 0) + (f.at(ix, 0) - 2.0 * f.at(ix, 1) + f.at(ix, 2)) / h2;
            out.at(ix, ny - 1) =
                fxx.at(ix, ny - 1) +
                (f.at(ix, ny - 1) - 2.0 * f.at(ix, ny - 2) + f.at(ix, ny - 3)) / h2;
        }
    }
    return out;
}

ScalarField OperatorContext::convect(const VectorField2& u, const ScalarField& f) const {
    VectorField2 g = grad(f);
    ScalarField out(grid_);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = u.x.v[i] * g.x.v[i] + u.y.v[i] * g.y.v[i];
    return out;
}

VectorField2 OperatorContext::convect(const VectorField2& u, const VectorField2& f) const {
    VectorField2 out(grid_);
    out.x = convect(u, f.x);
    out.y = convect(u, f.y);
    return out;
}

ScalarField OperatorContext::dhat(const ScalarField& f) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double h = grid_.hy;
    ScalarField out(grid_);
    for (int iy = 1; iy < ny - 1; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            out.at(ix, iy) = (f.at(ix, iy + 1) - f.at(ix, iy - 1)) / (2.0 * h);
    for (int ix = 0; ix < nx; ++ix) {
        out.at(ix, 0) = (f.at(ix, 1) - f.at(ix, 0)) / h;
        out.at(ix, ny - 1) = (f.at(ix, ny - 1) - f.at(ix, ny - 2)) / h;
    }
    return out;
}

VectorField2 OperatorContext::vgrad(const ScalarField& f) const {
    VectorField2 g(grid_);
    g.x = dx(f);
    g.y = dhat(f);
    return g;
}

CellArray OperatorContext::cell_dy(const ScalarField& f) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const double h = grid_.hy;
    CellArray q(std::size_t(ny - 1) * nx);
    for (int j = 0; j + 1 < ny; ++j)
        for (int ix = 0; ix < nx; ++ix)
            q[std::size_t(j) * nx + ix] = (f.at(ix, j + 1) - f.at(ix, j)) / h;
    return q;
}

CellArray OperatorContext::cell_avg(const ScalarField& f) const {
    const int nx = grid_.nx, ny = grid_.ny;
    CellArray q(std::size_t(ny - 1) * nx);
    for (int j = 0; j + 1 < ny; ++j)
        for (int ix = 0; ix < nx; ++ix)
            q[std::size_t(j) * nx + ix] = 0.5 * (f.at(ix, j) + f.at(ix, j + 1));
    return q;
}

ScalarField OperatorContext::d0(const CellArray& q) const {
    const int nx = grid_.nx, ny = grid_.ny;
    ScalarField out(grid_);
    for (int iy = 0; iy < ny; ++iy) {
        const double w = grid_.wy(iy);
        for (int ix = 0; ix < nx; ++ix) {
            const double above = (iy < ny - 1) ? q[std::size_t(iy) * nx + ix] : 0.0;
            const double below = (iy > 0) ? q[std::size_t(iy - 1) * nx + ix] : 0.0;
            out.at(ix, iy) = (above - below) / w;
        }
    }
    return out;
}

ScalarField OperatorContext::vdiv(const VectorField2& v) const {
    ScalarField out = dx(v.x);
    ScalarField ydiv = d0(cell_avg(v.y));
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += ydiv.v[i];
    return out;
}

ScalarField OperatorContext::lap_natural(const ScalarField& f) const {
    ScalarField out = dxx(f);
    ScalarField ylap = d0(cell_dy(f));
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += ylap.v[i];
    return out;
}

ScalarField OperatorContext::skew_convect(const VectorField2& u, const ScalarField& f) const {
    // 0.5 (u . vgrad f) + 0.5 vdiv(u f); the two halves are exact negative
    // adjoints of each other so inner(skew_convect(u, f), f) == 0
    ScalarField fx = dx(f);
    ScalarField fy = dhat(f);
    VectorField2 uf(grid_);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        uf.x.v[i] = u.x.v[i] * f.v[i];
        uf.y.v[i] = u.y.v[i] * f.v[i];
    }
    ScalarField divuf = vdiv(uf);
    ScalarField out(grid_);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = 0.5 * (u.x.v[i] * fx.v[i] + u.y.v[i] * fy.v[i]) + 0.5 * divuf.v[i];
    return out;
}

double OperatorContext::inner(const ScalarField& a, const ScalarField& b) const {
    const int nx = grid_.nx, ny = grid_.ny;
    double total = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        const double w = grid_.wy(iy);
        double row = 0.0;
        for (int ix = 0; ix < nx; ++ix) row += a.at(ix, iy) * b.at(ix, iy);
        total += w * row;
    }
    return total * grid_.hx;
}

double OperatorContext::inner(const VectorField2& a, const VectorField2& b) const {
    return inner(a.x, b.x) + inner(a.y, b.y);
}

double OperatorContext::norm_l2(const ScalarField& a) const { return std::sqrt(inner(a, a)); }

double OperatorContext::norm_l2(const VectorField2& a) const { return std::sqrt(inner(a, a)); }

double OperatorContext::cell_inner(const CellArray& a, const CellArray& b) const {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
    return total * grid_.hx * grid_.hy;
}

double OperatorContext::integral(const ScalarField& a) const {
    const int nx = grid_.nx, ny = grid_.ny;
    double total = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        const double w = grid_.wy(iy);
        double row = 0.0;
        for (int ix = 0; ix < nx; ++ix) row += a.at(ix, iy);
        total += w * row;
    }
    return total * grid_.hx;
}

}  // namespace smaflow
