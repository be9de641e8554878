#include "smaflow/linalg.hpp"

#include <cmath>
#include <complex>

namespace smaflow {

Vec2 sherman_morrison_apply(const Vec2& g, double c, const Vec2& rhs) {
    const double g2 = g[0] * g[0] + g[1] * g[1];
    const double s = c * (g[0] * rhs[0] + g[1] * rhs[1]) / (1.0 + c * g2);
    return {rhs[0] - s * g[0], rhs[1] - s * g[1]};
}

Mat2 mat2_inverse(const Mat2& m) {
    const double det = m[0] * m[3] - m[1] * m[2];
    if (std::abs(det) < 1e-300) throw std::domain_error("mat2_inverse: singular matrix");
    const double inv = 1.0 / det;
    return {m[3] * inv, -m[1] * inv, -m[2] * inv, m[0] * inv};
}

Vec2 mat2_apply(const Mat2& m, const Vec2& v) {
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

// ---- banded LDL^T ---------------------------------------------------------

BandedSpd::BandedSpd(int n, int bandwidth)
    : n_(n), bw_(bandwidth), a_(std::size_t(bandwidth + 1) * n, 0.0) {}

double& BandedSpd::at(int i, int j) {
    const int k = i - j;
    return a_[std::size_t(k) * n_ + i];
}

void BandedSpd::factor() {
    // in place: a_ ends up holding unit-lower L off the diagonal and D on it
    for (int i = 0; i < n_; ++i) {
        const int jlo = std::max(0, i - bw_);
        for (int j = jlo; j < i; ++j) {
            double sum = at(i, j);
            const int mlo = std::max(jlo, j - bw_);
            for (int m = mlo; m < j; ++m) sum -= at(i, m) * at(m, m) * at(j, m);
            at(i, j) = sum / at(j, j);
        }
        double diag = at(i, i);
        for (int m = jlo; m < i; ++m) diag -= at(i, m) * at(i, m) * at(m, m);
        if (!(diag > 0.0))
            throw std::domain_error("BandedSpd::factor: nonpositive pivot at row " +
                                    std::to_string(i));
        at(i, i) = diag;
    }
    factored_ = true;
}

void BandedSpd::solve(std::vector<double>& b) const {
    auto L = [&](int i, int j) { return a_[std::size_t(i - j) * n_ + i]; };
    for (int i = 0; i < n_; ++i) {
        double s = b[i];
        for (int j = std::max(0, i - bw_); j < i; ++j) s -= L(i, j) * b[j];
        b[i] = s;
    }
    for (int i = 0; i < n_; ++i) b[i] /= L(i, i);
    for (int i = n_ - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < std::min(n_, i + bw_ + 1); ++j) s -= L(j, i) * b[j];
        b[i] = s;
    }
}

// ---- per-mode direct solver -------------------------------------------------

ModeSolver::ModeSolver(const OperatorContext& ctx, ModeOp kind, BcY bc, double alpha,
                       double beta)
    : ctx_(ctx), kind_(kind), bc_(bc), alpha_(alpha), beta_(beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("ModeSolver: beta must be positive");
    if (alpha < 0.0) throw std::invalid_argument("ModeSolver: alpha must be >= 0");
    if (kind_ == ModeOp::PoissonWide && bc_ != BcY::Neumann)
        throw std::invalid_argument("ModeSolver: the wide Poisson operator is Neumann only");
    build();
}

void ModeSolver::build() {
    const Grid& g = ctx_.grid();
    const int ny = g.ny;
    const double h = g.hy;
    wy_.resize(ny);
    for (int i = 0; i < ny; ++i) wy_[i] = g.wy(i);

    if (kind_ == ModeOp::PoissonWide) {
        // y stiffness of the composed divergence-gradient pair: G^T S G with
        // S the cell-to-cell coupling through the node weights
        wide_stiffness_ = BandedSpd(ny, 2);
        const int nc = ny - 1;
        auto S = [&](int j, int l) -> double {
            double s = 0.0;
            for (int i = std::max(j, l); i <= std::min(j, l) + 1; ++i)
                s += (h * h / 4.0) / wy_[i];
            return s;
        };
        for (int j = 0; j < nc; ++j) {
            for (int l = std::max(0, j - 1); l <= std::min(nc - 1, j + 1); ++l) {
                const double s = S(j, l);
                const int na[2] = {j, j + 1};
                const double sa[2] = {-1.0 / h, 1.0 / h};
                const int nb[2] = {l, l + 1};
                const double sb[2] = {-1.0 / h, 1.0 / h};
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q)
                        if (na[p] >= nb[q]) wide_stiffness_.at(na[p], nb[q]) += sa[p] * s * sb[q];
            }
        }
    }

    const int nm = ctx_.n_modes();
    factors_.resize(nm);
    singular_.assign(nm, 0);
    for (int m = 0; m < nm; ++m) {
        const double k2 = ctx_.kx(m) * ctx_.kx(m);
        const double shift = alpha_ + beta_ * k2;
        if (kind_ == ModeOp::HelmholtzCompact && bc_ == BcY::Dirichlet) {
            const int n = ny - 2;
            BandedSpd M(n, 1);
            for (int i = 0; i < n; ++i) {
                M.at(i, i) = shift + 2.0 * beta_ / (h * h);
                if (i > 0) M.at(i, i - 1) = -beta_ / (h * h);
            }
            M.factor();
            factors_[m] = std::move(M);
            continue;
        }
        // Neumann families are solved in weighted form: (alpha + beta k^2) W + beta K
        const bool singular = (shift == 0.0);
        singular_[m] = singular ? 1 : 0;
        const int n = singular ? ny - 1 : ny;   // pin the first row on singular modes
        const int off = singular ? 1 : 0;
        const int bw = (kind_ == ModeOp::PoissonWide) ? 2 : 1;
        BandedSpd M(n, bw);
        for (int i = 0; i < n; ++i) {
            const int gi = i + off;
            double diag = shift * wy_[gi];
            if (kind_ == ModeOp::HelmholtzCompact) {
                diag += beta_ * ((gi == 0 || gi == ny - 1) ? 1.0 : 2.0) / h;
                M.at(i, i) = diag;
                if (i > 0) M.at(i, i - 1) = -beta_ / h;
            } else {
                M.at(i, i) = diag + beta_ * wide_stiffness_.at(gi, gi);
                for (int j = std::max(0, i - 2); j < i; ++j)
                    M.at(i, j) = beta_ * wide_stiffness_.at(gi, j + off);
            }
        }
        M.factor();
        factors_[m] = std::move(M);
    }
}

ModeSolveResult ModeSolver::solve(const ScalarField& rhs) const {
    const Grid& g = ctx_.grid();
    const int ny = g.ny, nm = ctx_.n_modes();
    ModeSolveResult res;
    res.x = ScalarField(g, rhs.bc);

    std::vector<std::complex<double>> modes(std::size_t(ny) * nm);
    ctx_.to_modes(rhs, modes.data());

    // scale for the singular-mode compatibility check: a mode whose content
    // is pure round-off must not trip the warning
    double global_scale = 0.0;
    for (const std::complex<double>& z : modes)
        global_scale = std::max({global_scale, std::abs(z.real()), std::abs(z.imag())});

    std::vector<double> col(ny);
    const double wsum = g.ly();

    for (int m = 0; m < nm; ++m) {
        for (int part = 0; part < 2; ++part) {
            if (kind_ == ModeOp::HelmholtzCompact && bc_ == BcY::Dirichlet) {
                col.resize(ny - 2);
                for (int i = 0; i < ny - 2; ++i) {
                    const std::complex<double>& z = modes[std::size_t(i + 1) * nm + m];
                    col[i] = part == 0 ? z.real() : z.imag();
                }
                factors_[m].solve(col);
                for (int i = 0; i < ny - 2; ++i) {
                    std::complex<double>& z = modes[std::size_t(i + 1) * nm + m];
                    z = part == 0 ? std::complex<double>(col[i], z.imag())
                                  : std::complex<double>(z.real(), col[i]);
                }
                if (part == 1)
                    for (int i : {0, ny - 1}) modes[std::size_t(i) * nm + m] = 0.0;
                continue;
            }

            col.resize(ny);
            for (int i = 0; i < ny; ++i) {
                const std::complex<double>& z = modes[std::size_t(i) * nm + m];
                col[i] = part == 0 ? z.real() : z.imag();
            }
            if (singular_[m]) {
                // defined up to a constant: remove the rhs mean, then pin
                double mean = 0.0;
                for (int i = 0; i < ny; ++i) mean += wy_[i] * col[i];
                mean /= wsum;
                if (std::abs(mean) > 1e-10 * std::max(global_scale, 1e-300))
                    res.compat_warning = true;
                for (int i = 0; i < ny; ++i) col[i] -= mean;
                std::vector<double> red(ny - 1);
                for (int i = 1; i < ny; ++i) red[i - 1] = wy_[i] * col[i];
                factors_[m].solve(red);
                col[0] = 0.0;
                for (int i = 1; i < ny; ++i) col[i] = red[i - 1];
                double xmean = 0.0;
                for (int i = 0; i < ny; ++i) xmean += wy_[i] * col[i];
                xmean /= wsum;
                for (int i = 0; i < ny; ++i) col[i] -= xmean;
            } else {
                for (int i = 0; i < ny; ++i) col[i] *= wy_[i];
                factors_[m].solve(col);
            }
            for (int i = 0; i < ny; ++i) {
                std::complex<double>& z = modes[std::size_t(i) * nm + m];
                z = part == 0 ? std::complex<double>(col[i], z.imag())
                              : std::complex<double>(z.real(), col[i]);
            }
        }
    }
    ctx_.from_modes(modes.data(), res.x);
    return res;
}

// ---- Krylov solvers ---------------------------------------------------------

namespace {
void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}
}  // namespace

std::pair<std::vector<double>, SolveReport> pcg_solve(const LinearOperator& op,
                                                      const std::vector<double>& rhs,
                                                      const Preconditioner& precond,
                                                      const InnerProduct& inner, double tol,
                                                      int maxit,
                                                      const std::vector<double>* x0) {
    const std::size_t n = rhs.size();
    SolveReport rep;
    rep.solver = "pcg:" + op.name;
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> r(n), z(n), p(n), q(n);

    const double bnorm = std::sqrt(inner(rhs, rhs));
    if (bnorm == 0.0 && !x0) {
        rep.converged = true;
        return {std::vector<double>(n, 0.0), rep};
    }
    if (x0) {
        op.apply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
    } else {
        r = rhs;
    }
    double rnorm = std::sqrt(inner(r, r));
    // a boundary-lifted solve can have a zero right-hand side with a nonzero
    // residual; fall back to the initial residual as the reference scale
    const double ref = bnorm > 0.0 ? bnorm : (rnorm > 0.0 ? rnorm : 1.0);
    if (rnorm <= tol * ref) {
        rep.converged = true;
        rep.rel_residual = rnorm / ref;
        return {x, rep};
    }
    precond(r, z);
    p = z;
    double rz = inner(r, z);
    for (int it = 0; it < maxit; ++it) {
        op.apply(p, q);
        const double pq = inner(p, q);
        if (!(pq > 0.0)) break;  // loss of positive definiteness
        const double alpha = rz / pq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        rep.iterations = it + 1;
        rnorm = std::sqrt(inner(r, r));
        if (rnorm <= tol * ref) {
            rep.converged = true;
            break;
        }
        precond(r, z);
        const double rz_new = inner(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rep.rel_residual = rnorm / ref;
    return {x, rep};
}

std::pair<std::vector<double>, SolveReport> bicgstab_solve(const LinearOperator& op,
                                                           const std::vector<double>& rhs,
                                                           const Preconditioner& precond,
                                                           const InnerProduct& inner,
                                                           double tol, int maxit,
                                                           const std::vector<double>* x0) {
    const std::size_t n = rhs.size();
    SolveReport rep;
    rep.solver = "bicgstab:" + op.name;
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);

    const double bnorm = std::sqrt(inner(rhs, rhs));
    if (bnorm == 0.0 && !x0) {
        rep.converged = true;
        return {std::vector<double>(n, 0.0), rep};
    }
    auto residual = [&](std::vector<double>& out) {
        op.apply(x, out);
        for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] - out[i];
    };
    if (x0) {
        residual(r);
    } else {
        r = rhs;
    }
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double rnorm = std::sqrt(inner(r, r));
    const double ref = bnorm > 0.0 ? bnorm : (rnorm > 0.0 ? rnorm : 1.0);
    bool restarted = false;
    const double breakdown_eps = 1e-30;

    for (int it = 0; it < maxit && rnorm > tol * ref; ++it) {
        rep.iterations = it + 1;
        const double rho_new = inner(rhat, r);
        if (std::abs(rho_new) < breakdown_eps * ref * ref) {
            if (restarted) break;
            restarted = true;
            residual(r);
            rhat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            rnorm = std::sqrt(inner(r, r));
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        precond(p, ph);
        op.apply(ph, v);
        alpha = rho / inner(rhat, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (std::sqrt(inner(s, s)) <= tol * ref) {
            axpy(alpha, ph, x);
            rnorm = std::sqrt(inner(s, s));
            break;
        }
        precond(s, sh);
        op.apply(sh, t);
        const double tt = inner(t, t);
        omega = tt > 0.0 ? inner(t, s) / tt : 0.0;
        if (std::abs(omega) < breakdown_eps) {
            if (restarted) break;
            restarted = true;
            axpy(alpha, ph, x);
            residual(r);
            rhat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            rnorm = std::sqrt(inner(r, r));
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = std::sqrt(inner(r, r));
    }
    rep.rel_residual = rnorm / ref;
    rep.converged = rnorm <= tol * ref;
    return {x, rep};
}

}  // namespace smaflow
