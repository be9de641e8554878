#include "smaflow/potential.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smaflow {

namespace {

double well_value(double eps, double x, double y) {
    const double r2 = x * x + y * y;
    const double c = 1.0 / (4.0 * eps * eps);
    if (r2 <= 1.0) {
        const double t = r2 - 1.0;
        return c * t * t;
    }
    const double t = std::sqrt(r2) - 1.0;
    return c * t * t;
}

// spectral norm of the 2x2 finite-difference Hessian at (x, y)
double fd_hessian_norm(double eps, double x, double y, double h) {
    auto g = [&](double a, double b) { return well_value(eps, a, b); };
    const double hxx = (g(x + h, y) - 2.0 * g(x, y) + g(x - h, y)) / (h * h);
    const double hyy = (g(x, y + h) - 2.0 * g(x, y) + g(x, y - h)) / (h * h);
    const double hxy =
        (g(x + h, y + h) - g(x + h, y - h) - g(x - h, y + h) + g(x - h, y - h)) / (4.0 * h * h);
    const double tr = 0.5 * (hxx + hyy);
    const double det = hxx * hyy - hxy * hxy;
    const double disc = std::sqrt(std::max(0.0, tr * tr - det));
    return std::max(std::abs(tr + disc), std::abs(tr - disc));
}

}  // namespace

double hessian_bound(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("hessian_bound: eps must be positive");
    const double bound = 2.0 / (eps * eps);
    // sampled soundness check over |d| <= 3
    const int n = 101;
    const double lo = -3.0, hi = 3.0;
    const double step = (hi - lo) / (n - 1);
    const double fd_h = 1e-4;
    double sup = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = lo + i * step, y = lo + j * step;
            if (x * x + y * y > 9.0) continue;
            sup = std::max(sup, fd_hessian_norm(eps, x, y, fd_h));
        }
    if (sup > bound * (1.0 + 1e-3))
        throw std::logic_error("hessian_bound: sampled Hessian norm " + std::to_string(sup) +
                               " exceeds the analytic bound " + std::to_string(bound));
    return bound;
}

double min_stabilizer(double lambda, double hessian_bound_L) {
    return 0.5 * lambda * hessian_bound_L;
}

TruncatedWell::TruncatedWell(double eps, bool verify) : eps_(eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("TruncatedWell: eps must be positive");
    bound_ = verify ? hessian_bound(eps) : 2.0 / (eps * eps);
}

double TruncatedWell::value(const Vec2& d) const { return well_value(eps_, d[0], d[1]); }

Vec2 TruncatedWell::gradient(const Vec2& d) const {
    const double r2 = d[0] * d[0] + d[1] * d[1];
    const double e2 = eps_ * eps_;
    if (r2 <= 1.0) {
        const double s = (r2 - 1.0) / e2;
        return {s * d[0], s * d[1]};
    }
    const double r = std::sqrt(r2);
    const double s = (r - 1.0) / (2.0 * e2 * r);
    return {s * d[0], s * d[1]};
}

double QuarticWell::value(const Vec2& d) const {
    const double t = d[0] * d[0] + d[1] * d[1] - 1.0;
    return t * t / (4.0 * eps_ * eps_);
}

Vec2 QuarticWell::gradient(const Vec2& d) const {
    const double s = (d[0] * d[0] + d[1] * d[1] - 1.0) / (eps_ * eps_);
    return {s * d[0], s * d[1]};
}

}  // namespace smaflow
