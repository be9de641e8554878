#pragma once

// Director penalty potential: a double well in |d| with quadratic growth
// outside the unit circle, so its Hessian stays bounded and the explicit
// treatment in the director step remains stable for any time step.

#include "smaflow/fields.hpp"

namespace smaflow {

// Analytic bound on the spectral norm of the truncated-well Hessian, 2/eps^2.
// Verified at every call by sampling finite-difference Hessians over |d| <= 3
// on a 101 x 101 lattice; throws std::logic_error if a sample exceeds the
// bound by more than 0.1%.
double hessian_bound(double eps);

// Minimal stabilizer for the director step, lambda * L / 2.
double min_stabilizer(double lambda, double hessian_bound_L);

class TruncatedWell {
  public:
    // verify: run the sampling check for the stored bound (skippable for
    // tight inner loops that construct wells repeatedly)
    explicit TruncatedWell(double eps, bool verify = true);

    double eps() const { return eps_; }
    double bound() const { return bound_; }  // Hessian norm bound L

    // (|d|^2-1)^2 / (4 eps^2) inside the unit circle, (|d|-1)^2 / (4 eps^2)
    // outside; continuous with continuous gradient across |d| = 1
    double value(const Vec2& d) const;
    Vec2 gradient(const Vec2& d) const;

  private:
    double eps_;
    double bound_;
};

// Untruncated quartic well, for comparison runs only; its Hessian is
// unbounded so no stability guarantee applies.
class QuarticWell {
  public:
    explicit QuarticWell(double eps) : eps_(eps) {}
    double eps() const { return eps_; }
    double value(const Vec2& d) const;
    Vec2 gradient(const Vec2& d) const;

  private:
    double eps_;
};

}  // namespace smaflow
