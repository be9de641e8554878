#include <cmath>
#include <random>

#include "doctest.h"
#include "smaflow/potential.hpp"

using namespace smaflow;

TEST_CASE("well values on both branches") {
    TruncatedWell w(0.02);
    CHECK(w.value({0.0, 1.0}) == 0.0);
    CHECK(w.value({0.0, 0.0}) == doctest::Approx(625.0).epsilon(1e-14));
    CHECK(w.value({0.0, 2.0}) == doctest::Approx(625.0).epsilon(1e-14));

    // nonnegative, zero only on the unit circle
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        const Vec2 d{dist(rng), dist(rng)};
        const double v = w.value(d);
        CHECK(v >= 0.0);
        const double r = std::hypot(d[0], d[1]);
        if (std::abs(r - 1.0) > 1e-3) CHECK(v > 0.0);
    }
}

TEST_CASE("well gradient") {
    TruncatedWell w(0.02);
    SUBCASE("zeros") {
        for (const Vec2 d : {Vec2{0.0, 1.0}, Vec2{0.0, 0.0}, Vec2{1.0, 0.0}}) {
            const Vec2 gr = w.gradient(d);
            CHECK(std::abs(gr[0]) <= 1e-12);
            CHECK(std::abs(gr[1]) <= 1e-12);
        }
    }
    SUBCASE("outer branch value") {
        const Vec2 gr = w.gradient({0.0, 2.0});
        CHECK(gr[0] == 0.0);
        CHECK(gr[1] == doctest::Approx(1250.0).epsilon(1e-12));
    }
    SUBCASE("matches centered differences away from the circle") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> dist(-3.0, 3.0);
        const double h = 1e-6;
        int tested = 0;
        while (tested < 1000) {
            const Vec2 d{dist(rng), dist(rng)};
            const double r = std::hypot(d[0], d[1]);
            if (r > 3.0 || std::abs(r - 1.0) < 1e-3) continue;
            ++tested;
            const Vec2 gr = w.gradient(d);
            const double fdx =
                (w.value({d[0] + h, d[1]}) - w.value({d[0] - h, d[1]})) / (2.0 * h);
            const double fdy =
                (w.value({d[0], d[1] + h}) - w.value({d[0], d[1] - h})) / (2.0 * h);
            const double scale = std::max({std::abs(gr[0]), std::abs(gr[1]), 1.0});
            CHECK(std::abs(gr[0] - fdx) <= 1e-4 * scale);
            CHECK(std::abs(gr[1] - fdy) <= 1e-4 * scale);
        }
    }
    SUBCASE("both branch formulas agree on the circle") {
        const double eps = 0.02;
        for (double ang : {0.0, 0.3, 1.1, 2.9}) {
            const double c = std::cos(ang), s = std::sin(ang);
            // inner formula: (|d|^2-1) d / eps^2 ; outer: (|d|-1) d / (2 eps^2 |d|)
            const double inner0 = (1.0 - 1.0) * c / (eps * eps);
            const double outer0 = (1.0 - 1.0) * c / (2.0 * eps * eps * 1.0);
            CHECK(std::abs(inner0 - outer0) <= 1e-12);
            const double inner1 = (1.0 - 1.0) * s / (eps * eps);
            const double outer1 = (1.0 - 1.0) * s / (2.0 * eps * eps * 1.0);
            CHECK(std::abs(inner1 - outer1) <= 1e-12);
        }
    }
}

TEST_CASE("hessian bound values") {
    CHECK(hessian_bound(0.02) == doctest::Approx(5000.0).epsilon(1e-12));
    CHECK(hessian_bound(1.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("the bound is tight at the circle from inside") {
    // one-sided radial second difference at |d| = 1 along a lattice direction
    const double eps = 0.02;
    TruncatedWell w(eps, false);
    const double h = 1e-5;
    auto radial = [&](double r) { return w.value({r, 0.0}); };
    const double one_sided = (radial(1.0) - 2.0 * radial(1.0 - h) + radial(1.0 - 2.0 * h)) /
                             (h * h);
    const double bound = 2.0 / (eps * eps);
    CHECK(std::abs(one_sided - bound) <= 1e-3 * bound);
}

TEST_CASE("minimal stabilizer") {
    CHECK(min_stabilizer(2.5, hessian_bound(0.02)) == doctest::Approx(6250.0).epsilon(1e-12));
    CHECK(min_stabilizer(0.0, 5000.0) == 0.0);
    CHECK(min_stabilizer(2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("quartic well matches the truncated one inside the circle") {
    TruncatedWell w(0.05, false);
    QuarticWell q(0.05);
    for (double r : {0.0, 0.3, 0.7, 0.99}) {
        const Vec2 d{r, 0.0};
        CHECK(w.value(d) == doctest::Approx(q.value(d)).epsilon(1e-14));
        CHECK(w.gradient(d)[0] == doctest::Approx(q.gradient(d)[0]).epsilon(1e-14));
    }
    // and grows only quadratically outside
    CHECK(w.value({10.0, 0.0}) < q.value({10.0, 0.0}));
}
