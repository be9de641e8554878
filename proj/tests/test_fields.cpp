#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "smaflow/fields.hpp"

using namespace smaflow;

TEST_CASE("make_grid spacings") {
    Grid g = make_grid(128, 128, 4.0, -1.0, 1.0);
    CHECK(g.hx == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(g.hy == doctest::Approx(2.0 / 127.0).epsilon(1e-15));

    Grid g2 = make_grid(4, 3, 1.0, 0.0, 2.0);
    CHECK(g2.hx == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g2.hy == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("make_grid rejects bad input") {
    CHECK_THROWS_AS(make_grid(3, 3, 1.0, 0.0, 1.0), std::invalid_argument);  // odd nx
    CHECK_THROWS_AS(make_grid(2, 3, 1.0, 0.0, 1.0), std::invalid_argument);  // too small
    CHECK_THROWS_AS(make_grid(8, 2, 1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, -1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, 1.0, 1.0, 1.0), std::invalid_argument);  // degenerate y
}

TEST_CASE("dirichlet enforcement is idempotent") {
    Grid g = make_grid(8, 5, 1.0, -1.0, 1.0);
    ScalarField f(g, dirichlet_bc(-1.0, 1.0));
    f.sample([](double x, double y) { return x + 3.0 * y; });
    f.apply_bc();
    ScalarField once = f;
    f.apply_bc();
    for (std::size_t i = 0; i < f.v.size(); ++i) CHECK(f.v[i] == once.v[i]);
    for (int ix = 0; ix < g.nx; ++ix) {
        CHECK(f.at(ix, 0) == -1.0);
        CHECK(f.at(ix, g.ny - 1) == 1.0);
    }
}

TEST_CASE("finite scan") {
    Grid g = make_grid(4, 3, 1.0, 0.0, 1.0);
    ScalarField f(g);
    CHECK(f.all_finite());
    f.at(1, 1) = std::nan("");
    CHECK(!f.all_finite());
}

TEST_CASE("zero_mean_noise basics") {
    Grid g = make_grid(64, 65, 4.0, -1.0, 1.0);

    SUBCASE("amplitude zero is identically zero") {
        ScalarField f = zero_mean_noise(g, 0.0, 7);
        for (double x : f.v) CHECK(x == 0.0);
    }
    SUBCASE("mean removed and range bounded") {
        const double amp = 0.001;
        for (std::uint64_t seed : {1ull, 42ull, 9999ull}) {
            ScalarField f = zero_mean_noise(g, amp, seed);
            double sum = 0.0, maxv = 0.0;
            for (double x : f.v) {
                sum += x;
                maxv = std::max(maxv, std::abs(x));
            }
            CHECK(std::abs(sum / double(f.v.size())) <= 1e-14 * amp);
            CHECK(maxv <= 2.0 * amp);
        }
    }
    SUBCASE("same seed gives bit-identical fields") {
        ScalarField a = zero_mean_noise(g, 0.5, 1234);
        ScalarField b = zero_mean_noise(g, 0.5, 1234);
        CHECK(a.v == b.v);
        ScalarField c = zero_mean_noise(g, 0.5, 1235);
        CHECK(a.v != c.v);
    }
    SUBCASE("interior-only keeps wall rows zero and interior mean zero") {
        ScalarField f = zero_mean_noise(g, 0.01, 3, true);
        for (int ix = 0; ix < g.nx; ++ix) {
            CHECK(f.at(ix, 0) == 0.0);
            CHECK(f.at(ix, g.ny - 1) == 0.0);
        }
        double sum = 0.0;
        for (int iy = 1; iy < g.ny - 1; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) sum += f.at(ix, iy);
        CHECK(std::abs(sum / double(g.nx * (g.ny - 2))) <= 1e-14 * 0.01);
    }
}

TEST_CASE("parameter validation") {
    PhysParams p;
    CHECK_NOTHROW(p.validate());
    p.hy_dir = 0.9;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.hy_dir = 1.0;
    p.eta = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.eta = 0.02;
    p.tau = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.tau = 0.0;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("state grid invariant") {
    Grid g = make_grid(8, 5, 1.0, 0.0, 1.0);
    Grid g2 = make_grid(8, 7, 1.0, 0.0, 1.0);
    State s;
    s.phi = ScalarField(g);
    s.p = ScalarField(g);
    s.u = VectorField2(g);
    s.d = VectorField2(g);
    CHECK_NOTHROW(s.validate());
    s.p = ScalarField(g2);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
