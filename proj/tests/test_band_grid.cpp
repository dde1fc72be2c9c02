#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cpband/band_grid.hpp"
#include "cpband/stencil.hpp"

using namespace cpband;

TEST_CASE("bandwidth multiple for tri-cubic interpolation") {
    CHECK(band_lambda(3, 3) == doctest::Approx(std::sqrt(17.0)).epsilon(1e-15));
    CHECK(band_lambda(2, 3) == doctest::Approx(std::sqrt(13.0)).epsilon(1e-15));
    CHECK_THROWS(build_band(Surface::sphere(1.0), 0.1, 2));
    CHECK_THROWS(build_band(Surface::sphere(1.0), 0.1, 3, 4));
    CHECK_THROWS(build_band(Surface::sphere(1.0), -0.1));
}

TEST_CASE("hemisphere band: size, classification, cached projections") {
    BandGrid g = build_band(Surface::upper_hemisphere(1.0), 0.1);

    CHECK(g.size() == 7149);                      // pinned for regression
    CHECK(std::fabs((double)g.size() - 7161.0) <= 0.10 * 7161.0);
    CHECK(g.dx() == 0.1);
    CHECK(g.bandwidth() == doctest::Approx(std::sqrt(17.0) * 0.1).epsilon(1e-15));
    CHECK(g.degenerate_rejections() == 0);
    CHECK(g.exterior_count() > 0);
    CHECK(g.exterior_count() < g.size());

    Surface s = g.surface();
    Index n_ext = 0;
    for (Index r = 0; r < g.size(); ++r) {
        Vec3 x = g.position(r);
        auto res = closest_point(s, x);
        CHECK((g.cp(r) - res.cp).norm() <= 1e-13);
        CHECK(g.distance(r) == doctest::Approx(res.distance).epsilon(1e-12));
        CHECK(g.exterior(r) == res.on_boundary);
        if (g.exterior(r)) {
            ++n_ext;
        } else {
            // interior rows keep the plain closest point bit for bit
            CHECK(g.cpbar(r) == g.cp(r));
        }
        CHECK((g.cpbar(r) - modified_closest_point(s, x)).norm() <= 1e-12);

        // lattice/row round trip
        auto back = g.find(g.lattice(r).i, g.lattice(r).j, g.lattice(r).k);
        REQUIRE(back.has_value());
        CHECK(*back == r);
    }
    CHECK(n_ext == g.exterior_count());
}

TEST_CASE("band point count scales like dx^-2") {
    BandGrid coarse = build_band(Surface::upper_hemisphere(1.0), 0.1);
    BandGrid fine = build_band(Surface::upper_hemisphere(1.0), 0.05);
    CHECK(fine.size() == 24313);                  // pinned
    const double ratio = (double)fine.size() / (double)coarse.size();
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 4.5);
}

TEST_CASE("closed sphere has no exterior points") {
    BandGrid g = build_band(Surface::sphere(1.0), 0.1);
    CHECK(g.size() == 10906);                     // pinned
    CHECK(g.exterior_count() == 0);
    for (Index r = 0; r < g.size(); ++r) {
        CHECK(!g.exterior(r));
        CHECK(g.cpbar(r) == g.cp(r));
    }
}

TEST_CASE("mobius band: pinned size and boundary fraction") {
    BandGrid g = build_band(Surface::mobius_strip(1.0, 0.35), 0.1);
    CHECK(g.size() == 7098);                      // pinned
    CHECK(g.exterior_count() == 3504);            // pinned
    CHECK(g.degenerate_rejections() == 0);
}

TEST_CASE("band radius: nominal bandwidth plus closure slack") {
    BandGrid g = build_band(Surface::upper_hemisphere(1.0), 0.1);
    double maxdist = 0.0;
    Index within_nominal = 0;
    for (Index r = 0; r < g.size(); ++r) {
        maxdist = std::max(maxdist, g.distance(r));
        if (g.distance(r) <= g.bandwidth()) ++within_nominal;
    }
    // closure nodes may stick out, but never beyond one stencil reach
    CHECK(maxdist <= g.bandwidth() + 4.0 * g.dx() * std::sqrt(3.0));
    CHECK(maxdist >= 0.9 * g.bandwidth());        // band is actually full width
    CHECK((double)within_nominal >= 0.9 * (double)g.size());
}

TEST_CASE("stencil closure: every interpolation node is in the band") {
    BandGrid g = build_band(Surface::mobius_strip(1.0, 0.35), 0.1);
    const double dx = g.dx();
    auto check_block = [&](const Vec3& q) {
        // 4x4x4 tri-cubic block bracketing q, offsets -1..2 from the base
        const int bi = tricubic_base(q.x() / dx);
        const int bj = tricubic_base(q.y() / dx);
        const int bk = tricubic_base(q.z() / dx);
        for (int a = -1; a <= 2; ++a)
            for (int b = -1; b <= 2; ++b)
                for (int c = -1; c <= 2; ++c)
                    REQUIRE(g.find(bi + a, bj + b, bk + c).has_value());
    };
    for (Index r = 0; r < g.size(); ++r) {
        check_block(g.cp(r));
        check_block(g.cpbar(r));
    }
}

TEST_CASE("interpolation nodes carry their own difference neighbors") {
    // every node an interpolation row can reference also has the six face
    // neighbors needed by the 7-point Laplacian centered there
    BandGrid g = build_band(Surface::upper_hemisphere(1.0), 0.1);
    const double dx = g.dx();
    for (Index r = 0; r < g.size(); ++r) {
        const Vec3 q = g.cp(r);
        const int bi = tricubic_base(q.x() / dx);
        const int bj = tricubic_base(q.y() / dx);
        const int bk = tricubic_base(q.z() / dx);
        for (int a = -1; a <= 2; ++a)
            for (int b = -1; b <= 2; ++b)
                for (int c = -1; c <= 2; ++c) {
                    REQUIRE(g.find(bi + a + 1, bj + b, bk + c).has_value());
                    REQUIRE(g.find(bi + a - 1, bj + b, bk + c).has_value());
                    REQUIRE(g.find(bi + a, bj + b + 1, bk + c).has_value());
                    REQUIRE(g.find(bi + a, bj + b - 1, bk + c).has_value());
                    REQUIRE(g.find(bi + a, bj + b, bk + c + 1).has_value());
                    REQUIRE(g.find(bi + a, bj + b, bk + c - 1).has_value());
                }
    }
}

TEST_CASE("parallel construction reproduces the serial band bit for bit") {
    BandGrid a = build_band(Surface::upper_hemisphere(1.0), 0.1, 3, 2, Exec::Serial);
    BandGrid b = build_band(Surface::upper_hemisphere(1.0), 0.1, 3, 2, Exec::Parallel);
    REQUIRE(a.size() == b.size());
    CHECK(a.exterior_count() == b.exterior_count());
    for (Index r = 0; r < a.size(); ++r) {
        CHECK(a.lattice(r).i == b.lattice(r).i);
        CHECK(a.lattice(r).j == b.lattice(r).j);
        CHECK(a.lattice(r).k == b.lattice(r).k);
        CHECK(a.cp(r) == b.cp(r));
        CHECK(a.cpbar(r) == b.cpbar(r));
        CHECK(a.distance(r) == b.distance(r));
        CHECK(a.exterior(r) == b.exterior(r));
    }
}

TEST_CASE("repeated builds are identical") {
    BandGrid a = build_band(Surface::mobius_strip(1.0, 0.35), 0.1);
    BandGrid b = build_band(Surface::mobius_strip(1.0, 0.35), 0.1);
    REQUIRE(a.size() == b.size());
    for (Index r = 0; r < a.size(); ++r) {
        CHECK(a.cp(r) == b.cp(r));
        CHECK(a.lattice(r).i == b.lattice(r).i);
    }
}

TEST_CASE("lattice key packing is collision free over the working range") {
    CHECK(BandGrid::pack(0, 0, 0) != BandGrid::pack(0, 0, 1));
    CHECK(BandGrid::pack(1, 2, 3) != BandGrid::pack(3, 2, 1));
    CHECK(BandGrid::pack(-1, 0, 0) != BandGrid::pack(0, -1, 0));
    CHECK(BandGrid::pack(1000, -1000, 1000) != BandGrid::pack(999, -1000, 1000));
}
