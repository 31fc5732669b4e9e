#include <cmath>
#include <set>

#include "doctest.h"

#include "cantor/errors.hpp"
#include "cantor/geometry.hpp"
#include "cantor/rng.hpp"

using namespace cantor;

namespace {

// Reference distance: scan every square, no tree.
double brute_force_dist(Point p, const CantorGeometry& geom) {
    double best = kInf;
    for (size_t i = 0; i < geom.square_count(); ++i)
        best = std::min(best, dist_point_rect(p, geom.squares().rect(i)));
    return best;
}

Point random_domain_point(const CantorGeometry& geom, RngStream& rng) {
    while (true) {
        Point p{-2.0 + 5.0 * rng.uniform01(), -2.0 + 5.0 * rng.uniform01()};
        if (geom.in_domain(p)) return p;
    }
}

} // namespace

TEST_CASE("cantor construction counts and sides") {
    for (int depth = 0; depth <= 6; ++depth) {
        CantorGeometry geom(depth);
        CHECK(geom.square_count() == (size_t{1} << (2 * depth)));
        double side = std::ldexp(1.0, -2 * depth);
        for (size_t i = 0; i < geom.square_count(); ++i) {
            const Rect& r = geom.squares().rect(i);
            CHECK(r.width() == side);
            CHECK(r.height() == side);
        }
    }
}

TEST_CASE("depth edge cases") {
    CantorGeometry d0(0);
    CHECK(d0.square_count() == 1);
    CHECK(d0.squares().rect(0).x1 == 1.0);

    CantorGeometry d1(1);
    CHECK(d1.square_count() == 4);
    // each square contains a vertex of the unit square
    std::set<std::pair<double, double>> vertices{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    for (size_t i = 0; i < 4; ++i) {
        const Rect& r = d1.squares().rect(i);
        bool holds_vertex = false;
        for (auto [vx, vy] : vertices)
            if (r.contains(Point{vx, vy})) holds_vertex = true;
        CHECK(holds_vertex);
        CHECK(r.width() == 0.25);
    }

    CantorGeometry d2(2);
    CHECK(d2.square_count() == 16);
    CHECK(d2.squares().rect(0).width() == 1.0 / 16);

    CHECK_THROWS_AS(CantorGeometry(9), CapacityError);
    CHECK_THROWS_AS(CantorGeometry(-1), CapacityError);
}

TEST_CASE("children paths and exact measure additivity") {
    CantorGeometry geom(3);
    DyadicCube root;
    auto kids = children(root, geom);
    for (int d = 0; d < 4; ++d) {
        CHECK(kids[d].side() == 0.25);
        CHECK(kids[d].measure() == 0.25);
        CHECK(kids[d].path() == std::vector<int>{d});
    }

    DyadicCube q0 = root.child(0);
    auto grandkids = children(q0, geom);
    for (int d = 0; d < 4; ++d)
        CHECK(grandkids[d].path() == std::vector<int>{0, d});

    // measure additivity is exact in dyadic floating point
    for (int g = 0; g < 3; ++g) {
        uint64_t count = uint64_t{1} << (2 * g);
        for (uint64_t i = 0; i < count; ++i) {
            DyadicCube q = cube_from_path_index(g, i);
            double sum = 0.0;
            for (int d = 0; d < 4; ++d) sum += q.child(d).measure();
            CHECK(sum == q.measure());
        }
    }

    DyadicCube leaf = geom.cube_at({0.0, 0.0}, 3);
    CHECK_THROWS_AS(children(leaf, geom), CapacityError);
}

TEST_CASE("cube path round trips") {
    for (int g : {0, 1, 2, 5}) {
        uint64_t count = uint64_t{1} << (2 * g);
        for (uint64_t i = 0; i < count; i += 7) {
            DyadicCube q = cube_from_path_index(g, i);
            CHECK(q.path_index() == i);
            CHECK(cube_from_path(q.path()) == q);
        }
    }
}

TEST_CASE("dist_to_boundary examples and oracle") {
    CantorGeometry d1(1);
    // center of the unit square: nearest point is a corner of a side-1/4 square
    CHECK(dist_to_boundary({0.5, 0.5}, d1) ==
          doctest::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-15));
    // inside a removed-at-depth-1 square: not in the domain
    CHECK_THROWS_AS(dist_to_boundary({0.125, 0.125}, d1), DomainError);
    // far field: distance to the corner region of the unit square
    CHECK(dist_to_boundary({20.0, 0.0}, d1) == doctest::Approx(19.0));
    // outside the outer circle
    CHECK_THROWS_AS(dist_to_boundary({120.0, 0.0}, d1), DomainError);

    for (int depth : {2, 4, 6}) {
        CantorGeometry geom(depth);
        RngStream rng(42, depth);
        int n = depth == 6 ? 10000 : 2000;
        for (int i = 0; i < n; ++i) {
            Point p = random_domain_point(geom, rng);
            double fast = geom.dist_to_set(p);
            double brute = brute_force_dist(p, geom);
            CHECK(std::abs(fast - brute) <= 1e-12);
        }
    }
}

TEST_CASE("carleson packing norms") {
    CHECK(carleson_norm({}) == 0.0);

    DyadicCube root;
    CHECK(carleson_norm({root}) == 1.0);

    // one full partition layer
    std::vector<DyadicCube> layer;
    for (uint64_t i = 0; i < 16; ++i) layer.push_back(cube_from_path_index(2, i));
    CHECK(carleson_norm(layer) == doctest::Approx(1.0));

    // generations 0..k pack to k+1 at the root
    for (int k : {1, 2, 3}) {
        std::vector<DyadicCube> fam = all_cubes_upto(k);
        // oracle: direct summation over the lattice at the root
        double direct = 0.0;
        for (const DyadicCube& q : fam) direct += q.measure();
        CHECK(direct == doctest::Approx(k + 1.0));
        CHECK(carleson_norm(fam) == doctest::Approx(k + 1.0));
    }
}

TEST_CASE("B-hat balls") {
    CantorGeometry geom(3);
    DyadicCube root;
    Ball b = ball_B_hat(root, 0.3, geom);
    CHECK(b.center.x == 0.5);
    CHECK(b.radius == 0.3);
    // brute-force disjointness
    for (size_t i = 0; i < geom.square_count(); ++i)
        CHECK(dist_point_rect(b.center, geom.squares().rect(i)) > b.radius);

    CHECK_THROWS_AS(ball_B_hat(root, 0.36, geom), UsageError);
    CHECK_THROWS_AS(ball_B_hat(root, 0.0, geom), UsageError);

    DyadicCube g2 = cube_from_path_index(2, 5);
    Ball b2 = ball_B_hat(g2, 0.3, geom);
    CHECK(b2.radius == doctest::Approx(0.3 / 16));

    // disjointness across all cubes strictly above the leaf generation
    CantorGeometry deep(6);
    for (int g = 0; g <= 4; ++g) {
        uint64_t count = uint64_t{1} << (2 * g);
        for (uint64_t i = 0; i < count; ++i) {
            DyadicCube q = cube_from_path_index(g, i);
            CHECK_NOTHROW(ball_B_hat(q, 0.3, deep));
        }
    }
    // leaf-generation cubes are solid squares: the margin is required
    DyadicCube leaf = geom.cube_at({0, 0}, 3);
    CHECK_THROWS_AS(ball_B_hat(leaf, 0.3, geom), CapacityError);
}

TEST_CASE("corkscrew points") {
    CantorGeometry d1(1);
    Ball b = corkscrew_point({0, 0}, 1.0, d1);
    // fits in B(x, r) ∩ Omega
    CHECK(dist({0, 0}, b.center) + b.radius <= 1.0 + 1e-12);
    for (size_t i = 0; i < d1.square_count(); ++i)
        CHECK(dist_point_rect(b.center, d1.squares().rect(i)) >= b.radius - 1e-12);
    CHECK(b.radius >= 0.08);

    CantorGeometry geom(5);
    SUBCASE("ratio stays bounded below across dyadic radii") {
        Point x{0, 0};
        double c_min = kInf;
        for (int k = 0; k < 5; ++k) {
            double r = std::ldexp(1.0, -k); // 1, 1/2, ..., 1/16
            Ball ball = corkscrew_point(x, r, geom);
            CHECK(dist(x, ball.center) + ball.radius <= r + 1e-12);
            CHECK(geom.dist_to_set(ball.center) >= ball.radius - 1e-12);
            c_min = std::min(c_min, ball.radius / r);
        }
        CHECK(c_min >= 0.05);
    }
    SUBCASE("large radii and domain errors") {
        Ball big = corkscrew_point({1, 1}, 50.0, geom);
        CHECK(dist(Point{1, 1}, big.center) + big.radius <= 50.0);
        CHECK(big.radius >= 5.0);
        CHECK_THROWS_AS(corkscrew_point({0.4, 0.4}, 1.0, geom), DomainError);
        CHECK_THROWS_AS(corkscrew_point({0, 0}, 0.0, geom), UsageError);
        // below the resolved scale for an interior-square vertex
        CHECK_THROWS_AS(corkscrew_point({0, 0}, 1e-9, CantorGeometry(2)),
                        CapacityError);
    }
}

TEST_CASE("cones") {
    CantorGeometry geom(2);
    Point vertex{0, 0};
    CHECK_FALSE(in_cone(vertex, vertex, 2.0, 10.0, geom));

    // center of the root B-hat ball: inside for large aperture
    Point y{0.5, 0.5};
    double d = geom.dist_to_boundary(y);
    double need = dist(vertex, y) / d - 1.0;
    CHECK(in_cone(vertex, y, need + 0.1, 10.0, geom));
    CHECK_FALSE(in_cone(vertex, y, need - 0.1, 10.0, geom));

    // aperture monotonicity on random points
    RngStream rng(11, 0);
    for (int i = 0; i < 200; ++i) {
        Point p = random_domain_point(geom, rng);
        for (double alpha : {0.5, 1.0, 2.0}) {
            if (in_cone(vertex, p, alpha, 5.0, geom))
                CHECK(in_cone(vertex, p, alpha * 2, 5.0, geom));
        }
    }
}

TEST_CASE("small boundaries layer mass") {
    CantorGeometry geom(6);
    // calibrate C: mass(tau) <= C tau^{1/C} uniformly over cubes of gen <= 3
    double c_needed = 1.0;
    for (int g = 0; g <= 3; ++g) {
        uint64_t count = uint64_t{1} << (2 * g);
        for (uint64_t i = 0; i < count; ++i) {
            DyadicCube q = cube_from_path_index(g, i);
            for (double tau : {0.25, 1.0 / 16}) {
                double mass = geom.boundary_layer_mass(q, tau);
                // smallest C with mass <= C tau^(1/C); scan upward
                double c = 1.0;
                while (c < 64 && mass > c * std::pow(tau, 1.0 / c)) c += 1.0;
                c_needed = std::max(c_needed, c);
            }
        }
    }
    CHECK(c_needed <= 8.0); // calibrated: report stays small for this lattice
}

TEST_CASE("whitney decomposition") {
    CantorGeometry geom(3);
    Rect window{-0.5, -0.5, 1.5, 1.5};
    WhitneyReport rep = whitney_decompose(geom, window, 1.0 / 256);
    REQUIRE(!rep.cubes.empty());

    SUBCASE("cube properties") {
        for (const WhitneyCube& c : rep.cubes) {
            // diam < dist/20, which also gives 10P inside the domain
            CHECK(c.box.diam() < c.dist_boundary / 20.0);
            Rect dilated = c.box.inflated(4.5 * c.side);
            CHECK_FALSE(geom.squares().intersects(dilated));
        }
        CHECK(rep.d0 <= 1024);
        CHECK(rep.lambda <= 256.0);
    }

    SUBCASE("disjoint interiors and cover") {
        RngStream rng(5, 0);
        int covered = 0, tested = 0;
        for (int i = 0; i < 3000; ++i) {
            Point p{window.x0 + window.width() * rng.uniform01(),
                    window.y0 + window.height() * rng.uniform01()};
            if (!geom.in_domain(p)) continue;
            if (geom.dist_to_boundary(p) < 0.15) continue;
            ++tested;
            int hits = 0;
            for (const WhitneyCube& c : rep.cubes)
                if (c.box.x0 < p.x && p.x < c.box.x1 && c.box.y0 < p.y &&
                    p.y < c.box.y1)
                    ++hits;
            CHECK(hits <= 1);
            covered += hits;
        }
        REQUIRE(tested > 500);
        CHECK(covered == tested);
    }

    SUBCASE("neighbor side ratios within a factor of two") {
        for (size_t i = 0; i < rep.cubes.size(); ++i) {
            Rect di = rep.cubes[i].box.inflated(4.5 * rep.cubes[i].side);
            for (size_t j = i + 1; j < rep.cubes.size(); ++j) {
                Rect dj = rep.cubes[j].box.inflated(4.5 * rep.cubes[j].side);
                if (!di.intersects(dj)) continue;
                double ratio = rep.cubes[i].side / rep.cubes[j].side;
                CHECK(ratio <= 2.0 + 1e-12);
                CHECK(ratio >= 0.5 - 1e-12);
            }
        }
    }

    SUBCASE("far window gives near-uniform sides") {
        Rect far{30.0, 30.0, 32.0, 32.0};
        WhitneyReport far_rep = whitney_decompose(CantorGeometry(0), far, 0.01);
        REQUIRE(!far_rep.cubes.empty());
        double lo = kInf, hi = 0;
        for (const WhitneyCube& c : far_rep.cubes) {
            lo = std::min(lo, c.side);
            hi = std::max(hi, c.side);
        }
        CHECK(hi / lo <= 2.0);
    }
}
