#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cantor/geom.hpp"
#include "cantor/squareset.hpp"

namespace cantor {

/// Generation-j cell of the quaternary boundary lattice. Coordinates are
/// exact base-4 integers: the cell's square is [ix,ix+1] x [iy,iy+1] scaled
/// by 4^-j. Side and measure are both 4^-j (measure normalized to total 1).
struct DyadicCube {
    int gen = 0;
    uint32_t ix = 0;
    uint32_t iy = 0;

    double side() const;
    double measure() const { return side(); }
    Point center() const;
    Rect rect() const;
    Point anchor() const; // min-coordinate corner, a boundary point at every depth

    /// Quaternary digits root-to-leaf: 0 SW, 1 SE, 2 NW, 3 NE.
    std::vector<int> path() const;
    std::string path_string() const;

    /// Index in the generation's path-lexicographic order (base-4 path value).
    uint64_t path_index() const;

    DyadicCube parent() const;
    DyadicCube child(int digit) const;
    DyadicCube ancestor(int levels) const;

    bool contains(const DyadicCube& q) const;
    bool operator==(const DyadicCube& o) const {
        return gen == o.gen && ix == o.ix && iy == o.iy;
    }
};

DyadicCube cube_from_path(const std::vector<int>& digits);
DyadicCube cube_from_path_index(int gen, uint64_t index);
/// Canonical (generation-major, path-lexicographic) enumeration of all cubes
/// with generation <= max_gen.
std::vector<DyadicCube> all_cubes_upto(int max_gen);

/// Axis-aligned dyadic square of a Whitney decomposition.
struct WhitneyCube {
    Rect box;
    double side = 0.0;
    double dist_boundary = 0.0; // distance from the square to the domain boundary
};

struct WhitneyReport {
    std::vector<WhitneyCube> cubes;
    double lambda = 0.0; // smallest dilation factor making every cube meet the boundary
    int d0 = 0;          // max number of cubes sharing a 10x-dilation overlap
};

/// Depth-n approximation of the four-corner fractal inside [0,1]^2, living
/// in the domain Omega = B(0, outer_radius) \ E_n.
class CantorGeometry {
public:
    static constexpr int kDefaultMaxDepth = 8;

    CantorGeometry(int depth, double outer_radius = 100.0,
                   int max_depth = kDefaultMaxDepth);

    int depth() const { return depth_; }
    double outer_radius() const { return outer_radius_; }
    size_t square_count() const { return squares_.size(); }
    double square_side() const { return side_; }

    const SquareSet& squares() const { return squares_; }
    /// Leaf square of a generation-depth cube, indexed in path order.
    const Rect& leaf(uint64_t path_index) const { return squares_.rect(path_index); }
    DyadicCube leaf_cube(uint64_t path_index) const;

    /// Distance to E_n alone (0 on the squares).
    double dist_to_set(Point p) const { return squares_.distance(p); }

    /// Distance to the full boundary E_n plus the outer circle; throws
    /// DomainError when p is not in Omega.
    double dist_to_boundary(Point p) const;
    bool in_domain(Point p) const;

    /// Path index of the nearest generation-depth square.
    uint64_t nearest_leaf(Point p) const;

    /// Generation-g cube containing p, for p in the closed unit square
    /// (points on shared cube faces resolve to the smaller index).
    DyadicCube cube_at(Point p, int g) const;

    /// Leaf path-index range [lo, hi) of the subtree under cube q.
    void leaf_range(const DyadicCube& q, uint64_t& lo, uint64_t& hi) const;

    /// Exact mass of leaves of q within tau*l(q) of E \ q (the lattice
    /// small-boundary layer), as a fraction of sigma(q).
    double boundary_layer_mass(const DyadicCube& q, double tau) const;

private:
    int depth_;
    double outer_radius_;
    double side_;
    SquareSet squares_;
};

// -- lattice / domain operations --------------------------------------------

CantorGeometry build_cantor(int depth, double outer_radius = 100.0,
                            int max_depth = CantorGeometry::kDefaultMaxDepth);

std::array<DyadicCube, 4> children(const DyadicCube& cube,
                                   const CantorGeometry& geom);

double dist_to_boundary(Point p, const CantorGeometry& geom);

/// Whitney cubes covering window ∩ Omega down to squares of side >= min_side.
/// Cubes satisfy 10P ⊂ Omega, diam(P) < dist(P,∂Ω)/20, and neighbor side
/// ratios in {1/2, 1, 2}; lambda and D0 are measured and reported.
WhitneyReport whitney_decompose(const CantorGeometry& geom, const Rect& window,
                                double min_side);

/// Interior ball of radius >= c_ck * r inside B(x, r) ∩ Omega, for x on E_n.
Ball corkscrew_point(Point x, double r, const CantorGeometry& geom);

/// sup over lattice cubes R of sum_{Q in family, Q ⊆ R} sigma(Q)/sigma(R).
double carleson_norm(const std::vector<DyadicCube>& family);

/// B(x_Q, c*l(Q)); requires 0 < c < sqrt(2)/4 and gen(Q) < depth so the ball
/// is disjoint from E_n (verified against the square list).
Ball ball_B_hat(const DyadicCube& cube, double c, const CantorGeometry& geom);

inline constexpr double kBHatMaxC = 0.35355339059327373; // sqrt(2)/4

/// y lies in the aperture-alpha cone with vertex on the boundary, truncated
/// at radius R: |vertex-y| < (1+alpha) dist(y, ∂Ω) and |vertex-y| < R.
bool in_cone(Point vertex, Point y, double alpha, double R,
             const CantorGeometry& geom);

} // namespace cantor
