#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "cantor/geometry.hpp"

namespace cantor {

enum class BoxRegion {
    InnerBase,
    MiddleBase,
    OuterBase,
    InnerSide,
    MiddleSide,
    OuterSide,
    Content,
    Top,
    Interior,
    Outside,
};

const char* to_string(BoxRegion r);

/// Height-axis direction of a translated/dilated standard box. Up keeps the
/// standard frame; the others rotate it by multiples of 90 degrees, so every
/// region stays an axis-aligned rectangle in world coordinates.
enum class BoxOrientation { Up, Left, Down, Right };

const char* to_string(BoxOrientation o);

/// Translated/dilated/rotated copy of the standard box: a width-2,
/// height-10*eps slab in local coordinates, mapped by
/// world = anchor + scale * R(orientation) * local.
struct EpsBox {
    double eps = 0.1;
    Point anchor;            // image of the local origin
    double scale = 1.0;
    BoxOrientation orientation = BoxOrientation::Up;

    Point to_world(Point local) const;
    Point to_local(Point world) const;
    double local_height(Point world) const { return to_local(world).y; }

    /// diam = scale * diam of the standard slab.
    double diam() const;

    Rect world_rect(const Rect& local) const;

    std::array<Rect, 9> slab_rects() const; // the six regions (sides split in two)
    Rect hull() const;                       // co(M): [-1,1] x [0,10eps] local
    Rect hull_inner() const;                 // co(inner base + inner sides)
    Rect hull_middle() const;                // co(middle base + middle sides)
    Rect content_rect() const;
    Rect interior_rect() const;
    Rect top_rect() const;
};

BoxRegion region_of(Point p, const EpsBox& box);

struct PartitionReport {
    long samples = 0;
    long overlap_violations = 0;   // in two region interiors at once
    long coverage_gaps = 0;        // in closed M but classified Outside
    long interior_in_m = 0;        // strict-interior points claimed by M
    long content_outside_band = 0; // content points off the [eps,2eps] band
    bool pass = false;
};

/// Monte Carlo + exact-corner verification of the six-region partition.
PartitionReport box_partition_check(const EpsBox& box, long samples,
                                    uint64_t seed = 1);

struct FindBoxOptions {
    /// Anchor grid pitch as a fraction of eps*scale.
    double pitch_factor = 0.25;
    /// Stop refining once diam would drop below eps*t.
    int max_scale_halvings = 24;
    /// Extra admission predicate (e.g. separated-point existence).
    std::function<bool(const EpsBox&)> predicate;
};

/// Deterministic scan (orientation, then scale coarse-to-fine, then a dyadic
/// anchor grid) for a box inside B(x,t) with diam >= eps*t, disjoint from the
/// boundary set but with the set meeting its content.
std::optional<EpsBox> find_box(Point x, double t, const SquareSet& boundary,
                               double eps, const FindBoxOptions& opts = {});

/// Three boundary-set points in the box interior with consecutive local
/// heights separated by more than mu*diam.
std::optional<std::array<Point, 3>> find_separated_points(
    const EpsBox& box, const SquareSet& boundary, double mu);

struct BoxWitness {
    DyadicCube cube;
    EpsBox box;
    std::array<Point, 3> separated;
};

struct BdOptions {
    /// Size-window factors of the admission exclusion. Defaults follow the
    /// mu-based rule (lo = mu^2/100, hi = 100/mu^2); narrow overrides give
    /// same-scale-only exclusion for small-depth studies.
    double size_lo = -1.0;
    double size_hi = -1.0;
    FindBoxOptions find;
};

/// Greedy witness family over the lattice in canonical order
/// (generation-major, path-lexicographic): a cube is admitted unless a
/// previously admitted witness of comparable box size sits within
/// 10*(l(Q)+l(Q')) of it.
std::vector<BoxWitness> build_Bd(double eps, double mu,
                                 const SquareSet& boundary, int max_gen,
                                 const BdOptions& opts = {});

} // namespace cantor
