#include "cantor/boxes.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "cantor/errors.hpp"
#include "cantor/rng.hpp"

namespace cantor {

const char* to_string(BoxRegion r) {
    switch (r) {
        case BoxRegion::InnerBase: return "inner_base";
        case BoxRegion::MiddleBase: return "middle_base";
        case BoxRegion::OuterBase: return "outer_base";
        case BoxRegion::InnerSide: return "inner_side";
        case BoxRegion::MiddleSide: return "middle_side";
        case BoxRegion::OuterSide: return "outer_side";
        case BoxRegion::Content: return "content";
        case BoxRegion::Top: return "top";
        case BoxRegion::Interior: return "interior";
        case BoxRegion::Outside: return "outside";
    }
    return "?";
}

const char* to_string(BoxOrientation o) {
    switch (o) {
        case BoxOrientation::Up: return "up";
        case BoxOrientation::Left: return "left";
        case BoxOrientation::Down: return "down";
        case BoxOrientation::Right: return "right";
    }
    return "?";
}

namespace {
Point rotate(Point p, BoxOrientation o) {
    switch (o) {
        case BoxOrientation::Up: return p;
        case BoxOrientation::Left: return {-p.y, p.x};
        case BoxOrientation::Down: return {-p.x, -p.y};
        case BoxOrientation::Right: return {p.y, -p.x};
    }
    return p;
}

Point unrotate(Point p, BoxOrientation o) {
    switch (o) {
        case BoxOrientation::Up: return p;
        case BoxOrientation::Left: return {p.y, -p.x};
        case BoxOrientation::Down: return {-p.x, -p.y};
        case BoxOrientation::Right: return {-p.y, p.x};
    }
    return p;
}
} // namespace

Point EpsBox::to_world(Point local) const {
    return anchor + scale * rotate(local, orientation);
}

Point EpsBox::to_local(Point world) const {
    return (1.0 / scale) * unrotate(world - anchor, orientation);
}

double EpsBox::diam() const {
    return scale * std::hypot(2.0, 10.0 * eps);
}

Rect EpsBox::world_rect(const Rect& local) const {
    Point a = to_world({local.x0, local.y0});
    Point b = to_world({local.x1, local.y1});
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
            std::max(a.y, b.y)};
}

std::array<Rect, 9> EpsBox::slab_rects() const {
    double e = eps;
    double t3 = e / 3, t23 = 2 * e / 3;
    std::array<Rect, 9> local = {
        Rect{-1, 0, 1, t3},                          // outer base
        Rect{-(1 - t3), t3, 1 - t3, t23},            // middle base
        Rect{-(1 - t23), t23, 1 - t23, e},           // inner base
        Rect{1 - e, e, 1 - t23, 10 * e},             // inner side +
        Rect{-(1 - t23), e, -(1 - e), 10 * e},       // inner side -
        Rect{1 - t23, t23, 1 - t3, 10 * e},          // middle side +
        Rect{-(1 - t3), t23, -(1 - t23), 10 * e},    // middle side -
        Rect{1 - t3, t3, 1, 10 * e},                 // outer side +
        Rect{-1, t3, -(1 - t3), 10 * e},             // outer side -
    };
    std::array<Rect, 9> world;
    for (size_t i = 0; i < 9; ++i) world[i] = world_rect(local[i]);
    return world;
}

Rect EpsBox::hull() const { return world_rect({-1, 0, 1, 10 * eps}); }

Rect EpsBox::hull_inner() const {
    double w = 1 - 2 * eps / 3;
    return world_rect({-w, 2 * eps / 3, w, 10 * eps});
}

Rect EpsBox::hull_middle() const {
    double w = 1 - eps / 3;
    return world_rect({-w, eps / 3, w, 10 * eps});
}

Rect EpsBox::content_rect() const {
    return world_rect({-(1 - eps), eps, 1 - eps, 2 * eps});
}

Rect EpsBox::interior_rect() const {
    return world_rect({-(1 - eps), eps, 1 - eps, 9 * eps});
}

Rect EpsBox::top_rect() const { return world_rect({-1, 10 * eps, 1, 10 * eps}); }

BoxRegion region_of(Point p, const EpsBox& box) {
    Point q = box.to_local(p);
    double e = box.eps;
    double h = q.y;
    double ax = std::abs(q.x);
    double t3 = e / 3, t23 = 2 * e / 3;
    // Shared faces resolve to the first match: inner-most region wins.
    if (h >= t23 && h <= e && ax <= 1 - t23) return BoxRegion::InnerBase;
    if (h >= t3 && h <= t23 && ax <= 1 - t3) return BoxRegion::MiddleBase;
    if (h >= 0 && h <= t3 && ax <= 1) return BoxRegion::OuterBase;
    if (h >= e && h <= 10 * e && ax >= 1 - e && ax <= 1 - t23)
        return BoxRegion::InnerSide;
    if (h >= t23 && h <= 10 * e && ax >= 1 - t23 && ax <= 1 - t3)
        return BoxRegion::MiddleSide;
    if (h >= t3 && h <= 10 * e && ax >= 1 - t3 && ax <= 1)
        return BoxRegion::OuterSide;
    if (h >= e && h <= 2 * e && ax <= 1 - e) return BoxRegion::Content;
    if (h > e && h < 9 * e && ax <= 1 - e) return BoxRegion::Interior;
    if (h == 10 * e && ax <= 1) return BoxRegion::Top;
    return BoxRegion::Outside;
}

PartitionReport box_partition_check(const EpsBox& box, long samples,
                                    uint64_t seed) {
    if (samples < 1) throw UsageError("partition check needs samples >= 1");
    double e = box.eps;
    double t3 = e / 3, t23 = 2 * e / 3;

    // Independent closed predicates for the six regions (local coords).
    auto in_region = [&](int k, double ax, double h, bool strict) {
        auto between = [&](double lo, double v, double hi) {
            return strict ? (v > lo && v < hi) : (v >= lo && v <= hi);
        };
        switch (k) {
            case 0: return between(t23, h, e) && (strict ? ax < 1 - t23 : ax <= 1 - t23);
            case 1: return between(t3, h, t23) && (strict ? ax < 1 - t3 : ax <= 1 - t3);
            case 2: return between(0, h, t3) && (strict ? ax < 1 : ax <= 1);
            case 3: return between(e, h, 10 * e) && between(1 - e, ax, 1 - t23);
            case 4: return between(t23, h, 10 * e) && between(1 - t23, ax, 1 - t3);
            default: return between(t3, h, 10 * e) && between(1 - t3, ax, 1);
        }
    };

    PartitionReport rep;
    rep.samples = samples;
    RngStream rng(seed, 0x80cebabe);
    for (long s = 0; s < samples; ++s) {
        double x = -1.1 + 2.2 * rng.uniform01();
        double h = -e + 12 * e * rng.uniform01();
        double ax = std::abs(x);

        int strict_count = 0, closed_count = 0;
        for (int k = 0; k < 6; ++k) {
            if (in_region(k, ax, h, true)) ++strict_count;
            if (in_region(k, ax, h, false)) ++closed_count;
        }
        if (strict_count > 1) ++rep.overlap_violations;

        Point world = box.to_world({x, h});
        BoxRegion r = region_of(world, box);
        bool classified_in_m = r == BoxRegion::InnerBase || r == BoxRegion::MiddleBase ||
                               r == BoxRegion::OuterBase || r == BoxRegion::InnerSide ||
                               r == BoxRegion::MiddleSide || r == BoxRegion::OuterSide;
        if (closed_count > 0 && !classified_in_m) ++rep.coverage_gaps;

        bool strict_interior = h > e && h < 9 * e && ax < 1 - e;
        if (strict_interior && strict_count > 0) ++rep.interior_in_m;

        if (r == BoxRegion::Content && !(h >= e && h <= 2 * e))
            ++rep.content_outside_band;
    }

    // Exact face points: inner-most tie-break and the named corners.
    bool corners_ok =
        region_of(box.to_world({1 - t23, e}), box) == BoxRegion::InnerBase &&
        region_of(box.to_world({0, 10 * e}), box) == BoxRegion::Top &&
        region_of(box.to_world({0, 5 * e}), box) == BoxRegion::Interior &&
        region_of(box.to_world({0, 1.5 * e}), box) == BoxRegion::Content &&
        region_of(box.to_world({0, e / 6}), box) == BoxRegion::OuterBase;

    rep.pass = corners_ok && rep.overlap_violations == 0 &&
               rep.coverage_gaps == 0 && rep.interior_in_m == 0 &&
               rep.content_outside_band == 0;
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

constexpr BoxOrientation kOrientations[4] = {
    BoxOrientation::Up, BoxOrientation::Down, BoxOrientation::Left,
    BoxOrientation::Right};

bool box_conditions_hold(const EpsBox& box, Point x, double t,
                         const SquareSet& boundary) {
    // Containment in B(x,t): hull corners within t of x.
    Rect h = box.hull();
    for (Point c : {Point{h.x0, h.y0}, Point{h.x1, h.y0}, Point{h.x0, h.y1},
                    Point{h.x1, h.y1}})
        if (dist(c, x) > t) return false;
    // The slab must miss the set while the content meets it.
    if (!boundary.intersects(box.content_rect())) return false;
    for (const Rect& r : box.slab_rects())
        if (boundary.intersects(r)) return false;
    return true;
}

// Branch-and-bound over anchor cells: a cell [ax,ax+w] x [ay,ay+w] is pruned
// when the content inflated over the whole cell misses the set (no anchor can
// meet it) or when some slab eroded over the cell still hits the set (every
// anchor fails). The leaf order is row-major depth-first, which fixes the
// deterministic scan order.
struct AnchorScan {
    const SquareSet& boundary;
    const FindBoxOptions& opts;
    Point x;
    double t;
    double eps;
    double scale;
    BoxOrientation orient;
    double pitch;
    std::array<Rect, 9> slabs; // at anchor (0,0)
    Rect content;
    Rect hull;

    std::optional<EpsBox> search() {
        double span = 2 * (t + 3 * scale);
        double size = pitch;
        while (size < span) size *= 2;
        double ax = std::floor((x.x - t - 3 * scale) / size) * size;
        double ay = std::floor((x.y - t - 3 * scale) / size) * size;
        return visit(ax, ay, size);
    }

    std::optional<EpsBox> visit(double ax, double ay, double size) {
        Rect inflated{content.x0 + ax, content.y0 + ay, content.x1 + ax + size,
                      content.y1 + ay + size};
        if (!boundary.intersects(inflated)) return std::nullopt;
        Rect hull_union{hull.x0 + ax, hull.y0 + ay, hull.x1 + ax + size,
                        hull.y1 + ay + size};
        if (dist_point_rect(x, hull_union) > t) return std::nullopt;
        for (const Rect& s : slabs) {
            Rect eroded{s.x0 + ax + size, s.y0 + ay + size, s.x1 + ax,
                        s.y1 + ay};
            if (eroded.x0 <= eroded.x1 && eroded.y0 <= eroded.y1 &&
                boundary.intersects(eroded))
                return std::nullopt;
        }
        if (size <= pitch * 1.000001) {
            EpsBox cand{eps, {ax, ay}, scale, orient};
            if (!box_conditions_hold(cand, x, t, boundary)) return std::nullopt;
            if (opts.predicate && !opts.predicate(cand)) return std::nullopt;
            return cand;
        }
        double h = 0.5 * size;
        for (double dy : {0.0, h})
            for (double dx : {0.0, h})
                if (auto r = visit(ax + dx, ay + dy, h)) return r;
        return std::nullopt;
    }
};

} // namespace

std::optional<EpsBox> find_box(Point x, double t, const SquareSet& boundary,
                               double eps, const FindBoxOptions& opts) {
    if (eps <= 0 || eps > 0.1)
        throw UsageError("box eps must lie in (0, 1/10]");
    if (t <= 0) throw UsageError("scan scale t must be positive");

    double d_std = std::hypot(2.0, 10.0 * eps);
    double s_max = t / d_std; // diam == t at this scale

    for (BoxOrientation orient : kOrientations) {
        double s = s_max;
        for (int halving = 0; halving < opts.max_scale_halvings;
             ++halving, s *= 0.5) {
            if (s * d_std < eps * t) break; // below the diameter threshold
            EpsBox proto{eps, {0, 0}, s, orient};
            AnchorScan scan{boundary,
                            opts,
                            x,
                            t,
                            eps,
                            s,
                            orient,
                            opts.pitch_factor * eps * s,
                            proto.slab_rects(),
                            proto.content_rect(),
                            proto.hull()};
            if (auto found = scan.search()) return found;
        }
    }
    return std::nullopt;
}

std::optional<std::array<Point, 3>> find_separated_points(
    const EpsBox& box, const SquareSet& boundary, double mu) {
    if (mu <= 0) throw UsageError("mu must be positive");
    std::vector<Point> corners = boundary.corners_in(box.interior_rect());
    std::vector<Point> inside;
    for (Point p : corners)
        if (region_of(p, box) == BoxRegion::Interior) inside.push_back(p);
    std::sort(inside.begin(), inside.end(), [&](Point a, Point b) {
        double ha = box.local_height(a), hb = box.local_height(b);
        return ha < hb || (ha == hb && a.x < b.x);
    });
    double gap = mu * box.diam();
    size_t n = inside.size();
    for (size_t i = 0; i < n; ++i) {
        double hi_ = box.local_height(inside[i]);
        for (size_t j = i + 1; j < n; ++j) {
            double hj = box.local_height(inside[j]);
            if (hj - hi_ <= gap) continue;
            for (size_t k = j + 1; k < n; ++k) {
                double hk = box.local_height(inside[k]);
                if (hk - hj > gap)
                    return std::array<Point, 3>{inside[i], inside[j], inside[k]};
            }
            break; // j was the earliest viable middle for this i
        }
    }
    return std::nullopt;
}

std::vector<BoxWitness> build_Bd(double eps, double mu,
                                 const SquareSet& boundary, int max_gen,
                                 const BdOptions& opts) {
    if (!(eps > 0 && eps <= 0.1 && mu > 0 && mu < 1))
        throw UsageError("build_Bd needs eps in (0,1/10], mu in (0,1)");
    double size_lo = opts.size_lo > 0 ? opts.size_lo : mu * mu / 100.0;
    double size_hi = opts.size_hi > 0 ? opts.size_hi : 100.0 / (mu * mu);

    std::vector<DyadicCube> cubes = all_cubes_upto(max_gen);

    // Candidate search is admission-independent, so it can run out of order;
    // the greedy pass below stays canonical.
    std::vector<std::optional<BoxWitness>> candidates(cubes.size());
    for (size_t i = 0; i < cubes.size(); ++i) {
        const DyadicCube& q = cubes[i];
        FindBoxOptions find = opts.find;
        find.predicate = [&](const EpsBox& b) {
            return find_separated_points(b, boundary, mu).has_value();
        };
        auto box = find_box(q.anchor(), q.side(), boundary, eps, find);
        if (box) {
            auto pts = find_separated_points(*box, boundary, mu);
            candidates[i] = BoxWitness{q, *box, *pts};
        }
    }

    std::vector<BoxWitness> admitted;
    for (const auto& cand : candidates) {
        if (!cand) continue;
        double d = cand->box.diam();
        bool excluded = false;
        for (const BoxWitness& w : admitted) {
            double dprev = w.box.diam();
            bool similar = d >= size_lo * dprev && d <= size_hi * dprev;
            if (!similar) continue;
            double cube_dist = dist_rect_rect(cand->cube.rect(), w.cube.rect());
            if (cube_dist <= 10.0 * (cand->cube.side() + w.cube.side())) {
                excluded = true;
                break;
            }
        }
        if (!excluded) admitted.push_back(*cand);
    }
    return admitted;
}

} // namespace cantor
