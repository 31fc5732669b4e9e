#include "cantor/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

#include "cantor/errors.hpp"

namespace cantor {

namespace {
double pow4(int g) { return std::ldexp(1.0, -2 * g); } // exact 4^-g

uint64_t cube_key(const DyadicCube& q) {
    return (static_cast<uint64_t>(q.gen) << 58) |
           (static_cast<uint64_t>(q.ix) << 29) | q.iy;
}
} // namespace

double DyadicCube::side() const { return pow4(gen); }

Point DyadicCube::center() const {
    double s = side();
    return {(ix + 0.5) * s, (iy + 0.5) * s};
}

Rect DyadicCube::rect() const {
    double s = side();
    return {ix * s, iy * s, (ix + 1) * s, (iy + 1) * s};
}

Point DyadicCube::anchor() const {
    double s = side();
    return {ix * s, iy * s};
}

std::vector<int> DyadicCube::path() const {
    std::vector<int> digits(gen);
    uint32_t x = ix, y = iy;
    for (int i = gen - 1; i >= 0; --i) {
        int dx = x & 3, dy = y & 3;
        digits[i] = (dx ? 1 : 0) + (dy ? 2 : 0);
        x >>= 2;
        y >>= 2;
    }
    return digits;
}

std::string DyadicCube::path_string() const {
    std::string s;
    for (int d : path()) s.push_back(static_cast<char>('0' + d));
    return s.empty() ? "-" : s;
}

uint64_t DyadicCube::path_index() const {
    uint64_t idx = 0;
    for (int d : path()) idx = 4 * idx + static_cast<uint64_t>(d);
    return idx;
}

DyadicCube DyadicCube::parent() const {
    if (gen == 0) throw DomainError("root cube has no parent");
    return {gen - 1, ix >> 2, iy >> 2};
}

DyadicCube DyadicCube::child(int digit) const {
    return {gen + 1, 4 * ix + ((digit & 1) ? 3u : 0u),
            4 * iy + ((digit & 2) ? 3u : 0u)};
}

DyadicCube DyadicCube::ancestor(int levels) const {
    if (levels < 0 || levels > gen) throw DomainError("ancestor level out of range");
    return {gen - levels, ix >> (2 * levels), iy >> (2 * levels)};
}

bool DyadicCube::contains(const DyadicCube& q) const {
    if (q.gen < gen) return false;
    int shift = 2 * (q.gen - gen);
    return (q.ix >> shift) == ix && (q.iy >> shift) == iy;
}

DyadicCube cube_from_path(const std::vector<int>& digits) {
    DyadicCube q;
    for (int d : digits) {
        if (d < 0 || d > 3) throw UsageError("path digit outside 0..3");
        q = q.child(d);
    }
    return q;
}

DyadicCube cube_from_path_index(int gen, uint64_t index) {
    std::vector<int> digits(gen);
    for (int i = gen - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(index & 3);
        index >>= 2;
    }
    return cube_from_path(digits);
}

std::vector<DyadicCube> all_cubes_upto(int max_gen) {
    std::vector<DyadicCube> out;
    for (int g = 0; g <= max_gen; ++g) {
        uint64_t count = uint64_t{1} << (2 * g);
        for (uint64_t i = 0; i < count; ++i) out.push_back(cube_from_path_index(g, i));
    }
    return out;
}

// ---------------------------------------------------------------------------

CantorGeometry::CantorGeometry(int depth, double outer_radius, int max_depth) {
    if (depth < 0 || depth > max_depth)
        throw CapacityError("depth " + std::to_string(depth) +
                            " outside [0, " + std::to_string(max_depth) + "]");
    if (outer_radius <= 2.0) throw UsageError("outer radius must exceed 2");
    depth_ = depth;
    outer_radius_ = outer_radius;
    side_ = pow4(depth);
    uint64_t count = uint64_t{1} << (2 * depth);
    std::vector<Rect> rects;
    rects.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        DyadicCube q = cube_from_path_index(depth, i);
        rects.push_back(q.rect());
    }
    squares_ = SquareSet(std::move(rects));
}

CantorGeometry build_cantor(int depth, double outer_radius, int max_depth) {
    return CantorGeometry(depth, outer_radius, max_depth);
}

DyadicCube CantorGeometry::leaf_cube(uint64_t path_index) const {
    return cube_from_path_index(depth_, path_index);
}

bool CantorGeometry::in_domain(Point p) const {
    if (norm(p) >= outer_radius_) return false;
    return !squares_.contains(p);
}

double CantorGeometry::dist_to_boundary(Point p) const {
    double d_out = outer_radius_ - norm(p);
    if (d_out <= 0) throw DomainError("point outside the outer circle");
    double d_e = squares_.distance(p);
    if (d_e <= 0) throw DomainError("point lies on the boundary set");
    return std::min(d_e, d_out);
}

uint64_t CantorGeometry::nearest_leaf(Point p) const {
    int i = squares_.nearest(p);
    return static_cast<uint64_t>(i < 0 ? 0 : i);
}

DyadicCube CantorGeometry::cube_at(Point p, int g) const {
    DyadicCube q; // root
    for (int level = 0; level < g; ++level) {
        int best = -1;
        double best_d = kInf;
        for (int d = 0; d < 4; ++d) {
            DyadicCube c = q.child(d);
            double dd = dist_point_rect(p, c.rect());
            if (dd < best_d) {
                best_d = dd;
                best = d;
            }
        }
        q = q.child(best);
    }
    return q;
}

void CantorGeometry::leaf_range(const DyadicCube& q, uint64_t& lo,
                                uint64_t& hi) const {
    if (q.gen > depth_) throw CapacityError("cube deeper than geometry");
    uint64_t span = uint64_t{1} << (2 * (depth_ - q.gen));
    lo = q.path_index() * span;
    hi = lo + span;
}

double CantorGeometry::boundary_layer_mass(const DyadicCube& q,
                                           double tau) const {
    uint64_t lo, hi;
    leaf_range(q, lo, hi);
    double cutoff = tau * q.side();
    uint64_t near = 0;
    for (uint64_t i = lo; i < hi; ++i) {
        double d = squares_.distance_excluding(squares_.rect(i), lo, hi);
        if (d <= cutoff) ++near;
    }
    return static_cast<double>(near) / static_cast<double>(hi - lo);
}

// ---------------------------------------------------------------------------

std::array<DyadicCube, 4> children(const DyadicCube& cube,
                                   const CantorGeometry& geom) {
    if (cube.gen >= geom.depth())
        throw CapacityError("cube at max generation has no resolved children");
    return {cube.child(0), cube.child(1), cube.child(2), cube.child(3)};
}

double dist_to_boundary(Point p, const CantorGeometry& geom) {
    return geom.dist_to_boundary(p);
}

// -- Whitney -----------------------------------------------------------------

namespace {

double max_corner_norm(const Rect& r) {
    return std::max(std::max(norm({r.x0, r.y0}), norm({r.x1, r.y0})),
                    std::max(norm({r.x0, r.y1}), norm({r.x1, r.y1})));
}

double dist_rect_domain_boundary(const Rect& r, const CantorGeometry& geom) {
    double d_e = geom.squares().distance(r);
    double d_out = geom.outer_radius() - max_corner_norm(r);
    return std::min(d_e, d_out);
}

struct WhitneyBuilder {
    const CantorGeometry& geom;
    const Rect& window;
    double min_side;
    std::vector<WhitneyCube> out;

    void visit(double x0, double y0, double s) {
        Rect r = rect_from_square(x0, y0, s);
        if (!r.intersects(window)) return;
        if (dist_point_rect({0, 0}, r) >= geom.outer_radius()) return;
        if (geom.squares().covers(r)) return;
        double d = dist_rect_domain_boundary(r, geom);
        if (d > 20.0 * s * std::numbers::sqrt2) {
            out.push_back({r, s, d});
            return;
        }
        if (s * 0.5 >= min_side) {
            double h = 0.5 * s;
            visit(x0, y0, h);
            visit(x0 + h, y0, h);
            visit(x0, y0 + h, h);
            visit(x0 + h, y0 + h, h);
        }
    }
};

} // namespace

namespace {

// Dyadic squares live on the absolute lattice, so a level-bucketed hash map
// answers "which cubes' 10x dilations can touch mine" in bounded time: each
// cube scans only levels at or above its own, where cell ranges stay small.
class WhitneyIndex {
public:
    void insert(int id, const WhitneyCube& c) {
        int e = level_of(c.side);
        levels_.insert(e);
        buckets_[key(e, cell(c.box.x0, e), cell(c.box.y0, e))].push_back(id);
    }

    template <typename Fn>
    void neighbors(const WhitneyCube& c, Fn&& fn, int level_span = 1024) const {
        Rect d = c.box.inflated(4.5 * c.side);
        int base = level_of(c.side);
        for (int e : levels_) {
            if (e - base > level_span) continue;
            double s = std::ldexp(1.0, e);
            if (s < c.side) continue; // pairs are found from the smaller side
            Rect q = d.inflated(4.5 * s);
            long cx0 = cell(q.x0, e), cx1 = cell(q.x1, e);
            long cy0 = cell(q.y0, e), cy1 = cell(q.y1, e);
            for (long cx = cx0; cx <= cx1; ++cx)
                for (long cy = cy0; cy <= cy1; ++cy) {
                    auto it = buckets_.find(key(e, cx, cy));
                    if (it == buckets_.end()) continue;
                    for (int id : it->second) fn(id);
                }
        }
    }

private:
    static int level_of(double side) {
        return static_cast<int>(std::lround(std::log2(side)));
    }
    static long cell(double x, int e) {
        return static_cast<long>(std::floor(std::ldexp(x, -e)));
    }
    static uint64_t key(int e, long cx, long cy) {
        return (static_cast<uint64_t>(e + 512) << 52) |
               ((static_cast<uint64_t>(cx + (1L << 24)) & 0x3ffffff) << 26) |
               (static_cast<uint64_t>(cy + (1L << 24)) & 0x3ffffff);
    }
    std::set<int> levels_;
    std::unordered_map<uint64_t, std::vector<int>> buckets_;
};

bool dilations_overlap(const WhitneyCube& a, const WhitneyCube& b) {
    return a.box.inflated(4.5 * a.side).intersects(b.box.inflated(4.5 * b.side));
}

} // namespace

WhitneyReport whitney_decompose(const CantorGeometry& geom, const Rect& window,
                                double min_side) {
    if (min_side <= 0) throw UsageError("min_side must be positive");
    double span = std::max(window.width(), window.height());
    double s0 = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(span))) + 1);
    double ax = std::floor(window.x0 / s0) * s0;
    double ay = std::floor(window.y0 / s0) * s0;

    WhitneyBuilder builder{geom, window, min_side, {}};
    for (double x = ax; x < window.x1; x += s0)
        for (double y = ay; y < window.y1; y += s0) builder.visit(x, y, s0);
    std::vector<WhitneyCube> cubes = std::move(builder.out);

    // Balance: split any cube more than twice the side of a touching
    // neighbor (by 10x dilations). Children of an accepted cube still
    // satisfy the acceptance inequality, so no re-check is needed.
    WhitneyIndex index;
    std::vector<char> alive(cubes.size(), 1);
    std::vector<size_t> work(cubes.size());
    for (size_t i = 0; i < cubes.size(); ++i) {
        index.insert(static_cast<int>(i), cubes[i]);
        work[i] = i;
    }
    // The index query from a cube sees only same-or-larger cubes, so every
    // unbalanced pair is found when its smaller member is processed.
    while (!work.empty()) {
        size_t i = work.back();
        work.pop_back();
        if (!alive[i]) continue;
        std::vector<size_t> oversized;
        index.neighbors(cubes[i], [&](int j) {
            if (static_cast<size_t>(j) == i || !alive[j]) return;
            if (cubes[j].side <= 2.0 * cubes[i].side) return;
            if (dilations_overlap(cubes[i], cubes[j])) oversized.push_back(j);
        });
        if (oversized.empty()) continue;
        for (size_t j : oversized) {
            if (!alive[j]) continue;
            alive[j] = 0;
            double h = 0.5 * cubes[j].side;
            Rect parent = cubes[j].box;
            for (int cx = 0; cx < 2; ++cx)
                for (int cy = 0; cy < 2; ++cy) {
                    Rect r = rect_from_square(parent.x0 + cx * h,
                                              parent.y0 + cy * h, h);
                    cubes.push_back({r, h, dist_rect_domain_boundary(r, geom)});
                    alive.push_back(1);
                    size_t id = cubes.size() - 1;
                    index.insert(static_cast<int>(id), cubes[id]);
                    work.push_back(id);
                }
        }
        work.push_back(i); // children may still dominate this cube
    }

    WhitneyReport report;
    for (size_t i = 0; i < cubes.size(); ++i)
        if (alive[i]) report.cubes.push_back(cubes[i]);

    WhitneyIndex final_index;
    for (size_t i = 0; i < report.cubes.size(); ++i)
        final_index.insert(static_cast<int>(i), report.cubes[i]);
    double lambda = 0.0;
    std::vector<int> touch_count(report.cubes.size(), 1); // self included
    for (size_t i = 0; i < report.cubes.size(); ++i) {
        const WhitneyCube& c = report.cubes[i];
        lambda = std::max(lambda, 1.0 + 2.0 * c.dist_boundary / c.side);
        // Balanced families only touch within one dyadic level.
        final_index.neighbors(
            c,
            [&](int j) {
                size_t sj = static_cast<size_t>(j);
                if (sj == i) return;
                // dedupe equal-side pairs, which both queries see
                if (report.cubes[sj].side == c.side && sj < i) return;
                if (!dilations_overlap(c, report.cubes[sj])) return;
                ++touch_count[i];
                ++touch_count[sj];
            },
            1);
    }
    int d0 = 0;
    for (int t : touch_count) d0 = std::max(d0, t);
    report.lambda = lambda;
    report.d0 = d0;
    return report;
}

// -- corkscrew ---------------------------------------------------------------

Ball corkscrew_point(Point x, double r, const CantorGeometry& geom) {
    if (r <= 0 || r >= 2 * geom.outer_radius())
        throw UsageError("corkscrew radius outside (0, 2 R_out)");
    if (geom.squares().distance(x) > 0)
        throw DomainError("corkscrew vertex must lie on the boundary set");

    auto finish = [&](Point center, double rho) {
        rho = std::min(rho, geom.outer_radius() - norm(center));
        rho = std::min(rho, r - dist(x, center));
        if (rho <= 1e-14)
            throw CapacityError(
                "no corkscrew ball at this radius; scale below the resolved "
                "geometry (increase depth or r)");
        return Ball{center, rho};
    };

    if (r >= 4.0 || geom.depth() == 0) {
        Point mid{0.5, 0.5};
        Point dir = x - mid;
        double n = norm(dir);
        dir = n > 0 ? (1.0 / n) * dir : Point{1.0, 0.0};
        double r_eff = std::min(r, geom.outer_radius());
        Point center = x + (0.5 * r_eff) * dir;
        double rho = std::min(0.25 * r_eff, geom.squares().distance(center));
        return finish(center, rho);
    }

    int j = 0;
    while (pow4(j + 1) >= 0.25 * r) ++j;
    j = std::min(j, geom.depth() - 1);
    DyadicCube q = geom.cube_at(x, j);
    double L = q.side();
    Point c = q.center();
    Rect gap{c.x - L / 8, c.y - L / 8, c.x + L / 8, c.y + L / 8};
    Point toward = closest_point_rect(x, gap);
    // The gap center clears the set best but may sit too far from x; take
    // the best of a few positions on the segment between them.
    Ball best{c, 0.0};
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        Point center = c + t * (toward - c);
        double rho = std::min({geom.squares().distance(center),
                               geom.outer_radius() - norm(center),
                               r - dist(x, center)});
        if (rho > best.radius) best = {center, rho};
    }
    return finish(best.center, best.radius);
}

// -- Carleson packing --------------------------------------------------------

double carleson_norm(const std::vector<DyadicCube>& family) {
    if (family.empty()) return 0.0;
    std::vector<DyadicCube> cubes = family;
    std::sort(cubes.begin(), cubes.end(), [](const DyadicCube& a, const DyadicCube& b) {
        return cube_key(a) < cube_key(b);
    });
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());

    std::unordered_map<uint64_t, double> packed;
    packed.reserve(cubes.size() * 4);
    for (const DyadicCube& q : cubes) {
        DyadicCube r = q;
        while (true) {
            packed[cube_key(r)] += q.measure();
            if (r.gen == 0) break;
            r = r.parent();
        }
    }
    double best = 0.0;
    for (const auto& [key, mass] : packed) {
        int gen = static_cast<int>(key >> 58);
        best = std::max(best, mass / pow4(gen));
    }
    return best;
}

// -- B-hat balls and cones ---------------------------------------------------

Ball ball_B_hat(const DyadicCube& cube, double c, const CantorGeometry& geom) {
    if (!(c > 0.0 && c < kBHatMaxC))
        throw UsageError("ball factor must lie in (0, sqrt(2)/4)");
    if (cube.gen >= geom.depth())
        throw CapacityError(
            "B-hat ball needs sub-structure: cube generation must be below "
            "the geometry depth");
    Ball b{cube.center(), c * cube.side()};
    if (geom.squares().distance(b.center) <= b.radius)
        throw CheckError("B-hat ball touches the boundary set");
    return b;
}

bool in_cone(Point vertex, Point y, double alpha, double R,
             const CantorGeometry& geom) {
    if (alpha <= 0) throw UsageError("cone aperture must be positive");
    if (!geom.in_domain(y)) return false;
    double d = geom.dist_to_boundary(y);
    double reach = dist(vertex, y);
    return reach < (1.0 + alpha) * d && reach < R;
}

} // namespace cantor
