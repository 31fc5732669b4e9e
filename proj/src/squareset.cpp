#include "cantor/squareset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cantor {

namespace {
constexpr int kLeafSize = 4;

Rect merge(const Rect& a, const Rect& b) {
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0),
            std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}
} // namespace

SquareSet::SquareSet(std::vector<Rect> rects) : rects_(std::move(rects)) {
    if (!rects_.empty()) {
        nodes_.reserve(2 * rects_.size() / kLeafSize + 8);
        root_ = build(0, static_cast<int>(rects_.size()));
    }
}

int SquareSet::build(int lo, int hi) {
    Node node;
    node.lo = lo;
    node.hi = hi;
    node.bb = rects_[lo];
    for (int i = lo + 1; i < hi; ++i) node.bb = merge(node.bb, rects_[i]);
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (hi - lo > kLeafSize) {
        // Split by array position: keeps index ranges contiguous so callers
        // can exclude a lattice cube's leaf range.
        int mid = lo + (hi - lo) / 2;
        int l = build(lo, mid);
        int r = build(mid, hi);
        nodes_[idx].left = l;
        nodes_[idx].right = r;
    }
    return idx;
}

Rect SquareSet::bounds() const {
    return root_ < 0 ? Rect{} : nodes_[root_].bb;
}

double SquareSet::distance(Point p) const {
    return distance(Rect{p.x, p.y, p.x, p.y});
}

double SquareSet::distance(const Rect& q) const {
    return distance_excluding(q, 0, 0);
}

double SquareSet::distance_excluding(const Rect& q, size_t lo, size_t hi) const {
    if (root_ < 0) return kInf;
    double best = kInf;
    // Explicit stack, nearer child first.
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (lo < hi && static_cast<size_t>(n.lo) >= lo &&
            static_cast<size_t>(n.hi) <= hi)
            continue;
        if (dist_rect_rect(q, n.bb) >= best) continue;
        if (n.left < 0) {
            for (int i = n.lo; i < n.hi; ++i) {
                if (lo < hi && static_cast<size_t>(i) >= lo &&
                    static_cast<size_t>(i) < hi)
                    continue;
                best = std::min(best, dist_rect_rect(q, rects_[i]));
            }
        } else {
            double dl = dist_rect_rect(q, nodes_[n.left].bb);
            double dr = dist_rect_rect(q, nodes_[n.right].bb);
            if (dl < dr) {
                if (dr < best) stack[top++] = n.right;
                if (dl < best) stack[top++] = n.left;
            } else {
                if (dl < best) stack[top++] = n.left;
                if (dr < best) stack[top++] = n.right;
            }
        }
    }
    return best;
}

bool SquareSet::intersects(const Rect& q) const {
    if (root_ < 0) return false;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (!q.intersects(n.bb)) continue;
        if (n.left < 0) {
            for (int i = n.lo; i < n.hi; ++i)
                if (q.intersects(rects_[i])) return true;
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
    return false;
}

bool SquareSet::contains(Point p) const {
    return intersects(Rect{p.x, p.y, p.x, p.y});
}

int SquareSet::nearest(Point p) const {
    if (root_ < 0) return -1;
    double best = kInf;
    int best_i = -1;
    Rect q{p.x, p.y, p.x, p.y};
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (dist_rect_rect(q, n.bb) > best) continue;
        if (n.left < 0) {
            for (int i = n.lo; i < n.hi; ++i) {
                double d = dist_point_rect(p, rects_[i]);
                if (d < best) {
                    best = d;
                    best_i = i;
                }
            }
        } else {
            double dl = dist_rect_rect(q, nodes_[n.left].bb);
            double dr = dist_rect_rect(q, nodes_[n.right].bb);
            if (dl < dr) {
                if (dr <= best) stack[top++] = n.right;
                if (dl <= best) stack[top++] = n.left;
            } else {
                if (dl <= best) stack[top++] = n.left;
                if (dr <= best) stack[top++] = n.right;
            }
        }
    }
    return best_i;
}

void SquareSet::collect(const Rect& q, std::vector<int>& out) const {
    if (root_ < 0) return;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (!q.intersects(n.bb)) continue;
        if (n.left < 0) {
            for (int i = n.lo; i < n.hi; ++i)
                if (q.intersects(rects_[i])) out.push_back(i);
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
}

bool SquareSet::covers(const Rect& q) const {
    if (q.x0 > q.x1 || q.y0 > q.y1) return true;
    std::vector<int> cand;
    collect(q, cand);
    // Carve: pick a rect overlapping the piece on its non-degenerate axes
    // (open overlap there, so every slab split makes strict progress), and
    // recurse on the remainder slabs.
    std::vector<Rect> work{q};
    while (!work.empty()) {
        Rect r = work.back();
        work.pop_back();
        if (r.x0 > r.x1 || r.y0 > r.y1) continue;
        bool degenerate_x = r.x0 == r.x1;
        bool degenerate_y = r.y0 == r.y1;
        int found = -1;
        for (int i : cand) {
            const Rect& s = rects_[i];
            bool ok_x = degenerate_x ? (s.x0 <= r.x0 && r.x0 <= s.x1)
                                     : (s.x0 < r.x1 && r.x0 < s.x1);
            bool ok_y = degenerate_y ? (s.y0 <= r.y0 && r.y0 <= s.y1)
                                     : (s.y0 < r.y1 && r.y0 < s.y1);
            if (ok_x && ok_y) {
                found = i;
                break;
            }
        }
        if (found < 0) return false;
        const Rect& s = rects_[found];
        // Portions of r outside s, in the four axis slabs.
        if (r.x0 < s.x0) work.push_back({r.x0, r.y0, std::min(r.x1, s.x0), r.y1});
        if (r.x1 > s.x1) work.push_back({std::max(r.x0, s.x1), r.y0, r.x1, r.y1});
        double mx0 = std::max(r.x0, s.x0), mx1 = std::min(r.x1, s.x1);
        if (r.y0 < s.y0) work.push_back({mx0, r.y0, mx1, std::min(r.y1, s.y0)});
        if (r.y1 > s.y1) work.push_back({mx0, std::max(r.y0, s.y1), mx1, r.y1});
        if (work.size() > 1000000)
            throw std::runtime_error("covers: carving budget exceeded");
    }
    return true;
}

std::vector<Point> SquareSet::corners_in(const Rect& q) const {
    std::vector<int> cand;
    collect(q.inflated(0.0), cand);
    std::vector<Point> pts;
    pts.reserve(cand.size());
    for (int i : cand) {
        const Rect& r = rects_[i];
        for (Point p : {Point{r.x0, r.y0}, Point{r.x1, r.y0}, Point{r.x0, r.y1},
                        Point{r.x1, r.y1}})
            if (q.contains(p)) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point a, Point b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    return pts;
}

std::optional<double> SquareSet::max_y_in(const Rect& q) const {
    std::vector<int> cand;
    collect(q, cand);
    std::optional<double> best;
    for (int i : cand) {
        double v = std::min(rects_[i].y1, q.y1);
        if (!best || v > *best) best = v;
    }
    return best;
}

std::optional<double> SquareSet::min_y_in(const Rect& q) const {
    std::vector<int> cand;
    collect(q, cand);
    std::optional<double> best;
    for (int i : cand) {
        double v = std::max(rects_[i].y0, q.y0);
        if (!best || v < *best) best = v;
    }
    return best;
}

std::optional<double> SquareSet::max_x_in(const Rect& q) const {
    std::vector<int> cand;
    collect(q, cand);
    std::optional<double> best;
    for (int i : cand) {
        double v = std::min(rects_[i].x1, q.x1);
        if (!best || v > *best) best = v;
    }
    return best;
}

std::optional<double> SquareSet::min_x_in(const Rect& q) const {
    std::vector<int> cand;
    collect(q, cand);
    std::optional<double> best;
    for (int i : cand) {
        double v = std::max(rects_[i].x0, q.x0);
        if (!best || v < *best) best = v;
    }
    return best;
}

std::optional<StripHit> SquareSet::first_hit(Point start, int dir,
                                             double halfwidth,
                                             double max_t) const {
    // Swept region is a rect; the first contact is the extreme face
    // coordinate among intersecting rects.
    Rect sweep;
    switch (dir) {
        case 0: sweep = {start.x - max_t, start.y - halfwidth, start.x, start.y + halfwidth}; break;
        case 1: sweep = {start.x, start.y - halfwidth, start.x + max_t, start.y + halfwidth}; break;
        case 2: sweep = {start.x - halfwidth, start.y - max_t, start.x + halfwidth, start.y}; break;
        default: sweep = {start.x - halfwidth, start.y, start.x + halfwidth, start.y + max_t}; break;
    }
    std::vector<int> cand;
    collect(sweep, cand);
    std::optional<StripHit> best;
    for (int i : cand) {
        const Rect& r = rects_[i];
        double t, face;
        switch (dir) {
            case 0: face = r.x1; t = start.x - face; break;
            case 1: face = r.x0; t = face - start.x; break;
            case 2: face = r.y1; t = start.y - face; break;
            default: face = r.y0; t = face - start.y; break;
        }
        if (t < 0) t = 0; // started in contact
        if (t > max_t) continue;
        if (!best || t < best->t) {
            Point c;
            if (dir <= 1) {
                double ylo = std::max(r.y0, start.y - halfwidth);
                double yhi = std::min(r.y1, start.y + halfwidth);
                c = {face, 0.5 * (ylo + yhi)};
            } else {
                double xlo = std::max(r.x0, start.x - halfwidth);
                double xhi = std::min(r.x1, start.x + halfwidth);
                c = {0.5 * (xlo + xhi), face};
            }
            best = StripHit{t, c};
        }
    }
    return best;
}

} // namespace cantor
