#pragma once

#include <optional>
#include <vector>

#include "cantor/geom.hpp"

namespace cantor {

/// First contact of an axis-directed sweep with the set (see
/// SquareSet::first_hit).
struct StripHit {
    double t = 0.0;   // travel distance from the start point
    Point contact;    // a point of the set on the contact face
};

/// Union of closed axis-aligned rectangles with a bounding-volume tree.
/// All queries are exact for the rect union (no tolerance). Immutable after
/// construction; safe for concurrent reads.
class SquareSet {
public:
    SquareSet() = default;
    explicit SquareSet(std::vector<Rect> rects);

    size_t size() const { return rects_.size(); }
    bool empty() const { return rects_.empty(); }
    const Rect& rect(size_t i) const { return rects_[i]; }
    const std::vector<Rect>& rects() const { return rects_; }
    Rect bounds() const;

    /// Euclidean distance from p to the union (0 on or inside a rect).
    double distance(Point p) const;

    /// Distance between a query rect and the union (0 on contact).
    double distance(const Rect& q) const;

    /// Same, skipping rects with index in [lo, hi). Indices follow the
    /// construction order, which for the Cantor geometry is path order, so a
    /// lattice cube's leaves form one contiguous range.
    double distance_excluding(const Rect& q, size_t lo, size_t hi) const;

    bool intersects(const Rect& q) const;
    bool contains(Point p) const;

    /// Index of a rect attaining distance(p); -1 if the set is empty.
    int nearest(Point p) const;

    /// True iff q is covered by the union.
    bool covers(const Rect& q) const;

    /// Indices of all rects intersecting q.
    void collect(const Rect& q, std::vector<int>& out) const;

    /// Rect corners lying inside q, deduplicated.
    std::vector<Point> corners_in(const Rect& q) const;

    /// Supremum of the y-coordinate over (union ∩ q); nullopt if empty.
    std::optional<double> max_y_in(const Rect& q) const;
    std::optional<double> min_y_in(const Rect& q) const;
    std::optional<double> max_x_in(const Rect& q) const;
    std::optional<double> min_x_in(const Rect& q) const;

    /// Sweep a segment of the given half-width perpendicular to an axis
    /// direction (0:-x, 1:+x, 2:-y, 3:+y) starting at `start`, and report the
    /// first contact with the set within travel distance max_t.
    std::optional<StripHit> first_hit(Point start, int dir, double halfwidth,
                                      double max_t) const;

private:
    struct Node {
        Rect bb;
        int left = -1;   // children node indices, -1 for leaf
        int right = -1;
        int lo = 0, hi = 0; // rect index range covered by this node
    };

    int build(int lo, int hi);
    const std::vector<Rect>& leaves() const { return rects_; }

    std::vector<Rect> rects_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace cantor
