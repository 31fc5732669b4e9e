#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace cantor {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dist(Point a, Point b) { return norm(a - b); }
inline double sup_norm(Point p) { return std::max(std::abs(p.x), std::abs(p.y)); }

struct Ball {
    Point center;
    double radius = 0.0;
};

/// Closed axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double diam() const { return std::hypot(x1 - x0, y1 - y0); }

    bool contains(Point p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
    bool contains(const Rect& r) const {
        return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
    }
    bool intersects(const Rect& r) const {
        return r.x0 <= x1 && x0 <= r.x1 && r.y0 <= y1 && y0 <= r.y1;
    }
    Rect inflated(double m) const { return {x0 - m, y0 - m, x1 + m, y1 + m}; }
};

inline Rect rect_from_square(double x0, double y0, double side) {
    return {x0, y0, x0 + side, y0 + side};
}

inline Rect rect_from_ball(const Ball& b) {
    return {b.center.x - b.radius, b.center.y - b.radius,
            b.center.x + b.radius, b.center.y + b.radius};
}

/// Distance from a point to a closed rectangle (0 if inside).
inline double dist_point_rect(Point p, const Rect& r) {
    double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
    double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
    return std::hypot(dx, dy);
}

/// Distance between two closed rectangles (0 if they intersect).
inline double dist_rect_rect(const Rect& a, const Rect& b) {
    double dx = std::max({b.x0 - a.x1, 0.0, a.x0 - b.x1});
    double dy = std::max({b.y0 - a.y1, 0.0, a.y0 - b.y1});
    return std::hypot(dx, dy);
}

/// Nearest point of a closed rectangle to p.
inline Point closest_point_rect(Point p, const Rect& r) {
    return {std::clamp(p.x, r.x0, r.x1), std::clamp(p.y, r.y0, r.y1)};
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace cantor
