#pragma once

#include <span>
#include <vector>

#include "cantor/geometry.hpp"
#include "cantor/grid.hpp"

namespace cantor::solver {

struct LayerNode {
    Point pos;
    Point normal; // outward; unused by the single layer
    double weight;
};

/// Weight convention for the double-layer quadrature over leaf frontiers.
enum class LayerMeasure {
    SurfaceMeasure, // each leaf's frontier carries sigma(Q) = 4^-depth total
    CurveLength,    // true perimeter measure (Gauss winding tests)
};

/// Midpoint nodes at leaf centers with weights sigma(Q).
std::vector<LayerNode> single_layer_nodes(const CantorGeometry& geom);

/// Edge-midpoint nodes (4 per leaf) with outward normals.
std::vector<LayerNode> double_layer_nodes(const CantorGeometry& geom,
                                          LayerMeasure measure);

/// Quadrature nodes on a circle (trapezoid rule, exact for smooth data).
std::vector<LayerNode> circle_nodes(Point center, double radius, int count);

/// Subdivided closed-curve nodes over one square frontier, outward normals,
/// true length weights.
std::vector<LayerNode> square_curve_nodes(const Rect& square, int per_edge);

double single_layer(std::span<const LayerNode> nodes,
                    std::span<const double> density, Point x);
Point single_layer_grad(std::span<const LayerNode> nodes,
                        std::span<const double> density, Point x);
double double_layer(std::span<const LayerNode> nodes,
                    std::span<const double> density, Point x);

/// Guard for evaluation points: throws when x is within one leaf diameter of
/// the set.
void require_clear_of_set(Point x, const CantorGeometry& geom);

} // namespace cantor::solver
