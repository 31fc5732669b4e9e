#include "cantor/potentials.hpp"

#include <cmath>
#include <numbers>

#include "cantor/errors.hpp"

namespace cantor::solver {

std::vector<LayerNode> single_layer_nodes(const CantorGeometry& geom) {
    std::vector<LayerNode> nodes;
    nodes.reserve(geom.square_count());
    double w = geom.square_side(); // sigma(Q) = 4^-depth
    for (size_t i = 0; i < geom.square_count(); ++i) {
        const Rect& r = geom.squares().rect(i);
        nodes.push_back({r.center(), {0, 0}, w});
    }
    return nodes;
}

std::vector<LayerNode> double_layer_nodes(const CantorGeometry& geom,
                                          LayerMeasure measure) {
    std::vector<LayerNode> nodes;
    nodes.reserve(4 * geom.square_count());
    double side = geom.square_side();
    double w = measure == LayerMeasure::SurfaceMeasure ? side / 4.0 : side;
    for (size_t i = 0; i < geom.square_count(); ++i) {
        const Rect& r = geom.squares().rect(i);
        Point c = r.center();
        double hs = 0.5 * side;
        nodes.push_back({{c.x, c.y - hs}, {0, -1}, w});
        nodes.push_back({{c.x + hs, c.y}, {1, 0}, w});
        nodes.push_back({{c.x, c.y + hs}, {0, 1}, w});
        nodes.push_back({{c.x - hs, c.y}, {-1, 0}, w});
    }
    return nodes;
}

std::vector<LayerNode> circle_nodes(Point center, double radius, int count) {
    std::vector<LayerNode> nodes;
    nodes.reserve(count);
    double w = 2 * std::numbers::pi * radius / count;
    for (int k = 0; k < count; ++k) {
        double theta = 2 * std::numbers::pi * (k + 0.5) / count;
        Point n{std::cos(theta), std::sin(theta)};
        nodes.push_back({{center.x + radius * n.x, center.y + radius * n.y}, n, w});
    }
    return nodes;
}

std::vector<LayerNode> square_curve_nodes(const Rect& square, int per_edge) {
    std::vector<LayerNode> nodes;
    nodes.reserve(4 * per_edge);
    double sx = square.width() / per_edge;
    double sy = square.height() / per_edge;
    for (int k = 0; k < per_edge; ++k) {
        double tx = square.x0 + (k + 0.5) * sx;
        double ty = square.y0 + (k + 0.5) * sy;
        nodes.push_back({{tx, square.y0}, {0, -1}, sx});
        nodes.push_back({{square.x1, ty}, {1, 0}, sy});
        nodes.push_back({{tx, square.y1}, {0, 1}, sx});
        nodes.push_back({{square.x0, ty}, {-1, 0}, sy});
    }
    return nodes;
}

double single_layer(std::span<const LayerNode> nodes,
                    std::span<const double> density, Point x) {
    if (nodes.size() != density.size())
        throw UsageError("density size does not match the node set");
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i)
        acc += fundamental_solution(x - nodes[i].pos) * density[i] *
               nodes[i].weight;
    return acc;
}

Point single_layer_grad(std::span<const LayerNode> nodes,
                        std::span<const double> density, Point x) {
    if (nodes.size() != density.size())
        throw UsageError("density size does not match the node set");
    Point acc{0, 0};
    for (size_t i = 0; i < nodes.size(); ++i) {
        Point g = fundamental_solution_grad(x - nodes[i].pos);
        double f = density[i] * nodes[i].weight;
        acc.x += g.x * f;
        acc.y += g.y * f;
    }
    return acc;
}

double double_layer(std::span<const LayerNode> nodes,
                    std::span<const double> density, Point x) {
    if (nodes.size() != density.size())
        throw UsageError("density size does not match the node set");
    double acc = 0.0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        // grad_y E(x - y) = -grad E evaluated at (x - y)
        Point g = fundamental_solution_grad(x - nodes[i].pos);
        acc -= dot(nodes[i].normal, g) * density[i] * nodes[i].weight;
    }
    return acc;
}

void require_clear_of_set(Point x, const CantorGeometry& geom) {
    double clearance = geom.square_side() * std::numbers::sqrt2;
    if (geom.squares().distance(x) <= clearance)
        throw DomainError("evaluation point within one cell diameter of the set");
}

} // namespace cantor::solver
