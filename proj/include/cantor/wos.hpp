#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cantor/geometry.hpp"
#include "cantor/parallel.hpp"

namespace cantor::solver {

struct WosParams {
    double eps_stop = 0.0; // 0: defaults to 4^-(depth+2)
    int max_steps = 100000;

    double resolved_eps_stop(const CantorGeometry& geom) const;
};

struct WalkResult {
    bool outer = false;     // terminated at the outer circle
    uint64_t leaf = 0;      // nearest generation-depth square otherwise
    Point stop;             // termination point
    int steps = 0;
};

/// One walk-on-spheres trajectory from `start`; the angle sequence is the
/// counter stream (seed, walk_index), so results are reproducible and
/// scheduling-independent.
WalkResult wos_walk(Point start, const CantorGeometry& geom, uint64_t seed,
                    uint64_t walk_index, const WosParams& params = {});

/// Per-cube exit-distribution estimates from n_walks trajectories. Counts
/// are stored per generation-depth leaf; any cube aggregates exactly by
/// summing its leaf range, so parent estimates equal the sum of children.
class HarmonicMeasureTable {
public:
    HarmonicMeasureTable() = default;
    HarmonicMeasureTable(Point pole, int depth, uint64_t n_walks, uint64_t seed,
                         std::vector<uint64_t> leaf_hits, uint64_t outer_hits);

    Point pole() const { return pole_; }
    int depth() const { return depth_; }
    uint64_t n_walks() const { return n_walks_; }
    uint64_t seed() const { return seed_; }

    uint64_t hits(const DyadicCube& q) const;
    double estimate(const DyadicCube& q) const;
    double stderr_of(const DyadicCube& q) const;
    uint64_t outer_hits() const { return outer_hits_; }
    double outer_mass() const;

    /// hits / estimates over all cubes of one generation, path order.
    std::vector<uint64_t> generation_hits(int gen) const;

private:
    Point pole_;
    int depth_ = 0;
    uint64_t n_walks_ = 0;
    uint64_t seed_ = 0;
    std::vector<uint64_t> prefix_; // prefix sums of leaf hits
    uint64_t outer_hits_ = 0;
};

HarmonicMeasureTable harmonic_measure(Point pole, const CantorGeometry& geom,
                                      uint64_t n_walks, uint64_t seed,
                                      const WosParams& params = {},
                                      Exec exec = Exec::Parallel);

struct MeanStderr {
    double mean = 0.0;
    double stderr_of = 0.0;
};

/// Monte Carlo mean of fn over walk outcomes from `start`.
MeanStderr wos_functional(Point start, const CantorGeometry& geom,
                          uint64_t n_walks, uint64_t seed,
                          const std::function<double(const WalkResult&)>& fn,
                          const WosParams& params = {},
                          Exec exec = Exec::Parallel);

/// omega^x(B(xi, 2r) ∩ boundary): fraction of walk endpoints within 2r of xi.
MeanStderr boundary_ball_mass(Point x, Point xi, double r,
                              const CantorGeometry& geom, uint64_t n_walks,
                              uint64_t seed, const WosParams& params = {});

struct HolderFit {
    double alpha = 0.0;             // fitted decay exponent
    std::vector<double> distances;  // sample offsets from the boundary point
    std::vector<double> values;     // omega^x(boundary \ Q) at those offsets
};

/// Decay of omega^x(boundary \ Q) along a straight segment approaching an
/// interior corner point of Q; alpha is the log-log least squares slope.
HolderFit holder_decay(const DyadicCube& q, const CantorGeometry& geom,
                       uint64_t walks_per_point, uint64_t seed, int points = 6,
                       const WosParams& params = {});

/// Dirichlet data estimates at far-field points: per point, the mean of
/// data_fn over walk outcomes (the hybrid window-frame truncation).
std::vector<double> estimate_values(
    const std::vector<Point>& points, const CantorGeometry& geom,
    uint64_t walks_per_point, uint64_t seed,
    const std::function<double(const WalkResult&)>& data_fn,
    const WosParams& params = {}, Exec exec = Exec::Parallel);

/// Cached frame table for cube-piecewise boundary data vanishing on the
/// outer circle: counts aggregated at generation `agg_gen`, so the frame
/// value for data f is sum_Q f(Q) * count(Q) / walks.
class FrameTable {
public:
    FrameTable() = default;
    FrameTable(std::vector<Point> points, int agg_gen, uint64_t walks,
               std::vector<std::vector<uint32_t>> counts);

    static FrameTable build(const std::vector<Point>& points,
                            const CantorGeometry& geom, int agg_gen,
                            uint64_t walks_per_point, uint64_t seed,
                            const WosParams& params = {},
                            Exec exec = Exec::Parallel);

    const std::vector<Point>& points() const { return points_; }
    int agg_gen() const { return agg_gen_; }

    /// Frame values for data equal to `cube_values` (path order at agg_gen)
    /// on the set and 0 on the outer circle.
    std::vector<double> values_for(const std::vector<double>& cube_values) const;

private:
    std::vector<Point> points_;
    int agg_gen_ = 0;
    uint64_t walks_ = 0;
    std::vector<std::vector<uint32_t>> counts_; // per point, 4^agg_gen entries
};

} // namespace cantor::solver
