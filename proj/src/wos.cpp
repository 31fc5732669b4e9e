#include "cantor/wos.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include <omp.h>

#include "cantor/errors.hpp"
#include "cantor/rng.hpp"

namespace cantor::solver {

double WosParams::resolved_eps_stop(const CantorGeometry& geom) const {
    if (eps_stop > 0) return eps_stop;
    return std::ldexp(1.0, -2 * (geom.depth() + 2));
}

WalkResult wos_walk(Point start, const CantorGeometry& geom, uint64_t seed,
                    uint64_t walk_index, const WosParams& params) {
    double eps = params.resolved_eps_stop(geom);
    if (eps <= 0) throw UsageError("eps_stop must be positive");
    if (!geom.in_domain(start)) throw DomainError("walk start outside the domain");
    RngStream stream(seed, walk_index);
    Point x = start;
    WalkResult result;
    for (int step = 0;; ++step) {
        double d_e = geom.dist_to_set(x);
        double d_out = geom.outer_radius() - norm(x);
        double d = std::min(d_e, d_out);
        // A jump lands exactly on the circle of radius d, so rounding can
        // touch the boundary; that is a termination, not an error.
        if (d < eps) {
            result.steps = step;
            result.stop = x;
            if (d_out <= d_e) {
                result.outer = true;
            } else {
                result.outer = false;
                result.leaf = geom.nearest_leaf(x);
            }
            return result;
        }
        if (step >= params.max_steps)
            throw ConvergenceError("walk exceeded the step cap");
        double cx, cy;
        stream.unit_circle(cx, cy);
        x = {x.x + d * cx, x.y + d * cy};
    }
}

// ---------------------------------------------------------------------------

HarmonicMeasureTable::HarmonicMeasureTable(Point pole, int depth,
                                           uint64_t n_walks, uint64_t seed,
                                           std::vector<uint64_t> leaf_hits,
                                           uint64_t outer_hits)
    : pole_(pole), depth_(depth), n_walks_(n_walks), seed_(seed),
      outer_hits_(outer_hits) {
    prefix_.resize(leaf_hits.size() + 1, 0);
    for (size_t i = 0; i < leaf_hits.size(); ++i)
        prefix_[i + 1] = prefix_[i] + leaf_hits[i];
}

uint64_t HarmonicMeasureTable::hits(const DyadicCube& q) const {
    if (q.gen > depth_) throw CapacityError("cube deeper than the table");
    uint64_t span = uint64_t{1} << (2 * (depth_ - q.gen));
    uint64_t lo = q.path_index() * span;
    return prefix_[lo + span] - prefix_[lo];
}

double HarmonicMeasureTable::estimate(const DyadicCube& q) const {
    return static_cast<double>(hits(q)) / static_cast<double>(n_walks_);
}

double HarmonicMeasureTable::stderr_of(const DyadicCube& q) const {
    double p = estimate(q);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n_walks_));
}

double HarmonicMeasureTable::outer_mass() const {
    return static_cast<double>(outer_hits_) / static_cast<double>(n_walks_);
}

std::vector<uint64_t> HarmonicMeasureTable::generation_hits(int gen) const {
    uint64_t count = uint64_t{1} << (2 * gen);
    uint64_t span = uint64_t{1} << (2 * (depth_ - gen));
    std::vector<uint64_t> out(count);
    for (uint64_t i = 0; i < count; ++i)
        out[i] = prefix_[(i + 1) * span] - prefix_[i * span];
    return out;
}

HarmonicMeasureTable harmonic_measure(Point pole, const CantorGeometry& geom,
                                      uint64_t n_walks, uint64_t seed,
                                      const WosParams& params, Exec exec) {
    if (!geom.in_domain(pole)) throw DomainError("pole must lie in the domain");
    size_t leaves = geom.square_count();
    std::vector<uint64_t> hits(leaves, 0);
    uint64_t outer = 0;

    if (exec == Exec::Serial) {
        for (uint64_t w = 0; w < n_walks; ++w) {
            WalkResult r = wos_walk(pole, geom, seed, w, params);
            if (r.outer)
                ++outer;
            else
                ++hits[r.leaf];
        }
    } else {
        std::exception_ptr failure;
#pragma omp parallel
        {
            std::vector<uint64_t> local(leaves, 0);
            uint64_t local_outer = 0;
#pragma omp for schedule(static)
            for (long w = 0; w < static_cast<long>(n_walks); ++w) {
                try {
                    WalkResult r = wos_walk(pole, geom, seed,
                                            static_cast<uint64_t>(w), params);
                    if (r.outer)
                        ++local_outer;
                    else
                        ++local[r.leaf];
                } catch (...) {
#pragma omp critical
                    if (!failure) failure = std::current_exception();
                }
            }
#pragma omp critical
            {
                for (size_t i = 0; i < leaves; ++i) hits[i] += local[i];
                outer += local_outer;
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    return HarmonicMeasureTable(pole, geom.depth(), n_walks, seed,
                                std::move(hits), outer);
}

MeanStderr wos_functional(Point start, const CantorGeometry& geom,
                          uint64_t n_walks, uint64_t seed,
                          const std::function<double(const WalkResult&)>& fn,
                          const WosParams& params, Exec exec) {
    double sum = 0.0, sum2 = 0.0;
    if (exec == Exec::Serial) {
        for (uint64_t w = 0; w < n_walks; ++w) {
            double v = fn(wos_walk(start, geom, seed, w, params));
            sum += v;
            sum2 += v * v;
        }
    } else {
        std::exception_ptr failure;
#pragma omp parallel for schedule(static) reduction(+ : sum, sum2)
        for (long w = 0; w < static_cast<long>(n_walks); ++w) {
            try {
                double v = fn(wos_walk(start, geom, seed,
                                       static_cast<uint64_t>(w), params));
                sum += v;
                sum2 += v * v;
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    double n = static_cast<double>(n_walks);
    MeanStderr r;
    r.mean = sum / n;
    double var = std::max(sum2 / n - r.mean * r.mean, 0.0);
    r.stderr_of = std::sqrt(var / n);
    return r;
}

MeanStderr boundary_ball_mass(Point x, Point xi, double r,
                              const CantorGeometry& geom, uint64_t n_walks,
                              uint64_t seed, const WosParams& params) {
    return wos_functional(
        x, geom, n_walks, seed,
        [&](const WalkResult& w) { return dist(w.stop, xi) <= 2 * r ? 1.0 : 0.0; },
        params);
}

HolderFit holder_decay(const DyadicCube& q, const CantorGeometry& geom,
                       uint64_t walks_per_point, uint64_t seed, int points,
                       const WosParams& params) {
    // Corner of Q nearest the unit-square center persists in the set at
    // every depth; approach it diagonally from the central gap side.
    Rect r = q.rect();
    Point mid{0.5, 0.5};
    Point corner{std::abs(r.x0 - mid.x) < std::abs(r.x1 - mid.x) ? r.x0 : r.x1,
                 std::abs(r.y0 - mid.y) < std::abs(r.y1 - mid.y) ? r.y0 : r.y1};
    Point dir{corner.x == r.x0 ? -1.0 : 1.0, corner.y == r.y0 ? -1.0 : 1.0};
    dir = (1.0 / std::numbers::sqrt2) * dir;

    uint64_t lo, hi;
    geom.leaf_range(q, lo, hi);
    HolderFit fit;
    for (int i = 0; i < points; ++i) {
        double t = q.side() * 0.25 * std::pow(0.5, i);
        Point x = corner + t * dir; // dir points out of the cube into the gap
        MeanStderr m = wos_functional(
            x, geom, walks_per_point, seed + static_cast<uint64_t>(i),
            [&](const WalkResult& w) {
                return (w.outer || w.leaf < lo || w.leaf >= hi) ? 1.0 : 0.0;
            },
            params);
        fit.distances.push_back(t);
        fit.values.push_back(m.mean);
    }
    // Least squares in log-log coordinates.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < fit.values.size(); ++i) {
        if (fit.values[i] <= 0) continue;
        double lx = std::log(fit.distances[i]);
        double ly = std::log(fit.values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    fit.alpha = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return fit;
}

std::vector<double> estimate_values(
    const std::vector<Point>& points, const CantorGeometry& geom,
    uint64_t walks_per_point, uint64_t seed,
    const std::function<double(const WalkResult&)>& data_fn,
    const WosParams& params, Exec exec) {
    std::vector<double> out(points.size(), 0.0);
    long n = static_cast<long>(points.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::Parallel)
    for (long i = 0; i < n; ++i) {
        try {
            double sum = 0.0;
            uint64_t stream_base = 0x1000000ULL * static_cast<uint64_t>(i);
            for (uint64_t w = 0; w < walks_per_point; ++w)
                sum += data_fn(
                    wos_walk(points[i], geom, seed, stream_base + w, params));
            out[i] = sum / static_cast<double>(walks_per_point);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

FrameTable::FrameTable(std::vector<Point> points, int agg_gen, uint64_t walks,
                       std::vector<std::vector<uint32_t>> counts)
    : points_(std::move(points)), agg_gen_(agg_gen), walks_(walks),
      counts_(std::move(counts)) {}

FrameTable FrameTable::build(const std::vector<Point>& points,
                             const CantorGeometry& geom, int agg_gen,
                             uint64_t walks_per_point, uint64_t seed,
                             const WosParams& params, Exec exec) {
    if (agg_gen > geom.depth())
        throw CapacityError("aggregation generation deeper than geometry");
    uint64_t bins = uint64_t{1} << (2 * agg_gen);
    int shift = 2 * (geom.depth() - agg_gen);
    std::vector<std::vector<uint32_t>> counts(points.size());
    long n = static_cast<long>(points.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) if (exec == Exec::Parallel)
    for (long i = 0; i < n; ++i) {
        try {
            std::vector<uint32_t> local(bins, 0);
            uint64_t stream_base = 0x1000000ULL * static_cast<uint64_t>(i);
            for (uint64_t w = 0; w < walks_per_point; ++w) {
                WalkResult r =
                    wos_walk(points[i], geom, seed, stream_base + w, params);
                if (!r.outer) ++local[r.leaf >> shift];
            }
            counts[i] = std::move(local);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return FrameTable(points, agg_gen, walks_per_point, std::move(counts));
}

std::vector<double> FrameTable::values_for(
    const std::vector<double>& cube_values) const {
    if (cube_values.size() != (size_t{1} << (2 * agg_gen_)))
        throw UsageError("cube value vector does not match aggregation level");
    std::vector<double> out(points_.size(), 0.0);
    for (size_t i = 0; i < points_.size(); ++i) {
        double sum = 0.0;
        const auto& c = counts_[i];
        for (size_t k = 0; k < c.size(); ++k)
            if (c[k]) sum += cube_values[k] * c[k];
        out[i] = sum / static_cast<double>(walks_);
    }
    return out;
}

} // namespace cantor::solver
