#include "cantor/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

#include "cantor/errors.hpp"

namespace cantor {

BoundaryFunction BoundaryFunction::cube_piecewise(int gen,
                                                  std::vector<double> values) {
    if (values.size() != (size_t{1} << (2 * gen)))
        throw UsageError("value count must be 4^gen");
    BoundaryFunction f;
    f.rep_ = Rep::CubePiecewise;
    f.gen_ = gen;
    f.values_ = std::move(values);
    f.weights_.assign(f.values_.size(), std::ldexp(1.0, -2 * gen));
    return f;
}

BoundaryFunction BoundaryFunction::family_atoms(std::vector<DyadicCube> cubes,
                                                std::vector<double> values,
                                                double zero_weight) {
    if (cubes.size() != values.size())
        throw UsageError("family size mismatch");
    BoundaryFunction f;
    f.rep_ = Rep::FamilyAtoms;
    f.cubes_ = std::move(cubes);
    f.values_ = std::move(values);
    f.zero_weight_ = zero_weight;
    f.weights_.reserve(f.cubes_.size());
    for (const DyadicCube& q : f.cubes_) f.weights_.push_back(q.measure());
    return f;
}

BoundaryFunction BoundaryFunction::sample_points(std::vector<Point> points,
                                                 std::vector<double> values,
                                                 std::vector<double> weights) {
    if (points.size() != values.size() || points.size() != weights.size())
        throw UsageError("sample arrays must have matching sizes");
    BoundaryFunction f;
    f.rep_ = Rep::SamplePoints;
    f.points_ = std::move(points);
    f.values_ = std::move(values);
    f.weights_ = std::move(weights);
    return f;
}

double BoundaryFunction::at_cube(const DyadicCube& q) const {
    if (rep_ == Rep::CubePiecewise) {
        if (q.gen < gen_) {
            // Average of descendants is not piecewise constant in general;
            // only exact lookups are supported.
            throw UsageError("cube coarser than the representation");
        }
        DyadicCube r = q.gen == gen_ ? q : q.ancestor(q.gen - gen_);
        return values_[r.path_index()];
    }
    if (rep_ == Rep::FamilyAtoms) {
        for (size_t i = 0; i < cubes_.size(); ++i)
            if (cubes_[i].contains(q) || cubes_[i] == q) return values_[i];
        return 0.0;
    }
    throw UsageError("at_cube undefined for sample representation");
}

BoundaryFunction BoundaryFunction::scaled(double c) const {
    BoundaryFunction f = *this;
    for (double& v : f.values_) v *= c;
    return f;
}

// ---------------------------------------------------------------------------

double weak_l1_norm(const BoundaryFunction& f) {
    std::vector<std::pair<double, double>> lv; // (|value|, weight)
    lv.reserve(f.size());
    for (size_t i = 0; i < f.size(); ++i)
        lv.push_back({std::abs(f.values()[i]), f.weights()[i]});
    std::sort(lv.begin(), lv.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    // sigma(|f| > lambda) jumps at each achieved level; the supremum over
    // lambda just below level v uses the full weight of {|f| >= v}.
    double best = 0.0, cum = 0.0;
    for (const auto& [v, w] : lv) {
        cum += w;
        best = std::max(best, v * cum);
    }
    return best;
}

double weak_l1_norm_grid_oracle(const BoundaryFunction& f, int grid_per_level) {
    std::vector<double> levels;
    for (double v : f.values()) levels.push_back(std::abs(v));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.empty()) return 0.0;
    double best = 0.0;
    double top = levels.back() * 1.01 + 1e-12;
    auto measure_above = [&](double lambda) {
        double m = 0.0;
        for (size_t i = 0; i < f.size(); ++i)
            if (std::abs(f.values()[i]) > lambda) m += f.weights()[i];
        return m;
    };
    // Uniform grid plus refined grids hugging each achieved level from below.
    for (int i = 0; i <= grid_per_level; ++i) {
        double lambda = top * i / grid_per_level;
        best = std::max(best, lambda * measure_above(lambda));
    }
    for (double v : levels)
        for (int i = 1; i <= grid_per_level; ++i) {
            double lambda = v * (1.0 - 1e-9 * i);
            if (lambda > 0) best = std::max(best, lambda * measure_above(lambda));
        }
    return best;
}

double lp_norm(const BoundaryFunction& f, double p) {
    if (p <= 0) throw UsageError("p must be positive");
    double acc = 0.0;
    for (size_t i = 0; i < f.size(); ++i)
        acc += f.weights()[i] * std::pow(std::abs(f.values()[i]), p);
    return std::pow(acc, 1.0 / p);
}

BoundaryFunction hajlasz_witness(const BoundaryFunction& f, Exec exec) {
    if (f.rep() != BoundaryFunction::Rep::SamplePoints)
        throw UsageError("hajlasz_witness needs sample points");
    const auto& pts = f.points();
    const auto& vals = f.values();
    long n = static_cast<long>(pts.size());
    std::vector<double> g(n, 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (long i = 0; i < n; ++i) {
        double best = 0.0;
        for (long j = 0; j < n; ++j) {
            if (i == j) continue;
            double d = dist(pts[i], pts[j]);
            if (d <= 0) throw UsageError("sample points must be distinct");
            best = std::max(best, std::abs(vals[i] - vals[j]) / d);
        }
        g[i] = best;
    }
    return BoundaryFunction::sample_points(pts, std::move(g), f.weights());
}

double lipschitz_constant(std::span<const Point> pts,
                          std::span<const double> vals, Exec exec) {
    if (pts.size() < 2) throw UsageError("need at least two sample points");
    long n = static_cast<long>(pts.size());
    double best = 0.0;
#pragma omp parallel for schedule(static) reduction(max : best) \
    if (exec == Exec::Parallel)
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) {
            double d = dist(pts[i], pts[j]);
            if (d <= 0) throw UsageError("sample points must be distinct");
            double q = std::abs(vals[i] - vals[j]) / d;
            if (q > best) best = q;
        }
    return best;
}

double lipschitz_constant(const BoundaryFunction& f, Exec exec) {
    if (f.rep() != BoundaryFunction::Rep::SamplePoints)
        throw UsageError("lipschitz_constant needs sample points");
    return lipschitz_constant(f.points(), f.values(), exec);
}

// ---------------------------------------------------------------------------

double nt_max(std::span<const Point> pts, std::span<const double> vals,
              Point xi, double alpha, double R, const CantorGeometry& geom) {
    if (pts.size() != vals.size()) throw UsageError("field size mismatch");
    double best = -kInf;
    bool any = false;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (!in_cone(xi, pts[i], alpha, R, geom)) continue;
        any = true;
        best = std::max(best, std::abs(vals[i]));
    }
    if (!any) throw DomainError("truncated cone captured no field samples");
    return best;
}

double nt_max_modified(std::span<const Point> pts, Point xi, double alpha,
                       double c, double R, const CantorGeometry& geom,
                       const std::function<double(Point, double)>& rms_in_ball,
                       ModifiedRadius convention) {
    if (c <= 0) throw UsageError("ball factor must be positive");
    double best = -kInf;
    bool any = false;
    for (const Point& y : pts) {
        if (!in_cone(xi, y, alpha, R, geom)) continue;
        double radius = convention == ModifiedRadius::PointDistance
                            ? c * geom.dist_to_boundary(y)
                            : c * dist(xi, y);
        double v = rms_in_ball(y, radius);
        any = true;
        best = std::max(best, v);
    }
    if (!any) throw DomainError("truncated cone captured no field samples");
    return best;
}

double min_aperture_for_bhat(int gen, double c_ball,
                             const CantorGeometry& geom) {
    // For xi in Q and y in B-hat(Q): need |xi - y| < (1+alpha) dist(y).
    // Worst case over the cube's corners and the ball rim; sampled on the rim.
    double worst = 0.0;
    uint64_t count = uint64_t{1} << (2 * gen);
    for (uint64_t i = 0; i < count; ++i) {
        DyadicCube q = cube_from_path_index(gen, i);
        Ball b = ball_B_hat(q, c_ball, geom);
        Rect r = q.rect();
        for (Point xi : {Point{r.x0, r.y0}, Point{r.x1, r.y0}, Point{r.x0, r.y1},
                         Point{r.x1, r.y1}}) {
            for (int s = 0; s < 64; ++s) {
                double th = 2 * std::numbers::pi * s / 64;
                Point y{b.center.x + b.radius * std::cos(th),
                        b.center.y + b.radius * std::sin(th)};
                double d = geom.dist_to_boundary(y);
                worst = std::max(worst, dist(xi, y) / d - 1.0);
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------

namespace {
void maximal_cubes_visit(const solver::HarmonicMeasureTable& table,
                         const DyadicCube& q, int k, int max_gen,
                         std::vector<DyadicCube>& out) {
    bool qualifies;
    if (k == 1) {
        qualifies = true; // vacuous condition set: the root is maximal
    } else if (q.gen < k - 1) {
        qualifies = false; // not enough ancestors to test
    } else {
        qualifies = true;
        double est_q = table.estimate(q);
        if (est_q <= 0) {
            qualifies = false;
        } else {
            double dens_q = est_q / q.side();
            for (int i = 1; i <= k - 1 && qualifies; ++i) {
                DyadicCube p = q.ancestor(i);
                double est_p = table.estimate(p);
                if (est_p <= 0 || dens_q * p.side() / est_p < 1.0)
                    qualifies = false;
            }
        }
    }
    if (qualifies) {
        out.push_back(q);
        return;
    }
    if (q.gen >= max_gen) return;
    for (int d = 0; d < 4; ++d)
        maximal_cubes_visit(table, q.child(d), k, max_gen, out);
}
} // namespace

MaximalCubeFamily maximal_cubes(const solver::HarmonicMeasureTable& table,
                                int k, int max_gen) {
    if (k < 1) throw UsageError("k must be at least 1");
    if (max_gen > table.depth())
        throw CapacityError("family generation exceeds the table depth");
    MaximalCubeFamily fam;
    fam.k = k;
    fam.max_gen = max_gen;
    maximal_cubes_visit(table, DyadicCube{}, k, max_gen, fam.cubes);
    for (const DyadicCube& q : fam.cubes) fam.covered_measure += q.measure();
    return fam;
}

BoundaryFunction nhat_k(
    const MaximalCubeFamily& family, double c_ball, const CantorGeometry& geom,
    const std::function<double(const DyadicCube&, const Ball&)>& ball_average) {
    std::vector<double> values;
    values.reserve(family.cubes.size());
    for (const DyadicCube& q : family.cubes) {
        Ball b = ball_B_hat(q, c_ball, geom);
        values.push_back(ball_average(q, b));
    }
    return BoundaryFunction::family_atoms(family.cubes, std::move(values),
                                          std::max(0.0, 1.0 - family.covered_measure));
}

} // namespace cantor
