#include "cantor/counterexample.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "cantor/errors.hpp"

namespace cantor::counterexample {

BoundaryFunction f_basis(const DyadicCube& q, int rep_gen) {
    if (rep_gen < q.gen)
        throw UsageError("representation generation must refine the cube");
    uint64_t count = uint64_t{1} << (2 * rep_gen);
    uint64_t span = uint64_t{1} << (2 * (rep_gen - q.gen));
    uint64_t lo = q.path_index() * span;
    std::vector<double> values(count, 0.0);
    for (uint64_t i = lo; i < lo + span; ++i) values[i] = q.side();
    return BoundaryFunction::cube_piecewise(rep_gen, std::move(values));
}

double bump_extension(const DyadicCube& q, Point x) {
    double side = q.side();
    Point c = q.center();
    double d = sup_norm(x - c);
    // plateau half-width 0.525 l, zero beyond 0.55 l: ramp slope 40
    double t = (0.55 * side - d) / (0.025 * side);
    return side * std::clamp(t, 0.0, 1.0);
}

int bump_overlap_count(const std::vector<DyadicCube>& basis, Point x) {
    int count = 0;
    for (const DyadicCube& q : basis) {
        double d = sup_norm(x - q.center());
        if (d > 0.525 * q.side() && d < 0.55 * q.side()) ++count;
    }
    return count;
}

double random_sum_at(const std::vector<DyadicCube>& basis,
                     const SignVector& signs, Point x) {
    if (signs.size() != basis.size())
        throw UsageError("sign vector does not match the basis");
    double acc = 0.0;
    for (size_t i = 0; i < basis.size(); ++i)
        acc += signs[i] * bump_extension(basis[i], x);
    return acc;
}

BoundaryFunction random_sum_trace(const std::vector<DyadicCube>& basis,
                                  const SignVector& signs, int rep_gen) {
    if (signs.size() != basis.size())
        throw UsageError("sign vector does not match the basis");
    uint64_t count = uint64_t{1} << (2 * rep_gen);
    std::vector<double> values(count, 0.0);
    for (size_t i = 0; i < basis.size(); ++i) {
        const DyadicCube& q = basis[i];
        if (q.gen > rep_gen)
            throw UsageError("basis cube finer than the representation");
        uint64_t span = uint64_t{1} << (2 * (rep_gen - q.gen));
        uint64_t lo = q.path_index() * span;
        for (uint64_t j = lo; j < lo + span; ++j)
            values[j] += signs[i] * q.side();
    }
    return BoundaryFunction::cube_piecewise(rep_gen, std::move(values));
}

std::vector<Point> ball_quadrature(const Ball& ball) {
    // Fibonacci spiral: low discrepancy, identical pattern across balls.
    constexpr double golden = 2.399963229728653;
    std::vector<Point> pts;
    pts.reserve(kQuadraturePoints);
    for (int i = 0; i < kQuadraturePoints; ++i) {
        double r = ball.radius * std::sqrt((i + 0.5) / kQuadraturePoints);
        double theta = golden * i;
        pts.push_back({ball.center.x + r * std::cos(theta),
                       ball.center.y + r * std::sin(theta)});
    }
    return pts;
}

// -- FieldEngine ---------------------------------------------------------------

namespace {

using solver::FrameTable;
using solver::GridProblem;
using solver::GridSolution;
using solver::GridSpec;

Point sample_gradient(const GridSolution& sol, Point p) {
    if (auto g = sol.gradient_at(p)) return *g;
    // Raw bilinear fallback for samples whose neighborhoods touch data
    // cells (far-field contributions, small by construction).
    const GridProblem& pb = sol.problem();
    const Rect& w = pb.spec().window;
    double gx = (p.x - w.x0) / pb.h() - 0.5;
    double gy = (p.y - w.y0) / pb.h() - 0.5;
    int i = std::clamp(static_cast<int>(std::floor(gx)), 1, pb.nx() - 3);
    int j = std::clamp(static_cast<int>(std::floor(gy)), 1, pb.ny() - 3);
    double fx = std::clamp(gx - i, 0.0, 1.0);
    double fy = std::clamp(gy - j, 0.0, 1.0);
    Point g00 = sol.gradient_cell(i, j), g10 = sol.gradient_cell(i + 1, j);
    Point g01 = sol.gradient_cell(i, j + 1), g11 = sol.gradient_cell(i + 1, j + 1);
    return {(1 - fx) * ((1 - fy) * g00.x + fy * g01.x) +
                fx * ((1 - fy) * g10.x + fy * g11.x),
            (1 - fx) * ((1 - fy) * g00.y + fy * g01.y) +
                fx * ((1 - fy) * g10.y + fy * g11.y)};
}

} // namespace

struct FieldEngine::Impl {
    const CantorGeometry& geom;
    FieldConfig config;
    int basis_max_gen;

    GridProblem fine_problem;
    GridProblem coarse_problem;
    FrameTable fine_frames;
    FrameTable coarse_frames;

    std::vector<DyadicCube> ball_cubes;
    std::vector<Ball> balls;
    std::vector<std::vector<Point>> quadrature;

    // Per-ball refinement chain, shared across basis cubes.
    struct Chain {
        std::vector<std::unique_ptr<GridProblem>> levels;
    };
    std::vector<Chain> chains;

    static GridSpec make_spec(const FieldConfig& cfg, double h) {
        GridSpec spec;
        spec.window = cfg.window;
        spec.h = h;
        spec.tol = cfg.tol;
        return spec;
    }

    Impl(const CantorGeometry& g, int max_gen, const FieldConfig& cfg)
        : geom(g), config(cfg), basis_max_gen(max_gen),
          fine_problem(g, make_spec(cfg, cfg.h_fine)),
          coarse_problem(g, make_spec(cfg, cfg.h_coarse)) {
        fine_frames = FrameTable::build(fine_problem.frame_points(), g,
                                        max_gen, cfg.frame_walks, cfg.seed);
        coarse_frames = FrameTable::build(coarse_problem.frame_points(), g,
                                          max_gen, cfg.frame_walks,
                                          cfg.seed + 1);
    }

    double clean_margin(size_t ball_idx) const {
        return (kBHatMaxC - config.c_ball) * ball_cubes[ball_idx].side();
    }

    void build_chain(size_t b) {
        Chain& chain = chains[b];
        double target = clean_margin(b) / 6.0;
        double h = config.h_coarse;
        Point c = balls[b].center;
        while (h > target) {
            h /= 6.0;
            double side = config.local_cells * h;
            Rect window{c.x - side / 2, c.y - side / 2, c.x + side / 2,
                        c.y + side / 2};
            GridSpec spec;
            spec.window = window;
            spec.h = h;
            spec.tol = config.tol;
            chain.levels.push_back(std::make_unique<GridProblem>(geom, spec));
        }
    }

    std::vector<double> set_values_for(const GridProblem& pb,
                                       const DyadicCube& q) const {
        uint64_t lo, hi;
        geom.leaf_range(q, lo, hi);
        std::vector<double> vals;
        vals.reserve(pb.set_cells().size());
        for (const auto& [cell, leaf] : pb.set_cells())
            vals.push_back(leaf >= lo && leaf < hi ? q.side() : 0.0);
        return vals;
    }

    GridSolution solve_global(const DyadicCube& q, bool fine) const {
        const GridProblem& pb = fine ? fine_problem : coarse_problem;
        const FrameTable& ft = fine ? fine_frames : coarse_frames;
        uint64_t count = uint64_t{1} << (2 * basis_max_gen);
        uint64_t span = uint64_t{1} << (2 * (basis_max_gen - q.gen));
        uint64_t lo = q.path_index() * span;
        std::vector<double> cube_vals(count, 0.0);
        for (uint64_t i = lo; i < lo + span; ++i) cube_vals[i] = q.side();
        return solver::grid_solve(pb, set_values_for(pb, q),
                                  ft.values_for(cube_vals), Exec::Serial);
    }

    bool near(const DyadicCube& q, size_t b) const {
        if (chains[b].levels.empty()) return false;
        const Rect& w1 = chains[b].levels.front()->spec().window;
        return dist_rect_rect(q.rect(), w1) <= w1.width();
    }
};

FieldEngine::FieldEngine(const CantorGeometry& geom, int basis_max_gen,
                         const FieldConfig& config)
    : impl_(std::make_unique<Impl>(geom, basis_max_gen, config)) {
    if (basis_max_gen + 2 > geom.depth())
        throw CapacityError(
            "field engine needs two generations of geometry margin below the "
            "basis");
}

FieldEngine::~FieldEngine() = default;

void FieldEngine::set_balls(std::vector<DyadicCube> cubes,
                            std::vector<Ball> balls) {
    if (cubes.size() != balls.size())
        throw UsageError("ball and cube lists must match");
    impl_->ball_cubes = std::move(cubes);
    impl_->balls = std::move(balls);
    impl_->quadrature.clear();
    impl_->chains.clear();
    impl_->chains.resize(impl_->balls.size());
    for (size_t b = 0; b < impl_->balls.size(); ++b) {
        impl_->quadrature.push_back(ball_quadrature(impl_->balls[b]));
        impl_->build_chain(b);
    }
}

const std::vector<Ball>& FieldEngine::balls() const { return impl_->balls; }
const FieldConfig& FieldEngine::config() const { return impl_->config; }

std::vector<Point> FieldEngine::compute(const DyadicCube& q) const {
    Impl& im = *impl_;
    bool fine = q.gen <= im.config.fine_gen;
    GridSolution global = im.solve_global(q, fine);

    std::vector<Point> out(im.balls.size() * kQuadraturePoints);
    for (size_t b = 0; b < im.balls.size(); ++b) {
        const auto& pts = im.quadrature[b];
        if (!im.chains[b].levels.empty() && im.near(q, b)) {
            // Refine through the chain: each level takes its frame from the
            // previous solution and its set cells from f_Q directly.
            const GridSolution* parent = &global;
            std::vector<GridSolution> chain_sols;
            chain_sols.reserve(im.chains[b].levels.size());
            for (const auto& level : im.chains[b].levels) {
                std::vector<double> frame;
                frame.reserve(level->frame_cells().size());
                for (Point p : level->frame_points())
                    frame.push_back(parent->value_at(p));
                chain_sols.push_back(
                    solver::grid_solve(*level, im.set_values_for(*level, q),
                                       frame, Exec::Serial));
                parent = &chain_sols.back();
            }
            for (int i = 0; i < kQuadraturePoints; ++i)
                out[b * kQuadraturePoints + i] =
                    sample_gradient(chain_sols.back(), pts[i]);
        } else {
            for (int i = 0; i < kQuadraturePoints; ++i)
                out[b * kQuadraturePoints + i] = sample_gradient(global, pts[i]);
        }
    }
    return out;
}

// -- Lemma comparability table -------------------------------------------------

LemmaRatioTable verify_gradient_lemma(const CantorGeometry& geom, int depth,
                                      const solver::HarmonicMeasureTable& table,
                                      const FieldConfig& config) {
    std::vector<DyadicCube> cubes = all_cubes_upto(depth);
    FieldEngine engine(geom, depth, config);
    std::vector<Ball> balls;
    for (const DyadicCube& q : cubes)
        balls.push_back(ball_B_hat(q, config.c_ball, geom));
    engine.set_balls(cubes, balls);

    LemmaRatioTable result;
    std::vector<std::vector<Point>> samples(cubes.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long qi = 0; qi < static_cast<long>(cubes.size()); ++qi) {
        try {
            samples[qi] = engine.compute(cubes[qi]);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    double log_sum = 0.0;
    for (size_t qi = 0; qi < cubes.size(); ++qi) {
        for (size_t ri = 0; ri < cubes.size(); ++ri) {
            if (!cubes[qi].contains(cubes[ri])) continue;
            double est_q = table.estimate(cubes[qi]);
            double est_r = table.estimate(cubes[ri]);
            if (est_q <= 0 || est_r <= 0)
                throw CheckError("measure table has empty cubes at this depth");
            LemmaRatioEntry e;
            e.outer = cubes[qi];
            e.inner = cubes[ri];
            double sum = 0.0, sum2 = 0.0;
            for (int i = 0; i < kQuadraturePoints; ++i) {
                double mag = norm(samples[qi][ri * kQuadraturePoints + i]);
                sum += mag;
                sum2 += mag * mag;
            }
            e.measured_mean = sum / kQuadraturePoints;
            e.measured_rms = std::sqrt(sum2 / kQuadraturePoints);
            e.predicted =
                cubes[qi].side() * est_r / (cubes[ri].side() * est_q);
            e.ratio = e.measured_mean / e.predicted;
            log_sum += std::log(e.ratio);
            result.entries.push_back(e);
        }
    }
    result.min_ratio = kInf;
    for (const LemmaRatioEntry& e : result.entries) {
        result.min_ratio = std::min(result.min_ratio, e.ratio);
        result.max_ratio = std::max(result.max_ratio, e.ratio);
        if (e.measured_mean > 0)
            result.worst_mean_rms_factor = std::max(
                result.worst_mean_rms_factor, e.measured_rms / e.measured_mean);
    }
    result.geometric_mean =
        std::exp(log_sum / static_cast<double>(result.entries.size()));
    return result;
}

// -- nk experiment --------------------------------------------------------------

NkResult nk_experiment(const CantorGeometry& geom, const NkConfig& config) {
    if (config.k_max < 1 || config.trials < 1)
        throw UsageError("k_max and trials must be positive");
    solver::HarmonicMeasureTable table =
        solver::harmonic_measure(config.pole, geom, config.walks, config.seed);

    std::vector<MaximalCubeFamily> families;
    for (int k = 1; k <= config.k_max; ++k)
        families.push_back(maximal_cubes(table, k, config.depth));

    // Shared ball list over the union of family cubes.
    std::vector<DyadicCube> ball_cubes;
    std::vector<std::vector<size_t>> family_ball_index(families.size());
    {
        auto key_of = [](const DyadicCube& q) {
            return (static_cast<uint64_t>(q.gen) << 58) |
                   (static_cast<uint64_t>(q.ix) << 29) | q.iy;
        };
        std::vector<std::pair<uint64_t, size_t>> seen;
        for (size_t f = 0; f < families.size(); ++f) {
            for (const DyadicCube& q : families[f].cubes) {
                uint64_t key = key_of(q);
                size_t idx = SIZE_MAX;
                for (const auto& [k2, i2] : seen)
                    if (k2 == key) idx = i2;
                if (idx == SIZE_MAX) {
                    idx = ball_cubes.size();
                    ball_cubes.push_back(q);
                    seen.push_back({key, idx});
                }
                family_ball_index[f].push_back(idx);
            }
        }
    }

    FieldEngine engine(geom, config.depth, config.field);
    std::vector<Ball> balls;
    for (const DyadicCube& q : ball_cubes)
        balls.push_back(ball_B_hat(q, config.field.c_ball, geom));
    engine.set_balls(ball_cubes, balls);

    std::vector<DyadicCube> basis = all_cubes_upto(config.depth);
    size_t m = basis.size();
    bool exact = m <= static_cast<size_t>(config.exact_enum_limit);
    size_t trials =
        exact ? (size_t{1} << m) : static_cast<size_t>(config.trials);

    auto sign_of = [&](size_t trial, size_t i) -> int {
        if (exact) return (trial >> i) & 1 ? 1 : -1;
        return rng::sign(config.seed, trial, i);
    };

    // Per-trial accumulators of sum_Q eps_Q grad u_Q at each (ball, point),
    // plus ancestor ball averages for the Khintchine check.
    size_t slots = ball_cubes.size() * kQuadraturePoints;
    std::vector<std::vector<Point>> acc(trials,
                                        std::vector<Point>(slots, Point{}));
    std::vector<std::vector<double>> ancestor_avg(
        ball_cubes.size(), std::vector<double>(config.depth + 1, 0.0));

    const size_t chunk = 16;
    for (size_t start = 0; start < m; start += chunk) {
        size_t stop = std::min(m, start + chunk);
        std::vector<std::vector<Point>> samples(stop - start);
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (long qi = static_cast<long>(start); qi < static_cast<long>(stop);
             ++qi) {
            try {
                samples[qi - start] = engine.compute(basis[qi]);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
        // canonical-order accumulation keeps every trial bit-reproducible
        for (size_t qi = start; qi < stop; ++qi) {
            const std::vector<Point>& s = samples[qi - start];
            for (size_t t = 0; t < trials; ++t) {
                double sign = sign_of(t, qi);
                std::vector<Point>& a = acc[t];
                for (size_t j = 0; j < slots; ++j) {
                    a[j].x += sign * s[j].x;
                    a[j].y += sign * s[j].y;
                }
            }
            for (size_t b = 0; b < ball_cubes.size(); ++b) {
                if (!basis[qi].contains(ball_cubes[b])) continue;
                double sum = 0.0;
                for (int i = 0; i < kQuadraturePoints; ++i)
                    sum += norm(s[b * kQuadraturePoints + i]);
                ancestor_avg[b][basis[qi].gen] = sum / kQuadraturePoints;
            }
        }
    }

    NkResult result;
    result.trials = static_cast<int>(trials);
    result.depth = config.depth;
    result.seed = config.seed;
    result.exact_enumeration = exact;

    double mean_k1 = 0.0;
    for (size_t f = 0; f < families.size(); ++f) {
        const MaximalCubeFamily& fam = families[f];
        NkPerK per;
        per.k = fam.k;
        per.family_size = fam.cubes.size();
        per.covered_measure = fam.covered_measure;

        std::vector<std::vector<double>> values(
            fam.cubes.size(), std::vector<double>(trials, 0.0));
        double sum = 0.0, sum2 = 0.0;
        for (size_t t = 0; t < trials; ++t) {
            std::vector<double> v(fam.cubes.size());
            for (size_t ci = 0; ci < fam.cubes.size(); ++ci) {
                size_t b = family_ball_index[f][ci];
                double s = 0.0;
                for (int i = 0; i < kQuadraturePoints; ++i)
                    s += norm(acc[t][b * kQuadraturePoints + i]);
                v[ci] = s / kQuadraturePoints;
                values[ci][t] = v[ci];
            }
            BoundaryFunction nf = BoundaryFunction::family_atoms(
                fam.cubes, std::move(v),
                std::max(0.0, 1.0 - fam.covered_measure));
            double w = weak_l1_norm(nf);
            sum += w;
            sum2 += w * w;
        }
        per.mean = sum / static_cast<double>(trials);
        double var = std::max(
            sum2 / static_cast<double>(trials) - per.mean * per.mean, 0.0);
        per.stderr_of = std::sqrt(var / static_cast<double>(trials));

        for (size_t ci = 0; ci < fam.cubes.size(); ++ci) {
            double mean_v = 0.0;
            for (double v : values[ci]) mean_v += v;
            mean_v /= static_cast<double>(trials);
            size_t hits = 0;
            for (double v : values[ci])
                if (v >= 0.5 * mean_v) ++hits;
            per.pz_min_freq = std::min(
                per.pz_min_freq,
                static_cast<double>(hits) / static_cast<double>(trials));
        }

        per.khintchine_lo = kInf;
        per.khintchine_hi = 0.0;
        for (size_t ci = 0; ci < fam.cubes.size(); ++ci) {
            size_t b = family_ball_index[f][ci];
            const DyadicCube& r = ball_cubes[b];
            double est_r = table.estimate(r);
            if (est_r <= 0) continue;
            std::vector<double> a;
            for (int g = 0; g <= r.gen; ++g) {
                DyadicCube anc = r.ancestor(r.gen - g);
                double est_a = table.estimate(anc);
                if (est_a <= 0) continue;
                if (est_r / r.side() * anc.side() / est_a >= 1.0)
                    a.push_back(ancestor_avg[b][g]);
            }
            if (a.empty()) continue;
            auto ens = RademacherEnsemble::exact(a.size());
            double ratio = khintchine_ratio(a, ens).ratio;
            per.khintchine_lo = std::min(per.khintchine_lo, ratio);
            per.khintchine_hi = std::max(per.khintchine_hi, ratio);
        }

        result.per_k.push_back(per);
        if (fam.k == 1) mean_k1 = per.mean;
    }
    for (NkPerK& per : result.per_k) {
        per.ratio_to_k1 = mean_k1 > 0 ? per.mean / mean_k1 : 0.0;
        per.sqrtk_ratio = per.ratio_to_k1 / std::sqrt(per.k);
    }
    return result;
}

} // namespace cantor::counterexample
