#include "cantor/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

#include "cantor/errors.hpp"
#include "cantor/wos.hpp"

namespace cantor::solver {

GridProblem::GridProblem(const CantorGeometry& geom, const GridSpec& spec)
    : spec_(spec) {
    if (spec.h <= 0) throw UsageError("grid spacing must be positive");
    nx_ = static_cast<int>(std::lround(spec.window.width() / spec.h));
    ny_ = static_cast<int>(std::lround(spec.window.height() / spec.h));
    if (nx_ < 8 || ny_ < 8) throw UsageError("grid too small");
    if (std::abs(nx_ * spec.h - spec.window.width()) > 1e-9 * spec.h ||
        std::abs(ny_ * spec.h - spec.window.height()) > 1e-9 * spec.h)
        throw UsageError("h must divide the window sides");
    mask_.assign(static_cast<size_t>(nx_) * ny_, CellType::Interior);

    const SquareSet& squares = geom.squares();
#pragma omp parallel for schedule(dynamic, 16)
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            if (i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1) {
                mask_[index(i, j)] = CellType::DirichletFrame;
                continue;
            }
            Point c = center(i, j);
            if (squares.distance(c) <= 0.5 * spec.h)
                mask_[index(i, j)] = CellType::DirichletSet;
        }
    }
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) {
            size_t k = index(i, j);
            if (mask_[k] == CellType::DirichletFrame)
                frame_cells_.push_back(k);
            else if (mask_[k] == CellType::DirichletSet)
                set_cells_.push_back({k, geom.nearest_leaf(center(i, j))});
        }
}

std::vector<Point> GridProblem::frame_points() const {
    std::vector<Point> pts;
    pts.reserve(frame_cells_.size());
    for (size_t k : frame_cells_) {
        int i = static_cast<int>(k % nx_);
        int j = static_cast<int>(k / nx_);
        pts.push_back(center(i, j));
    }
    return pts;
}

// -- multigrid ---------------------------------------------------------------

namespace {

struct Level {
    int nx = 0, ny = 0;
    double h = 0.0;
    std::vector<uint8_t> dirichlet;
    std::vector<double> u;
    std::vector<double> rhs;
    size_t idx(int i, int j) const { return static_cast<size_t>(j) * nx + i; }
};

void smooth(Level& lv, int sweeps, bool par) {
    double h2 = lv.h * lv.h;
    for (int s = 0; s < sweeps; ++s) {
        for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static) if (par)
            for (int j = 1; j < lv.ny - 1; ++j) {
                int start = 1 + ((j + color) & 1);
                size_t row = lv.idx(0, j);
                for (int i = start; i < lv.nx - 1; i += 2) {
                    size_t k = row + i;
                    if (lv.dirichlet[k]) continue;
                    lv.u[k] = 0.25 * (lv.u[k - 1] + lv.u[k + 1] + lv.u[k - lv.nx] +
                                      lv.u[k + lv.nx] + h2 * lv.rhs[k]);
                }
            }
        }
    }
}

double residual_max(const Level& lv, bool par) {
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) if (par)
    for (int j = 1; j < lv.ny - 1; ++j) {
        size_t row = lv.idx(0, j);
        for (int i = 1; i < lv.nx - 1; ++i) {
            size_t k = row + i;
            if (lv.dirichlet[k]) continue;
            double r = lv.u[k] - 0.25 * (lv.u[k - 1] + lv.u[k + 1] +
                                         lv.u[k - lv.nx] + lv.u[k + lv.nx] +
                                         lv.h * lv.h * lv.rhs[k]);
            double a = std::abs(r);
            if (a > worst) worst = a;
        }
    }
    return worst;
}

// rhs_coarse = average of fine-cell residuals of L u = rhs, L = -discrete
// Laplacian (so the smoother solves u = (sum nb + h^2 rhs)/4).
void restrict_residual(const Level& fine, Level& coarse, bool par) {
    double inv_h2 = 1.0 / (fine.h * fine.h);
#pragma omp parallel for schedule(static) if (par)
    for (int J = 0; J < coarse.ny; ++J) {
        for (int I = 0; I < coarse.nx; ++I) {
            size_t K = coarse.idx(I, J);
            coarse.u[K] = 0.0;
            if (coarse.dirichlet[K]) {
                coarse.rhs[K] = 0.0;
                continue;
            }
            double acc = 0.0;
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di) {
                    int i = 2 * I + di, j = 2 * J + dj;
                    if (i <= 0 || j <= 0 || i >= fine.nx - 1 || j >= fine.ny - 1)
                        continue;
                    size_t k = fine.idx(i, j);
                    if (fine.dirichlet[k]) continue;
                    double lap = (4.0 * fine.u[k] - fine.u[k - 1] - fine.u[k + 1] -
                                  fine.u[k - fine.nx] - fine.u[k + fine.nx]) *
                                 inv_h2;
                    acc += fine.rhs[k] - lap;
                }
            coarse.rhs[K] = 0.25 * acc;
        }
    }
}

void prolong_add(const Level& coarse, Level& fine, bool par) {
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j < fine.ny - 1; ++j) {
        for (int i = 1; i < fine.nx - 1; ++i) {
            size_t k = fine.idx(i, j);
            if (fine.dirichlet[k]) continue;
            // Bilinear cell-centered interpolation with edge clamping.
            int I = (i - 1) / 2, J = (j - 1) / 2;
            double fx = (i & 1) ? 0.75 : 0.25;
            double fy = (j & 1) ? 0.75 : 0.25;
            int I1 = std::min(I + 1, coarse.nx - 1);
            int J1 = std::min(J + 1, coarse.ny - 1);
            double v00 = coarse.u[coarse.idx(I, J)];
            double v10 = coarse.u[coarse.idx(I1, J)];
            double v01 = coarse.u[coarse.idx(I, J1)];
            double v11 = coarse.u[coarse.idx(I1, J1)];
            fine.u[k] += (1 - fx) * ((1 - fy) * v00 + fy * v01) +
                         fx * ((1 - fy) * v10 + fy * v11);
        }
    }
}

void v_cycle(std::vector<Level>& levels, size_t depth, int pre, int post,
             bool par) {
    Level& lv = levels[depth];
    if (depth + 1 == levels.size()) {
        smooth(lv, 200, par);
        return;
    }
    smooth(lv, pre, par);
    restrict_residual(lv, levels[depth + 1], par);
    v_cycle(levels, depth + 1, pre, post, par);
    prolong_add(levels[depth + 1], lv, par);
    smooth(lv, post, par);
}

} // namespace

GridSolution grid_solve(const GridProblem& problem,
                        const std::vector<double>& set_values,
                        const std::vector<double>& frame_values,
                        Exec exec) {
    if (set_values.size() != problem.set_cells().size() ||
        frame_values.size() != problem.frame_cells().size())
        throw UsageError("boundary value vectors do not match the problem");
    bool par = exec == Exec::Parallel;
    const GridSpec& spec = problem.spec();

    std::vector<Level> levels(1);
    levels.reserve(40); // keep references to levels[0] stable across pushes
    Level& fine = levels[0];
    fine.nx = problem.nx();
    fine.ny = problem.ny();
    fine.h = problem.h();
    fine.dirichlet.assign(problem.mask().size(), 0);
    for (size_t k = 0; k < problem.mask().size(); ++k)
        fine.dirichlet[k] = problem.mask()[k] != CellType::Interior;
    fine.rhs.assign(problem.mask().size(), 0.0);
    fine.u.assign(problem.mask().size(), 0.0);

    double data_min = kInf, data_max = -kInf, data_sum = 0.0;
    size_t data_n = set_values.size() + frame_values.size();
    for (size_t i = 0; i < set_values.size(); ++i) {
        fine.u[problem.set_cells()[i].first] = set_values[i];
        data_min = std::min(data_min, set_values[i]);
        data_max = std::max(data_max, set_values[i]);
        data_sum += set_values[i];
    }
    for (size_t i = 0; i < frame_values.size(); ++i) {
        fine.u[problem.frame_cells()[i]] = frame_values[i];
        data_min = std::min(data_min, frame_values[i]);
        data_max = std::max(data_max, frame_values[i]);
        data_sum += frame_values[i];
    }
    if (data_n == 0) throw UsageError("no boundary cells in the window");
    double guess = data_sum / static_cast<double>(data_n);
    for (size_t k = 0; k < fine.u.size(); ++k)
        if (!fine.dirichlet[k]) fine.u[k] = guess;

    while (true) {
        const Level& prev = levels.back();
        if (prev.nx % 2 || prev.ny % 2 || std::min(prev.nx, prev.ny) < 16) break;
        Level next;
        next.nx = prev.nx / 2;
        next.ny = prev.ny / 2;
        next.h = prev.h * 2;
        next.dirichlet.assign(static_cast<size_t>(next.nx) * next.ny, 0);
        for (int J = 0; J < next.ny; ++J)
            for (int I = 0; I < next.nx; ++I) {
                uint8_t d = 0;
                for (int dj = 0; dj < 2 && !d; ++dj)
                    for (int di = 0; di < 2 && !d; ++di)
                        d = prev.dirichlet[prev.idx(2 * I + di, 2 * J + dj)];
                if (I == 0 || J == 0 || I == next.nx - 1 || J == next.ny - 1)
                    d = 1;
                next.dirichlet[next.idx(I, J)] = d;
            }
        next.u.assign(next.dirichlet.size(), 0.0);
        next.rhs.assign(next.dirichlet.size(), 0.0);
        levels.push_back(std::move(next));
    }

    SolveStats stats;
    double res = residual_max(fine, par);
    while (res > spec.tol && stats.cycles < spec.max_cycles) {
        v_cycle(levels, 0, spec.pre_sweeps, spec.post_sweeps, par);
        ++stats.cycles;
        res = residual_max(fine, par);
    }
    if (res > spec.tol)
        throw ConvergenceError("grid solve stalled at residual " +
                               std::to_string(res));

    if (spec.polish_bounds) {
        for (size_t k = 0; k < fine.u.size(); ++k)
            if (!fine.dirichlet[k])
                fine.u[k] = std::clamp(fine.u[k], data_min, data_max);
        res = residual_max(fine, par);
        while (res > spec.tol && stats.polish_sweeps < 20000) {
            smooth(fine, 1, par);
            stats.polish_sweeps += 1;
            res = residual_max(fine, par);
        }
        if (res > spec.tol)
            throw ConvergenceError("bound polish failed to reconverge");
    }
    stats.residual = res;
    return GridSolution(&problem, std::move(fine.u), stats);
}

// -- GridSolution ------------------------------------------------------------

GridSolution::GridSolution(const GridProblem* problem, std::vector<double> u,
                           SolveStats stats)
    : problem_(problem), u_(std::move(u)), stats_(stats) {
    // Chebyshev-2 dilation of the Dirichlet cells marks cells whose central
    // differences stay clear of boundary data.
    int nx = problem_->nx(), ny = problem_->ny();
    const auto& mask = problem_->mask();
    std::vector<uint8_t> row(static_cast<size_t>(nx) * ny, 0);
    clean_.assign(row.size(), 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            uint8_t any = 0;
            for (int di = -2; di <= 2 && !any; ++di) {
                int ii = std::clamp(i + di, 0, nx - 1);
                any = mask[problem_->index(ii, j)] != CellType::Interior;
            }
            row[problem_->index(i, j)] = any;
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            uint8_t any = 0;
            for (int dj = -2; dj <= 2 && !any; ++dj) {
                int jj = std::clamp(j + dj, 0, ny - 1);
                any = row[problem_->index(i, jj)];
            }
            clean_[problem_->index(i, j)] = !any;
        }
}

double GridSolution::value_at(Point p) const {
    const Rect& w = window();
    double gx = (p.x - w.x0) / h() - 0.5;
    double gy = (p.y - w.y0) / h() - 0.5;
    int i = std::clamp(static_cast<int>(std::floor(gx)), 0, problem_->nx() - 2);
    int j = std::clamp(static_cast<int>(std::floor(gy)), 0, problem_->ny() - 2);
    double fx = std::clamp(gx - i, 0.0, 1.0);
    double fy = std::clamp(gy - j, 0.0, 1.0);
    double v00 = value(i, j), v10 = value(i + 1, j);
    double v01 = value(i, j + 1), v11 = value(i + 1, j + 1);
    return (1 - fx) * ((1 - fy) * v00 + fy * v01) +
           fx * ((1 - fy) * v10 + fy * v11);
}

Point GridSolution::gradient_cell(int i, int j) const {
    double inv = 0.5 / h();
    return {(value(i + 1, j) - value(i - 1, j)) * inv,
            (value(i, j + 1) - value(i, j - 1)) * inv};
}

std::optional<Point> GridSolution::gradient_at(Point p) const {
    const Rect& w = window();
    double gx = (p.x - w.x0) / h() - 0.5;
    double gy = (p.y - w.y0) / h() - 0.5;
    int i = static_cast<int>(std::floor(gx));
    int j = static_cast<int>(std::floor(gy));
    if (i < 1 || j < 1 || i + 1 >= problem_->nx() - 1 || j + 1 >= problem_->ny() - 1)
        return std::nullopt;
    for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di)
            if (!clean(i + di, j + dj)) return std::nullopt;
    double fx = gx - i, fy = gy - j;
    Point g00 = gradient_cell(i, j), g10 = gradient_cell(i + 1, j);
    Point g01 = gradient_cell(i, j + 1), g11 = gradient_cell(i + 1, j + 1);
    return Point{(1 - fx) * ((1 - fy) * g00.x + fy * g01.x) +
                     fx * ((1 - fy) * g10.x + fy * g11.x),
                 (1 - fx) * ((1 - fy) * g00.y + fy * g01.y) +
                     fx * ((1 - fy) * g10.y + fy * g11.y)};
}

double GridSolution::residual_max() const {
    double worst = 0.0;
    for (int j = 1; j < problem_->ny() - 1; ++j)
        for (int i = 1; i < problem_->nx() - 1; ++i) {
            if (problem_->mask()[problem_->index(i, j)] != CellType::Interior)
                continue;
            double r = value(i, j) - 0.25 * (value(i - 1, j) + value(i + 1, j) +
                                             value(i, j - 1) + value(i, j + 1));
            worst = std::max(worst, std::abs(r));
        }
    return worst;
}

// -- derived quantities ------------------------------------------------------

GradientAverage gradient_avg(const GridSolution& sol, const Ball& ball) {
    const GridProblem& pb = sol.problem();
    const Rect& w = pb.spec().window;
    double h = pb.h();
    Rect bb = rect_from_ball(ball);
    if (!w.contains(bb)) throw UsageError("ball not inside the grid window");
    int i0 = std::max(1, static_cast<int>((bb.x0 - w.x0) / h) - 1);
    int i1 = std::min(pb.nx() - 2, static_cast<int>((bb.x1 - w.x0) / h) + 1);
    int j0 = std::max(1, static_cast<int>((bb.y0 - w.y0) / h) - 1);
    int j1 = std::min(pb.ny() - 2, static_cast<int>((bb.y1 - w.y0) / h) + 1);
    GradientAverage avg;
    double sum = 0.0, sum2 = 0.0;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            Point c = pb.center(i, j);
            if (dist(c, ball.center) > ball.radius) continue;
            if (!sol.clean(i, j))
                throw ConvergenceError(
                    "ball too close to boundary cells for gradient averages");
            Point g = sol.gradient_cell(i, j);
            double m = norm(g);
            sum += m;
            sum2 += m * m;
            ++avg.cells;
        }
    if (avg.cells == 0)
        throw ConvergenceError("no grid cells inside the ball");
    avg.mean_abs = sum / avg.cells;
    avg.rms = std::sqrt(sum2 / avg.cells);
    return avg;
}

namespace {
double ramp(double t, bool smooth) {
    double v = std::clamp(t, 0.0, 1.0);
    return smooth ? v * v * (3 - 2 * v) : v;
}
} // namespace

double weak_normal_pairing(const GridSolution& sol,
                           const std::function<double(Point)>& phi_on_set,
                           const CantorGeometry& geom,
                           const ExtensionSpec& ext) {
    const GridProblem& pb = sol.problem();
    double h = pb.h();
    double collar = ext.collar > 0 ? ext.collar : 8 * h;
    int nx = pb.nx(), ny = pb.ny();

    // Extensions are pinned to phi itself on set cells (profile 1 below
    // h/2), so by summation by parts the pairing depends on the extension
    // only through cells where the discrete Laplacian of u vanishes.
    std::vector<double> phi(static_cast<size_t>(nx) * ny, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Point c = pb.center(i, j);
            double d = geom.squares().distance(c);
            if (d >= collar) continue;
            int leaf = geom.squares().nearest(c);
            Point on_set = closest_point_rect(c, geom.squares().rect(leaf));
            double profile =
                d <= 0.5 * h ? 1.0 : ramp(1.0 - d / collar, ext.smooth);
            phi[pb.index(i, j)] = phi_on_set(on_set) * profile;
        }

    // Discrete Dirichlet form: sum over grid faces of du * dphi, the exact
    // summation-by-parts dual of the five-point stencil.
    double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            size_t k = pb.index(i, j);
            if (i + 1 < nx)
                acc += (sol.values()[k + 1] - sol.values()[k]) *
                       (phi[k + 1] - phi[k]);
            if (j + 1 < ny)
                acc += (sol.values()[k + nx] - sol.values()[k]) *
                       (phi[k + nx] - phi[k]);
        }
    return acc;
}

double contour_flux(const GridSolution& sol, const Rect& box) {
    const GridProblem& pb = sol.problem();
    const Rect& w = pb.spec().window;
    double h = pb.h();
    int i0 = static_cast<int>(std::lround((box.x0 - w.x0) / h));
    int i1 = static_cast<int>(std::lround((box.x1 - w.x0) / h));
    int j0 = static_cast<int>(std::lround((box.y0 - w.y0) / h));
    int j1 = static_cast<int>(std::lround((box.y1 - w.y0) / h));
    if (i0 < 1 || j0 < 1 || i1 >= pb.nx() - 1 || j1 >= pb.ny() - 1 ||
        i0 >= i1 || j0 >= j1)
        throw UsageError("contour not inside the grid");
    double flux = 0.0;
    for (int i = i0; i < i1; ++i) {
        flux += sol.value(i, j1) - sol.value(i, j1 - 1); // outward +y
        flux += sol.value(i, j0 - 1) - sol.value(i, j0); // outward -y
    }
    for (int j = j0; j < j1; ++j) {
        flux += sol.value(i1, j) - sol.value(i1 - 1, j);
        flux += sol.value(i0 - 1, j) - sol.value(i0, j);
    }
    return flux; // (du/dn) * h summed over faces, h cancels
}

double cube_variation(const GridSolution& sol,
                      const std::vector<DyadicCube>& family,
                      const CantorGeometry& geom, double collar_frac) {
    for (size_t a = 0; a < family.size(); ++a)
        for (size_t b = a + 1; b < family.size(); ++b)
            if (family[a].contains(family[b]) || family[b].contains(family[a]))
                throw UsageError("cube_variation family must be disjoint");
    double total = 0.0;
    for (const DyadicCube& q : family) {
        uint64_t lo, hi;
        geom.leaf_range(q, lo, hi);
        auto phi = [&](Point p) {
            int leaf = geom.squares().nearest(p);
            return (static_cast<uint64_t>(leaf) >= lo &&
                    static_cast<uint64_t>(leaf) < hi)
                       ? 1.0
                       : 0.0;
        };
        ExtensionSpec ext;
        ext.collar = collar_frac * q.side();
        total += std::abs(weak_normal_pairing(sol, phi, geom, ext));
    }
    return total;
}

// -- Green -------------------------------------------------------------------

double fundamental_solution(Point z) {
    return -std::log(norm(z)) / (2 * std::numbers::pi);
}

Point fundamental_solution_grad(Point z) {
    double r2 = dot(z, z);
    double f = -1.0 / (2 * std::numbers::pi * r2);
    return {f * z.x, f * z.y};
}

GreenField::GreenField(Point pole, const CantorGeometry& geom,
                       const GridSpec& spec, uint64_t frame_walks,
                       uint64_t seed)
    : pole_(pole), h_spacing_(spec.h), problem_(geom, spec) {
    std::vector<double> set_values;
    set_values.reserve(problem_.set_cells().size());
    for (const auto& [k, leaf] : problem_.set_cells()) {
        int i = static_cast<int>(k % problem_.nx());
        int j = static_cast<int>(k / problem_.nx());
        set_values.push_back(fundamental_solution(pole - problem_.center(i, j)));
    }
    std::vector<double> frame_values = estimate_values(
        problem_.frame_points(), geom, frame_walks, seed,
        [&](const WalkResult& w) { return fundamental_solution(pole - w.stop); });
    h_ = grid_solve(problem_, set_values, frame_values);
}

double GreenField::at(Point x) const {
    if (dist(x, pole_) < 2 * h_spacing_)
        throw DomainError("Green estimate too close to the pole");
    return fundamental_solution(pole_ - x) - h_.value_at(x);
}

} // namespace cantor::solver
