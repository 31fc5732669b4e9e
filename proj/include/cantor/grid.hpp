#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cantor/geometry.hpp"
#include "cantor/parallel.hpp"

namespace cantor::solver {

enum class CellType : uint8_t { Interior, DirichletSet, DirichletFrame };

struct GridSpec {
    Rect window{-1.0, -1.0, 2.0, 2.0};
    double h = 1.0 / 256;
    double tol = 1e-9;     // max |u - mean(neighbors)| over interior cells
    int max_cycles = 200;
    int pre_sweeps = 2;
    int post_sweeps = 2;
    bool polish_bounds = false; // enforce min/max-data bounds exactly
};

/// Cell-centered classification of a window against the geometry: a cell is
/// DirichletSet when its center lies within h/2 of a boundary square, and
/// DirichletFrame on the outermost ring.
class GridProblem {
public:
    GridProblem(const CantorGeometry& geom, const GridSpec& spec);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return spec_.h; }
    const GridSpec& spec() const { return spec_; }
    const std::vector<CellType>& mask() const { return mask_; }

    size_t index(int i, int j) const { return static_cast<size_t>(j) * nx_ + i; }
    Point center(int i, int j) const {
        return {spec_.window.x0 + (i + 0.5) * spec_.h,
                spec_.window.y0 + (j + 0.5) * spec_.h};
    }

    /// Frame cells in canonical (row-major) order.
    const std::vector<size_t>& frame_cells() const { return frame_cells_; }
    /// Set cells with the path index of the nearest leaf square.
    const std::vector<std::pair<size_t, uint64_t>>& set_cells() const {
        return set_cells_;
    }
    std::vector<Point> frame_points() const;

private:
    GridSpec spec_;
    int nx_ = 0, ny_ = 0;
    std::vector<CellType> mask_;
    std::vector<size_t> frame_cells_;
    std::vector<std::pair<size_t, uint64_t>> set_cells_;
};

struct SolveStats {
    int cycles = 0;
    double residual = 0.0;
    int polish_sweeps = 0;
};

/// Converged five-point Dirichlet solution on a classified window.
class GridSolution {
public:
    GridSolution() = default;
    GridSolution(const GridProblem* problem, std::vector<double> u,
                 SolveStats stats);

    const GridProblem& problem() const { return *problem_; }
    const std::vector<double>& values() const { return u_; }
    const SolveStats& stats() const { return stats_; }
    double h() const { return problem_->h(); }
    const Rect& window() const { return problem_->spec().window; }

    double value(int i, int j) const { return u_[problem_->index(i, j)]; }

    /// Bilinear interpolation of cell values.
    double value_at(Point p) const;

    /// Central-difference gradient at a cell center.
    Point gradient_cell(int i, int j) const;

    /// Bilinear interpolation of cell-centered gradients; requires the four
    /// surrounding cells to be clean (no Dirichlet cell within 2 cells).
    std::optional<Point> gradient_at(Point p) const;

    bool clean(int i, int j) const { return clean_[problem_->index(i, j)]; }

    double residual_max() const;

private:
    const GridProblem* problem_ = nullptr;
    std::vector<double> u_;
    std::vector<uint8_t> clean_; // no Dirichlet cell within Chebyshev radius 2
    SolveStats stats_;
};

/// Multigrid solve with red-black smoothing. `set_values[k]` matches
/// problem.set_cells()[k] and `frame_values[k]` matches frame_cells()[k].
GridSolution grid_solve(const GridProblem& problem,
                        const std::vector<double>& set_values,
                        const std::vector<double>& frame_values,
                        Exec exec = Exec::Parallel);

struct GradientAverage {
    double mean_abs = 0.0; // mean |grad u| over clean cells in the ball
    double rms = 0.0;      // root mean square of |grad u|
    long cells = 0;
};

/// Gradient averages over grid cells with centers in the ball; cells within
/// two cells of a Dirichlet cell are excluded. Throws when nothing remains.
GradientAverage gradient_avg(const GridSolution& sol, const Ball& ball);

struct ExtensionSpec {
    double collar = 0.0; // absolute width; 0 means 8*h
    bool smooth = false; // smoothstep profile instead of the linear ramp
};

/// Volume pairing  sum over interior cells of grad u . grad phi~ h^2, where
/// phi~ is the collar extension phi(nearest set point) * ramp(dist/collar).
double weak_normal_pairing(const GridSolution& sol,
                           const std::function<double(Point)>& phi_on_set,
                           const CantorGeometry& geom,
                           const ExtensionSpec& ext = {});

/// Discrete flux of u through the axis-aligned contour of `box` (one-sided
/// differences across the contour), an independent check of the pairing.
double contour_flux(const GridSolution& sol, const Rect& box);

/// sum_Q |pairing of sol against the unit bump over Q|.
double cube_variation(const GridSolution& sol,
                      const std::vector<DyadicCube>& family,
                      const CantorGeometry& geom, double collar_frac = 0.25);

/// Fundamental solution -(1/2 pi) log |z| (so -Laplace E = delta).
double fundamental_solution(Point z);
Point fundamental_solution_grad(Point z);

/// Green function estimate G(pole, .) = E(pole - .) - h where h carries the
/// boundary data E(pole - xi) (set cells exact, frame via walk estimates).
class GreenField {
public:
    GreenField(Point pole, const CantorGeometry& geom, const GridSpec& spec,
               uint64_t frame_walks, uint64_t seed);

    double at(Point x) const;
    const GridSolution& correction() const { return h_; }
    Point pole() const { return pole_; }

private:
    Point pole_;
    double h_spacing_;
    GridProblem problem_;
    GridSolution h_;
};

} // namespace cantor::solver
