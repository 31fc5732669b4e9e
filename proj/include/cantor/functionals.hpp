#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cantor/geometry.hpp"
#include "cantor/parallel.hpp"
#include "cantor/wos.hpp"

namespace cantor {

/// Boundary function with an explicit representation: piecewise constant on
/// one generation's cubes, atoms over a cube family (zero elsewhere), or
/// values on sample points with weights.
class BoundaryFunction {
public:
    enum class Rep { CubePiecewise, FamilyAtoms, SamplePoints };

    static BoundaryFunction cube_piecewise(int gen, std::vector<double> values);
    static BoundaryFunction family_atoms(std::vector<DyadicCube> cubes,
                                         std::vector<double> values,
                                         double zero_weight);
    static BoundaryFunction sample_points(std::vector<Point> points,
                                          std::vector<double> values,
                                          std::vector<double> weights);

    Rep rep() const { return rep_; }
    size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Point>& points() const { return points_; }
    const std::vector<DyadicCube>& cubes() const { return cubes_; }
    int gen() const { return gen_; }
    double zero_weight() const { return zero_weight_; }

    /// Value on the cube (CubePiecewise/FamilyAtoms reps).
    double at_cube(const DyadicCube& q) const;

    BoundaryFunction scaled(double c) const;

private:
    Rep rep_ = Rep::CubePiecewise;
    int gen_ = 0;
    double zero_weight_ = 0.0;
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<Point> points_;
    std::vector<DyadicCube> cubes_;
};

/// sup_{lambda>0} lambda * sigma(|f| > lambda), exact via the sorted sweep.
double weak_l1_norm(const BoundaryFunction& f);

/// Brute-force oracle: sup over a refined lambda grid (test reference).
double weak_l1_norm_grid_oracle(const BoundaryFunction& f, int grid_per_level);

double lp_norm(const BoundaryFunction& f, double p);

/// Pointwise witness g(x) = sup_{y != x} |f(x)-f(y)| / |x-y| (a valid
/// pointwise gradient bound for the pair inequality). SamplePoints rep only.
BoundaryFunction hajlasz_witness(const BoundaryFunction& f,
                                 Exec exec = Exec::Parallel);

/// Max pairwise difference quotient over the sample points.
double lipschitz_constant(const BoundaryFunction& f, Exec exec = Exec::Parallel);
double lipschitz_constant(std::span<const Point> pts,
                          std::span<const double> vals,
                          Exec exec = Exec::Parallel);

// -- nontangential maximal operators ----------------------------------------

/// sup |u| over field samples inside the truncated cone at xi; throws when
/// the cone captures no samples.
double nt_max(std::span<const Point> pts, std::span<const double> vals,
              Point xi, double alpha, double R, const CantorGeometry& geom);

/// sup over cone points of RMS ball averages of a field. The ball radius is
/// c * dist(y, boundary) by default; VertexRange uses c * |xi - y|.
enum class ModifiedRadius { PointDistance, VertexRange };

double nt_max_modified(std::span<const Point> pts, Point xi, double alpha,
                       double c, double R, const CantorGeometry& geom,
                       const std::function<double(Point, double)>& rms_in_ball,
                       ModifiedRadius convention = ModifiedRadius::PointDistance);

/// Smallest aperture alpha such that the B-hat ball of every generation-g
/// cube lies inside the cone of each of the cube's own corner points.
double min_aperture_for_bhat(int gen, double c_ball,
                             const CantorGeometry& geom);

// -- maximal cube families ---------------------------------------------------

struct MaximalCubeFamily {
    int k = 1;
    std::vector<DyadicCube> cubes;
    double covered_measure = 0.0; // sum of member measures
    int max_gen = 0;
};

/// Shallowest cubes on each branch whose density ratio dominates all of the
/// k-1 nearest ancestors:
///   est(Q)/l(Q) * l(P^i)/est(P^i) >= 1 for i = 1..k-1.
/// k = 1 has no conditions, so the family is the root alone.
MaximalCubeFamily maximal_cubes(const solver::HarmonicMeasureTable& table,
                                int k, int max_gen);

/// N-hat linearization: the field average over each family cube's B-hat ball
/// as a FamilyAtoms boundary function (zero off the cover).
BoundaryFunction nhat_k(
    const MaximalCubeFamily& family, double c_ball, const CantorGeometry& geom,
    const std::function<double(const DyadicCube&, const Ball&)>& ball_average);

} // namespace cantor
