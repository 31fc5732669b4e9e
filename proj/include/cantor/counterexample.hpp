#pragma once

#include <memory>
#include <vector>

#include "cantor/functionals.hpp"
#include "cantor/grid.hpp"
#include "cantor/stochastics.hpp"
#include "cantor/wos.hpp"

namespace cantor::counterexample {

/// f_Q = l(Q) chi_Q, represented piecewise on generation rep_gen >= gen(Q).
BoundaryFunction f_basis(const DyadicCube& q, int rep_gen);

/// Plane bump extension: l(Q) on the 1.05 square, 0 outside the 1.1 square,
/// linear sup-norm ramp between (slope exactly 40 on the straight faces).
double bump_extension(const DyadicCube& q, Point x);

/// Number of basis ramp regions 1.1Q \ 1.05Q covering x.
int bump_overlap_count(const std::vector<DyadicCube>& basis, Point x);

/// Pointwise signed bump sum over the plane.
double random_sum_at(const std::vector<DyadicCube>& basis,
                     const SignVector& signs, Point x);

/// Trace of the signed sum on the boundary lattice at generation rep_gen.
BoundaryFunction random_sum_trace(const std::vector<DyadicCube>& basis,
                                  const SignVector& signs, int rep_gen);

/// Fixed 64-point low-discrepancy pattern, identical across balls after
/// affine rescaling.
std::vector<Point> ball_quadrature(const Ball& ball);
inline constexpr int kQuadraturePoints = 64;

struct FieldConfig {
    Rect window{-1.0, -1.0, 2.0, 2.0};
    double h_fine = 1.0 / 512;   // basis cubes of generation <= fine_gen
    double h_coarse = 1.0 / 256; // deeper basis cubes
    int fine_gen = 2;
    double tol = 1e-8;
    uint64_t frame_walks = 1500;
    uint64_t seed = 1;
    double c_ball = 0.3;
    int local_cells = 192;       // local windows are local_cells^2 grids
};

/// Gradient sampler for the basis solutions u_Q: one hybrid global solve per
/// cube (walk-estimated frame data) plus local window refinements wherever a
/// sample ball is too small for the global spacing.
class FieldEngine {
public:
    FieldEngine(const CantorGeometry& geom, int basis_max_gen,
                const FieldConfig& config);
    ~FieldEngine();

    /// Registers the balls to sample (with their owning cubes); call once.
    void set_balls(std::vector<DyadicCube> cubes, std::vector<Ball> balls);

    const std::vector<Ball>& balls() const;
    const FieldConfig& config() const;

    /// Gradient of u_Q at every quadrature point of every registered ball,
    /// flattened as [ball * 64 + point].
    std::vector<Point> compute(const DyadicCube& q) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// -- Lemma 4.2 style comparability table -------------------------------------

struct LemmaRatioEntry {
    DyadicCube outer; // Q
    DyadicCube inner; // R inside Q
    double measured_mean = 0.0; // average |grad u_Q| over the B-hat ball of R
    double measured_rms = 0.0;
    double predicted = 0.0;     // l(Q) w(R) / (l(R) w(Q))
    double ratio = 0.0;         // measured_mean / predicted
};

struct LemmaRatioTable {
    std::vector<LemmaRatioEntry> entries;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double geometric_mean = 0.0;
    double worst_mean_rms_factor = 0.0; // max of rms/mean over entries
};

/// Measured-vs-predicted gradient averages for every nested pair R ⊆ Q with
/// generations <= depth; the harmonic-measure table supplies the prediction.
LemmaRatioTable verify_gradient_lemma(const CantorGeometry& geom, int depth,
                                      const solver::HarmonicMeasureTable& table,
                                      const FieldConfig& config);

// -- sqrt(k) growth experiment ------------------------------------------------

struct NkConfig {
    int depth = 4;      // basis = all cubes of generation <= depth
    int k_max = 3;
    int trials = 64;
    uint64_t seed = 7;
    uint64_t walks = 1000000; // master measure table
    Point pole{20.0, 0.0};
    FieldConfig field;
    int exact_enum_limit = 12; // enumerate all sign patterns when possible
};

struct NkPerK {
    int k = 1;
    double mean = 0.0;        // E || Nhat_k(|grad u|) ||_{L^{1,inf}}
    double stderr_of = 0.0;
    double ratio_to_k1 = 0.0; // mean_k / mean_1
    double sqrtk_ratio = 0.0; // mean_k / (mean_1 sqrt k)
    double pz_min_freq = 1.0; // min over family cubes of P(v >= mean/2)
    double khintchine_lo = 1.0, khintchine_hi = 1.0;
    size_t family_size = 0;
    double covered_measure = 0.0;
};

struct NkResult {
    std::vector<NkPerK> per_k;
    int trials = 0;
    int depth = 0;
    uint64_t seed = 0;
    bool exact_enumeration = false;
};

NkResult nk_experiment(const CantorGeometry& geom, const NkConfig& config);

} // namespace cantor::counterexample
