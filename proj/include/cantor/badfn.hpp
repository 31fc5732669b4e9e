#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cantor/boxes.hpp"
#include "cantor/functionals.hpp"
#include "cantor/grid.hpp"
#include "cantor/stochastics.hpp"

namespace cantor::badfn {

/// Piecewise-procedural plane function over a box: the sloped profile
/// (9 eps - h)/eps in the interior, exact on sub-box hulls, tapered to zero
/// off the inner hull, and flattened to a constant on the inner hull of
/// every processed sub-box. Values scale with the box (amplitude =
/// scale * standard profile), keeping the Lipschitz constant ~ 1/eps.
class BadFunction {
public:
    double operator()(Point world) const;

    const EpsBox& box() const { return box_; }
    const std::vector<EpsBox>& subfamily() const { return sub_; }
    const std::vector<int>& processed() const { return processed_; }
    double plateau(size_t k) const { return plateau_[k]; }

    /// Base profile alone (the j = 0 stage).
    double base_profile(Point world) const;

    /// Gradient support, world rects: the sloped core...
    Rect support_core() const;
    /// ...minus these exclusions (inner hulls of processed sub-boxes),
    std::vector<Rect> support_exclusions() const;
    /// plus the blend shells of processed sub-boxes.
    std::vector<Rect> support_shells() const;

private:
    friend BadFunction build_bad_function(const EpsBox& box,
                                          std::vector<EpsBox> subfamily);
    EpsBox box_;
    std::vector<EpsBox> sub_;       // decreasing diameter
    std::vector<int> processed_;    // indices of sub_ that modify the profile
    std::vector<double> plateau_;   // constants, aligned with processed_
    std::vector<Rect> sub_hulls_;   // full hulls, box-local coords
};

/// The j = 0 stage alone (empty subfamily).
BadFunction build_f0(const EpsBox& box);

/// Iterates over the subfamily in decreasing diameter, flattening each
/// sub-box that is not inside a larger sub-box hull. Throws CheckError when
/// a sub-box top fails the constancy assertion (8 probe points).
BadFunction build_bad_function(const EpsBox& box, std::vector<EpsBox> subfamily);

struct TwoPointReport {
    long pairs = 0;
    double min_rate = 0.0; // min over pairs of (f(lo)-f(hi)) / (h_hi - h_lo)
    bool conclusive = false;
};

/// Rate of change of fn between boundary-set points in the box interior with
/// local-height gaps above mu^2 * diam.
TwoPointReport check_two_point(const BadFunction& fn, const SquareSet& boundary,
                               double mu);

struct SumLipschitzReport {
    bool disjoint_supports = false;
    int offending_a = -1, offending_b = -1;
    double single_max_lipschitz = 0.0; // max over members alone
    double sum_max_lipschitz = 0.0;    // max over sign draws of the sum
};

/// Support-disjointness by exact rect algebra plus sampled Lipschitz bounds
/// of random sign sums over the family.
SumLipschitzReport check_sum_lipschitz(std::span<const BadFunction> family,
                                       std::span<const Point> sample_points,
                                       int sign_trials, uint64_t seed);

enum class PQCase { SideTouch = 1, InteriorOnly = 2, InComplement = 3 };

const char* to_string(PQCase c);

/// Connected interior region carrying the energy lower bound: box slabs plus
/// caps (cases 1-2) or a ball with two axis cylinders (case 3).
struct EnergyRegion {
    PQCase case_tag = PQCase::InteriorOnly;
    std::vector<Rect> rects;
    std::optional<Ball> ball;
    Point xi_side;   // case 3: cylinder touch points
    Point xi_bottom;

    bool contains(Point p) const;
    Rect bounds() const;
};

/// Classifies the boundary behaviour inside the box hull and builds the
/// region; requires separated interior points (the witness property).
EnergyRegion build_PQ(const EpsBox& box, const SquareSet& boundary, double mu,
                      double outer_radius = 100.0);

struct EnergyResult {
    double normalized_energy = 0.0; // mean |grad u|^2 over P_Q, box units
    long cells = 0;
    PQCase case_tag = PQCase::InteriorOnly;
};

/// Grid average of |grad u|^2 over the region, lengths in units of diam M
/// and data in units of the profile amplitude.
EnergyResult energy_check(const BadFunction& fn, const EnergyRegion& region,
                          const SquareSet& boundary, int cells_across = 384);

// -- layered families and the Rellich growth experiment ----------------------

struct LayerFamilies {
    DyadicCube q0;
    std::vector<std::vector<DyadicCube>> layers; // F_1 .. F_k
};

/// F_i = descendants of q0 at generation gen(q0) + i * stride.
LayerFamilies build_layer_families(const DyadicCube& q0, int k,
                                   const CantorGeometry& geom, int stride = 1);

struct RellichConfig {
    int k_max = 3;
    int stride = 1;
    int trials = 64;
    uint64_t seed = 7;
    double eps_box = 1.0 / 20;
    double mu = 0.0; // 0: eps/100
    int local_cells = 384;
    double tol = 1e-8;
    uint64_t frame_walks = 400;
    double collar_frac = 0.25;
    int hajlasz_sample_gen_offset = 1; // sample points at gen(F_k)+offset
};

struct RellichPerK {
    int k = 1;
    double ratio = 0.0; // E[ sum_Q |sum_j eps_j pairing| ] / ||hajlasz||_L1
    double stderr_of = 0.0;
    double growth = 0.0;          // ratio_k / ratio_1
    double sqrtk_ratio = 0.0;     // growth / sqrt(k)
    double layer_variation = 0.0; // stage-1 best variation of layer k
    double khintchine_floor = 1.0;// min over cubes of E|sum eps a| * sqrt(k)/sum|a|
};

struct RellichResult {
    std::vector<RellichPerK> per_k;
    int trials = 0;
    uint64_t seed = 0;
    int depth = 0;
    size_t witness_count = 0;
};

/// Two-stage growth experiment: per-layer sign search maximizing the cube
/// variation, then random layer signs against the Hajlasz witness norm.
RellichResult rellich_failure_experiment(const CantorGeometry& geom,
                                         const DyadicCube& q0,
                                         const RellichConfig& config);

} // namespace cantor::badfn
