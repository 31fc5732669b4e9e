#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cantor/rng.hpp"

namespace cantor {

/// A +-1 assignment over an indexed basis, reproducible from (seed, trial).
struct SignVector {
    std::vector<int> signs;
    uint64_t seed = 0;
    uint64_t trial = 0;

    int operator[](size_t i) const { return signs[i]; }
    size_t size() const { return signs.size(); }
};

/// Deterministic sign vector: coordinate i is rng::sign(seed, trial, i).
SignVector rademacher_stream(size_t m, uint64_t seed, uint64_t trial);

/// Source of sign patterns: exact enumeration of all 2^m patterns for small
/// m, seeded Monte Carlo otherwise.
class RademacherEnsemble {
public:
    static constexpr size_t kEnumerationLimit = 20;

    /// Exact mode (m <= kEnumerationLimit).
    static RademacherEnsemble exact(size_t m);
    /// Monte Carlo mode with the given number of trials.
    static RademacherEnsemble monte_carlo(size_t m, size_t trials, uint64_t seed);

    size_t dimension() const { return m_; }
    bool is_exact() const { return exact_; }
    size_t pattern_count() const;

    /// Mean of fn(signs) over the ensemble (each exact pattern weighted
    /// 2^-m; MC patterns weighted 1/trials).
    template <typename Fn>
    double mean(Fn&& fn) const {
        double acc = 0.0;
        size_t n = pattern_count();
        std::vector<int> signs(m_);
        for (size_t t = 0; t < n; ++t) {
            fill_pattern(t, signs);
            acc += fn(std::span<const int>(signs));
        }
        return acc / static_cast<double>(n);
    }

    void fill_pattern(size_t index, std::vector<int>& signs) const;

private:
    size_t m_ = 0;
    bool exact_ = true;
    size_t trials_ = 0;
    uint64_t seed_ = 0;
};

struct KhintchineResult {
    double expectation = 0.0; // E |sum a_i eps_i|
    double ratio = 0.0;       // expectation / sqrt(sum a_i^2)
    double stderr_mc = 0.0;   // 0 in exact mode
};

/// E|sum a eps| and its ratio to the l2 norm of a.
KhintchineResult khintchine_ratio(std::span<const double> a,
                                  const RademacherEnsemble& ensemble);

/// P(|sum a eps| >= E|sum a eps| / 2).
double paley_zygmund_freq(std::span<const double> a,
                          const RademacherEnsemble& ensemble);

} // namespace cantor
