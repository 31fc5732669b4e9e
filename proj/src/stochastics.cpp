#include "cantor/stochastics.hpp"

#include <cmath>

#include "cantor/errors.hpp"

namespace cantor {

SignVector rademacher_stream(size_t m, uint64_t seed, uint64_t trial) {
    SignVector v;
    v.seed = seed;
    v.trial = trial;
    v.signs.resize(m);
    for (size_t i = 0; i < m; ++i) v.signs[i] = rng::sign(seed, trial, i);
    return v;
}

RademacherEnsemble RademacherEnsemble::exact(size_t m) {
    if (m == 0) throw UsageError("ensemble dimension must be positive");
    if (m > kEnumerationLimit)
        throw UsageError("exact enumeration limited to m <= 20");
    RademacherEnsemble e;
    e.m_ = m;
    e.exact_ = true;
    return e;
}

RademacherEnsemble RademacherEnsemble::monte_carlo(size_t m, size_t trials,
                                                   uint64_t seed) {
    if (m == 0 || trials == 0)
        throw UsageError("ensemble dimension and trials must be positive");
    RademacherEnsemble e;
    e.m_ = m;
    e.exact_ = false;
    e.trials_ = trials;
    e.seed_ = seed;
    return e;
}

size_t RademacherEnsemble::pattern_count() const {
    return exact_ ? (size_t{1} << m_) : trials_;
}

void RademacherEnsemble::fill_pattern(size_t index,
                                      std::vector<int>& signs) const {
    signs.resize(m_);
    if (exact_) {
        for (size_t i = 0; i < m_; ++i)
            signs[i] = (index >> i) & 1 ? 1 : -1;
    } else {
        for (size_t i = 0; i < m_; ++i)
            signs[i] = rng::sign(seed_, index, i);
    }
}

KhintchineResult khintchine_ratio(std::span<const double> a,
                                  const RademacherEnsemble& ensemble) {
    if (a.empty()) throw UsageError("khintchine_ratio needs a nonempty sequence");
    if (a.size() != ensemble.dimension())
        throw UsageError("sequence length does not match ensemble dimension");
    double l2 = 0.0;
    for (double v : a) l2 += v * v;
    l2 = std::sqrt(l2);

    double acc = 0.0, acc2 = 0.0;
    size_t n = ensemble.pattern_count();
    std::vector<int> signs;
    for (size_t t = 0; t < n; ++t) {
        ensemble.fill_pattern(t, signs);
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * signs[i];
        acc += std::abs(s);
        acc2 += s * s;
    }
    KhintchineResult r;
    r.expectation = acc / static_cast<double>(n);
    r.ratio = l2 > 0 ? r.expectation / l2 : 0.0;
    if (!ensemble.is_exact()) {
        double var = acc2 / static_cast<double>(n) - r.expectation * r.expectation;
        r.stderr_mc = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    }
    return r;
}

double paley_zygmund_freq(std::span<const double> a,
                          const RademacherEnsemble& ensemble) {
    double threshold = 0.5 * khintchine_ratio(a, ensemble).expectation;
    size_t n = ensemble.pattern_count();
    size_t hits = 0;
    std::vector<int> signs;
    for (size_t t = 0; t < n; ++t) {
        ensemble.fill_pattern(t, signs);
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * signs[i];
        if (std::abs(s) >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

} // namespace cantor
