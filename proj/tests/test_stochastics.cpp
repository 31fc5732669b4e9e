#include <cmath>
#include <vector>

#include "doctest.h"

#include "cantor/errors.hpp"
#include "cantor/stochastics.hpp"

using namespace cantor;

namespace {
// Binomial oracle for a = (1,...,1): E|S_m| = 2^-m sum_j C(m,j) |m-2j|.
double binomial_abs_mean(int m) {
    double acc = 0.0;
    double c = 1.0; // C(m, 0)
    for (int j = 0; j <= m; ++j) {
        acc += c * std::abs(m - 2.0 * j);
        c = c * (m - j) / (j + 1.0);
    }
    return acc / std::ldexp(1.0, m);
}
} // namespace

TEST_CASE("khintchine exact values") {
    auto e1 = RademacherEnsemble::exact(1);
    std::vector<double> a1{1.0};
    auto r1 = khintchine_ratio(a1, e1);
    CHECK(r1.expectation == 1.0);
    CHECK(r1.ratio == 1.0);

    auto e2 = RademacherEnsemble::exact(2);
    std::vector<double> a2{1.0, 1.0};
    auto r2 = khintchine_ratio(a2, e2);
    CHECK(r2.expectation == 1.0); // patterns give |S| = 2,0,0,2
    CHECK(r2.ratio == doctest::Approx(1.0 / std::sqrt(2.0)));

    auto e16 = RademacherEnsemble::exact(16);
    std::vector<double> ones(16, 1.0);
    auto r16 = khintchine_ratio(ones, e16);
    CHECK(r16.expectation == doctest::Approx(binomial_abs_mean(16)).epsilon(1e-14));
    CHECK(r16.ratio >= 0.75);
    CHECK(r16.ratio <= 0.85);
}

TEST_CASE("khintchine symmetry invariances") {
    auto e = RademacherEnsemble::exact(4);
    std::vector<double> a{0.3, 1.7, 0.9, 2.2};
    std::vector<double> perm{2.2, 0.3, 0.9, 1.7};
    std::vector<double> flipped{-0.3, -1.7, -0.9, -2.2};
    double base = khintchine_ratio(a, e).expectation;
    CHECK(khintchine_ratio(perm, e).expectation == doctest::Approx(base).epsilon(1e-15));
    CHECK(khintchine_ratio(flipped, e).expectation == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("paley-zygmund frequencies") {
    auto e1 = RademacherEnsemble::exact(1);
    std::vector<double> a1{1.0};
    CHECK(paley_zygmund_freq(a1, e1) == 1.0);

    auto e2 = RademacherEnsemble::exact(2);
    std::vector<double> a2{1.0, 1.0};
    CHECK(paley_zygmund_freq(a2, e2) == 0.5);

    // calibrated floor over random coefficient draws
    auto e12 = RademacherEnsemble::exact(12);
    for (uint64_t draw = 0; draw < 20; ++draw) {
        std::vector<double> a(12);
        for (size_t i = 0; i < a.size(); ++i)
            a[i] = 0.05 + rng::uniform01(99, draw, i);
        CHECK(paley_zygmund_freq(a, e12) >= 0.25);
    }
}

TEST_CASE("monte carlo agrees with enumeration") {
    std::vector<double> a{1.0, 0.5, 2.0, 0.25, 1.5, 0.75, 1.0, 0.4};
    auto exact = RademacherEnsemble::exact(a.size());
    auto mc = RademacherEnsemble::monte_carlo(a.size(), 20000, 7);
    auto re = khintchine_ratio(a, exact);
    auto rm = khintchine_ratio(a, mc);
    CHECK(std::abs(rm.expectation - re.expectation) <= 3 * rm.stderr_mc);
}

TEST_CASE("rademacher stream determinism and balance") {
    SignVector v1 = rademacher_stream(64, 123, 9);
    SignVector v2 = rademacher_stream(64, 123, 9);
    CHECK(v1.signs == v2.signs);
    SignVector v3 = rademacher_stream(64, 123, 10);
    CHECK(v1.signs != v3.signs);

    // per-coordinate empirical mean over trials
    const int trials = 10000;
    const size_t m = 16;
    std::vector<double> mean(m, 0.0);
    for (int t = 0; t < trials; ++t) {
        SignVector v = rademacher_stream(m, 2024, static_cast<uint64_t>(t));
        for (size_t i = 0; i < m; ++i) mean[i] += v[i];
    }
    for (size_t i = 0; i < m; ++i) CHECK(std::abs(mean[i] / trials) <= 0.05);

    // pairwise sample correlation
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = i + 1; j < 4; ++j) {
            double acc = 0.0;
            for (int t = 0; t < trials; ++t) {
                SignVector v = rademacher_stream(4, 55, static_cast<uint64_t>(t));
                acc += v[i] * v[j];
            }
            CHECK(std::abs(acc / trials) <= 0.05);
        }
}

TEST_CASE("ensemble validation") {
    CHECK_THROWS_AS(RademacherEnsemble::exact(0), UsageError);
    CHECK_THROWS_AS(RademacherEnsemble::exact(21), UsageError);
    auto e = RademacherEnsemble::exact(3);
    std::vector<double> wrong{1.0};
    CHECK_THROWS_AS(khintchine_ratio(wrong, e), UsageError);
    std::vector<double> empty;
    CHECK_THROWS_AS(khintchine_ratio(empty, e), UsageError);
}
