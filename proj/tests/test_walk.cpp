#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "affwalk/fixtures.hpp"
#include "affwalk/walk.hpp"

using namespace affwalk;

namespace {

AffineSubspace line_y_equals(double c) {
    Matrix dir(2, 1);
    dir(0, 0) = 1;
    return canonical_subspace({0.0, c}, dir);
}

AffineSubspace point_at(Vec p) { return canonical_subspace(p, Matrix(static_cast<int>(p.size()), 0)); }

double runsup_at(const RatioSeries& rs, std::size_t word, long n) {
    auto it = std::lower_bound(rs.n_grid.begin(), rs.n_grid.end(), n);
    return rs.run_sup[word][static_cast<std::size_t>(it - rs.n_grid.begin())];
}

} // namespace

TEST_CASE("run_forward: identity measure freezes the trajectory") {
    MeasureSpec mu;
    mu.d = 2;
    mu.atoms = {{1.0, AffineMap::identity(2)}};
    WordSampler s(1);
    Trajectory t = run_forward(mu, line_y_equals(2.5), 100, s);
    for (double d : t.dist) CHECK(d == doctest::Approx(2.5).epsilon(1e-12));
    CHECK_FALSE(t.overflow);
}

TEST_CASE("run_forward: perpendicular translation grows linearly") {
    MeasureSpec mu;
    mu.d = 3;
    mu.atoms = {{1.0, {Matrix::identity(3), {0.0, 0.0, 0.5}}}};
    Matrix dir(3, 1);
    dir(0, 0) = 1;
    AffineSubspace x0 = canonical_subspace({0.0, 1.0, 0.0}, dir);
    WordSampler s(2);
    Trajectory t = run_forward(mu, x0, 50, s);
    for (long n = 1; n <= 50; ++n) {
        double expect = std::sqrt(1.0 + 0.25 * n * n);
        CHECK(t.dist[static_cast<std::size_t>(n - 1)] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("run_forward: expanding scalar walk hits the cap and stays finite") {
    WordSampler s(3);
    Trajectory t = run_forward(fixtures::d1_expand(), point_at({1.0}), 2000, s);
    CHECK(t.overflow);
    for (double d : t.dist) {
        CHECK(std::isfinite(d));
        CHECK(d <= 1e300);
    }
    CHECK(t.dist.back() == 1e300);
}

TEST_CASE("cesaro_mass: identity walk keeps full mass") {
    MeasureSpec mu;
    mu.d = 2;
    mu.atoms = {{1.0, AffineMap::identity(2)}};
    RecurrenceReport rep = cesaro_mass(mu, line_y_equals(1.0), 500, 10.0, 128, 4);
    for (double m : rep.cesaro_curve) CHECK(m == 1.0);
    CHECK(rep.verdict == "recurrent-like");
}

TEST_CASE("cesaro_mass: scalar dichotomy") {
    RecurrenceReport contract = cesaro_mass(fixtures::d1_contract(), point_at({1.0}), 4000, 10.0, 128, 5);
    CHECK(contract.verdict == "recurrent-like");

    RecurrenceReport expand = cesaro_mass(fixtures::d1_expand(), point_at({1.0}), 4000, 10.0, 128, 6);
    CHECK(expand.verdict == "transient-like");
    CHECK(expand.cesaro_curve.back() <= 0.1);
}

TEST_CASE("backward_coupling: equal starts stay at distance zero") {
    MeasureSpec mu = fixtures::saff2();
    AffineSubspace x0 = line_y_equals(1.0);
    CouplingReport rep = backward_coupling(mu, x0, x0, 100, 8, 7);
    for (const Vec& series : rep.dist_series)
        for (double d : series) CHECK(d <= 1e-12);
    CHECK(rep.coupled_fraction == 1.0);
}

TEST_CASE("backward_coupling: contracting fixture couples nearly every word") {
    Matrix dy(2, 1);
    dy(1, 0) = 1;
    AffineSubspace x0 = line_y_equals(1.0);
    AffineSubspace y0 = canonical_subspace({2.0, 0.0}, dy);
    CouplingReport rep = backward_coupling(fixtures::saff2(), x0, y0, 500, 100, 8, 2);
    CHECK(rep.coupled_fraction >= 0.95);
}

TEST_CASE("backward_coupling: isometries never couple") {
    Matrix dy(2, 1);
    dy(1, 0) = 1;
    AffineSubspace x0 = line_y_equals(1.0);
    AffineSubspace y0 = canonical_subspace({2.0, 0.0}, dy);
    CouplingReport rep = backward_coupling(fixtures::rotation2(), x0, y0, 200, 8, 9);
    CHECK(rep.coupled_fraction == 0.0);
    for (const Vec& series : rep.dist_series)
        CHECK(series.back() == doctest::Approx(series.front()).epsilon(1e-9));
}

TEST_CASE("ratio_series: homothety gives the explicit linear ramp") {
    MeasureSpec mu;
    mu.d = 2;
    mu.atoms = {{1.0, {Matrix(2, 2, {2.0, 0.0, 0.0, 2.0}), {0.0, 0.0}}}};
    RatioSeries rs = ratio_series(mu, 0, 1000, 1, 10);
    for (std::size_t g = 0; g < rs.n_grid.size(); ++g) {
        double expect = rs.n_grid[g] * std::log(2.0);
        CHECK(rs.t_values[0][g] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("ratio_series: additive on conformal blocks") {
    MeasureSpec mu = fixtures::conformal2_balanced();
    Vec inc;
    for (std::size_t a = 0; a < mu.atoms.size(); ++a) inc.push_back(block_det_increment(mu, 1, a));
    for (double v : inc) CHECK(std::abs(std::abs(v) - std::log(2.0)) < 1e-12);

    RatioSeries rs = ratio_series(mu, 1, 2000, 2, 11);
    for (std::size_t w = 0; w < 2; ++w) {
        WordSampler s(derive_seed(11, w));
        double acc = 0;
        std::size_t gi = 0;
        for (long n = 1; n <= 2000 && gi < rs.n_grid.size(); ++n) {
            acc += inc[s.next_atom(mu)];
            if (n == rs.n_grid[gi]) {
                CHECK(std::abs(acc - rs.t_values[w][gi]) <= 1e-8);
                ++gi;
            }
        }
    }
}

TEST_CASE("ratio_series: invariant block never leaks") {
    RatioSeries rs = ratio_series(fixtures::saff2(), 1, 5000, 4, 12);
    CHECK(rs.max_block_leak <= 1e-12);
}

TEST_CASE("ratio_series: bounded on the contracting side, growing on the expanding side") {
    RatioSeries rec = ratio_series(fixtures::saff2(), 1, 20000, 2, 13);
    CHECK(std::abs(runsup_at(rec, 0, 20000) - runsup_at(rec, 0, 2000)) <= 1.0);

    RatioSeries trans = ratio_series(fixtures::saff2(), 0, 20000, 2, 14);
    CHECK(runsup_at(trans, 0, 20000) - runsup_at(trans, 0, 1000) >= 5.0);

    RatioSeries sym = ratio_series(fixtures::sl2_symmetric(), 0, 20000, 2, 15);
    CHECK(runsup_at(sym, 0, 20000) > runsup_at(sym, 0, 1000));
}

TEST_CASE("drift_verify: single-atom contraction matches the hand bound") {
    MeasureSpec mu;
    mu.d = 2;
    mu.atoms = {{1.0, {Matrix(2, 2, {0.5, 0.0, 0.0, 0.5}), {1.0, 0.0}}}};
    DriftReport rep = drift_verify(mu, 0, 1.0, 1, 500, 16);
    CHECK(rep.recipe_ok);
    CHECK(rep.a_hat <= 0.6);
    CHECK(rep.b_hat < 20.0);
    // states with gauge ten times the translation size contract by at least 0.6
    for (const DriftCell& cell : rep.cells)
        if (cell.lo >= 10.0) CHECK(cell.ratio_mean <= 0.6);
}

TEST_CASE("drift_verify: recipe constants certify the contracting fixture") {
    DriftReport rep = drift_verify(fixtures::saff2(), 1, std::nullopt, std::nullopt, 1000, 17);
    CHECK(rep.recipe_ok);
    CHECK(rep.a_hat < 1.0);
    CHECK(rep.delta > 0.0);
    CHECK(rep.n0 >= 1);
    CHECK(rep.kappa > 0.0);

    DriftReport rep2 = drift_verify(fixtures::saff2(), 1, std::nullopt, std::nullopt, 2000, 17);
    double se = 0;
    for (const DriftCell& c : rep.cells) se = std::max(se, c.se);
    double se2 = 0;
    for (const DriftCell& c : rep2.cells) se2 = std::max(se2, c.se);
    CHECK(std::abs(rep.a_hat - rep2.a_hat) <= 2.0 * std::sqrt(se * se + se2 * se2) + 1e-12);
}

TEST_CASE("drift_verify: no positive gap reports failure without throwing") {
    DriftReport rep = drift_verify(fixtures::saff2(), 0, std::nullopt, std::nullopt, 200, 18);
    CHECK_FALSE(rep.recipe_ok);
    CHECK_FALSE(rep.note.empty());
}

TEST_CASE("classify: direct dichotomy on the planar fixture") {
    MeasureSpec mu = fixtures::saff2();
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 4000, 32, 19);
    Classification points = classify(mu, 0, sp);
    CHECK(points.verdict == "transient");
    CHECK(points.z >= 3.0);
    Classification lines = classify(mu, 1, sp);
    CHECK(lines.verdict == "recurrent");
    CHECK(lines.z >= 3.0);
}

TEST_CASE("classify: symmetric measure decides through the exponent pairing") {
    MeasureSpec mu = fixtures::aff3_symmetric();
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 10000, 48, 20);
    Classification k0 = classify(mu, 0, sp);
    Classification k1 = classify(mu, 1, sp);
    Classification k2 = classify(mu, 2, sp);
    CHECK(k0.verdict == "transient");
    CHECK(k1.verdict == "transient");
    CHECK(k1.basis == "symmetry-identity");
    CHECK(k2.verdict == "recurrent");
    CHECK(k0.z >= 3.0);
    CHECK(k1.z >= 3.0);
    CHECK(k2.z >= 3.0);
}

TEST_CASE("classify: cesaro verdicts never contradict conclusive classifications") {
    MeasureSpec mu = fixtures::saff2();
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 4000, 32, 21);
    AffineSubspace lines0 = line_y_equals(1.0);
    AffineSubspace points0 = point_at({1.0, 0.0});
    RecurrenceReport rl = cesaro_mass(mu, lines0, 4000, 10.0, 128, 22);
    RecurrenceReport rp = cesaro_mass(mu, points0, 4000, 10.0, 128, 23);
    CHECK(classify(mu, 1, sp).verdict == "recurrent");
    CHECK(rl.verdict == "recurrent-like");
    CHECK(classify(mu, 0, sp).verdict == "transient");
    CHECK(rp.verdict == "transient-like");
}
