#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "affwalk/fixtures.hpp"
#include "affwalk/limitlaws.hpp"
#include "test_util.hpp"

using namespace affwalk;

namespace {

MeasureSpec sl3_mixed() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::SAff;
    mu.d = 3;
    Vec z = {0.0, 0.0, 0.0};
    mu.atoms = {
        {0.5, {Matrix::diagonal({2.0, 1.0, 0.5}), z}},
        {0.25, {fixtures::rot3_z(1.0), z}},
        {0.25, {fixtures::rot3_x(0.7), z}},
    };
    return mu;
}

} // namespace

TEST_CASE("lyapunov_spectrum: balanced scalar fixture has zero top exponent") {
    LyapunovSpectrum sp = lyapunov_spectrum(fixtures::d1_symmetric(), 20000, 32, 101);
    double tol = std::max(3 * sp.se[0], 1e-2);
    CHECK(std::abs(sp.lambda[0]) <= tol);
}

TEST_CASE("lyapunov_spectrum: commuting diagonal ensemble matches the enumeration oracle") {
    MeasureSpec mu = fixtures::commuting_diag();
    Vec oracle = fixtures::commuting_diag_oracle();
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 5000, 32, 102);
    for (int i = 0; i < 3; ++i) {
        double tol = std::max(3 * sp.se[static_cast<std::size_t>(i)], 1e-6);
        CHECK(std::abs(sp.lambda[static_cast<std::size_t>(i)] - oracle[static_cast<std::size_t>(i)]) <= tol);
    }
}

TEST_CASE("lyapunov_spectrum: one-atom measure recovers eigenvalue moduli") {
    MeasureSpec mu;
    mu.d = 2;
    mu.atoms = {{1.0, {Matrix(2, 2, {2.0, 1.0, 0.0, 0.5}), {0.0, 0.0}}}};
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 100000, 2, 103);
    CHECK(std::abs(sp.lambda[0] - std::log(2.0)) < 1e-3);
    CHECK(std::abs(sp.lambda[1] + std::log(2.0)) < 1e-3);
}

TEST_CASE("lyapunov_spectrum: estimates are non-increasing") {
    for (auto mu : {fixtures::saff2(), fixtures::aff3_symmetric(), fixtures::sl2_symmetric()}) {
        LyapunovSpectrum sp = lyapunov_spectrum(mu, 2000, 16, 104);
        for (std::size_t p = 1; p < sp.lambda.size(); ++p) CHECK(sp.lambda[p - 1] >= sp.lambda[p]);
    }
}

TEST_CASE("spectrum gaps on dense fixtures are strict beyond noise") {
    for (auto mu : {fixtures::saff2(), fixtures::aff3_symmetric(), fixtures::sl2_symmetric()}) {
        LyapunovSpectrum sp = lyapunov_spectrum(mu, 10000, 48, 140);
        for (std::size_t p = 1; p < sp.lambda.size(); ++p) {
            double se = std::sqrt(sp.se[p - 1] * sp.se[p - 1] + sp.se[p] * sp.se[p]);
            CHECK(sp.lambda[p - 1] - sp.lambda[p] > 3 * se);
        }
    }
}

TEST_CASE("covariance estimate is symmetric positive semidefinite") {
    LimitLawReport rep = sigma_and_phi(fixtures::sl2_symmetric(), 5000, 64, 141);
    CHECK(max_abs_diff(rep.phi, rep.phi.transposed()) < 1e-12);
    SymEigen eig = sym_eigen(rep.phi);
    for (double v : eig.values) CHECK(v >= -1e-10);
}

TEST_CASE("spectrum symmetry and unimodularity invariants") {
    LyapunovSpectrum sym = lyapunov_spectrum(fixtures::aff3_symmetric(), 20000, 48, 105);
    for (int p = 0; p < 3; ++p) {
        int q = 2 - p;
        double se = std::sqrt(sym.se[static_cast<std::size_t>(p)] * sym.se[static_cast<std::size_t>(p)] +
                              sym.se[static_cast<std::size_t>(q)] * sym.se[static_cast<std::size_t>(q)]);
        CHECK(std::abs(sym.lambda[static_cast<std::size_t>(p)] + sym.lambda[static_cast<std::size_t>(q)]) <= 3 * se);
    }
    LyapunovSpectrum uni = lyapunov_spectrum(fixtures::sl2_symmetric(), 20000, 48, 106);
    CHECK(std::abs(uni.partial_sum.back()) <= std::max(3 * uni.partial_sum_se.back(), 1e-12));
}

TEST_CASE("spectrum_crosscheck: top degree reduces to the determinant rate") {
    MeasureSpec mu = fixtures::commuting_diag();
    double exact = 0;
    for (const Atom& a : mu.atoms) exact += a.weight * std::log(std::abs(determinant(a.map.linear)));
    GrowthEstimate est = spectrum_crosscheck(mu, 3, 4000, 16, 107);
    CHECK(std::abs(est.value - exact) <= std::max(3 * est.se, 1e-9));
}

TEST_CASE("spectrum_crosscheck: scalar case matches the spectrum") {
    MeasureSpec mu = fixtures::d1_symmetric();
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 10000, 32, 108);
    GrowthEstimate est = spectrum_crosscheck(mu, 1, 10000, 32, 109);
    double se = std::sqrt(sp.se[0] * sp.se[0] + est.se * est.se);
    CHECK(std::abs(est.value - sp.lambda[0]) <= 3 * se);
}

TEST_CASE("spectrum_crosscheck: wedge route agrees with QR partial sums") {
    MeasureSpec mu = sl3_mixed();
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 10000, 32, 110);
    for (int p = 1; p <= 3; ++p) {
        GrowthEstimate est = spectrum_crosscheck(mu, p, 10000, 32, 110 + static_cast<std::uint64_t>(p));
        double se = std::sqrt(sp.partial_sum_se[static_cast<std::size_t>(p - 1)] * sp.partial_sum_se[static_cast<std::size_t>(p - 1)] +
                              est.se * est.se);
        CHECK(std::abs(est.value - sp.partial_sum[static_cast<std::size_t>(p - 1)]) <= std::max(3 * se, 1e-4));
    }
}

TEST_CASE("spectrum_crosscheck: dimension guard") {
    MeasureSpec mu;
    mu.d = 7;
    mu.atoms = {{1.0, AffineMap::identity(7)}};
    CHECK_THROWS_AS(spectrum_crosscheck(mu, 2, 10, 2, 1), bad_degree);
}

TEST_CASE("block_exponents: k=0 complement block is trivial") {
    MeasureSpec mu = fixtures::saff2();
    BlockExponents be = block_exponents(mu, 0, 4000, 24, 115);
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 4000, 24, 116);
    CHECK(be.lambda_s == 0.0);
    CHECK(be.se_s == 0.0);
    double se = std::sqrt(be.se_w * be.se_w + sp.se[0] * sp.se[0]);
    CHECK(std::abs(be.lambda_w - sp.lambda[0]) <= 3 * se);
}

TEST_CASE("block_exponents: block difference recovers the next exponent") {
    MeasureSpec mu = fixtures::saff2();
    BlockExponents be = block_exponents(mu, 1, 10000, 32, 117);
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 10000, 32, 118);
    double se = std::sqrt(be.se_diff * be.se_diff + sp.se[1] * sp.se[1]);
    CHECK(std::abs(be.diff - sp.lambda[1]) <= 3 * se);

    MeasureSpec sym = fixtures::aff3_symmetric();
    BlockExponents bs = block_exponents(sym, 1, 10000, 32, 119);
    LyapunovSpectrum ss = lyapunov_spectrum(sym, 10000, 32, 120);
    double se2 = std::sqrt(bs.se_diff * bs.se_diff + ss.se[1] * ss.se[1]);
    CHECK(std::abs(bs.diff - ss.lambda[1]) <= 3 * se2);
    CHECK(bs.diff >= -3 * bs.se_diff); // middle exponent not below zero
}

TEST_CASE("opposition_involution: negate and reverse") {
    CartanVector z{{0.0, 0.0, 0.0}};
    CHECK(opposition_involution(z).kappa == Vec{0.0, 0.0, 0.0});
    CartanVector v{{3.0, 1.0, -2.0}};
    CHECK(opposition_involution(v).kappa == Vec{2.0, -1.0, -3.0});

    Rng rng(121);
    for (int trial = 0; trial < 1000; ++trial) {
        Matrix g = testutil::random_invertible(rng, 3);
        CartanVector lhs = cartan_vector(inverse(g));
        CartanVector rhs = opposition_involution(cartan_vector(g));
        for (int i = 0; i < 3; ++i)
            CHECK(lhs.kappa[static_cast<std::size_t>(i)] ==
                  doctest::Approx(rhs.kappa[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
}

TEST_CASE("sigma_and_phi: deterministic word gives vanishing covariance") {
    MeasureSpec mu;
    mu.d = 2;
    mu.atoms = {{1.0, {Matrix(2, 2, {2.0, 1.0, 0.0, 0.5}), {0.0, 0.0}}}};
    LimitLawReport rep = sigma_and_phi(mu, 20000, 8, 122);
    CHECK(std::abs(rep.sigma[0] - std::log(2.0)) < 1e-3);
    CHECK(std::abs(rep.sigma[1] + std::log(2.0)) < 1e-3);
    CHECK(rep.phi.max_abs() < 1e-12);
}

TEST_CASE("sigma_and_phi: scalar fixture matches the enumerated variance") {
    LimitLawReport rep = sigma_and_phi(fixtures::d1_symmetric(), 10000, 128, 123);
    double v = std::log(2.0) * std::log(2.0);
    CHECK(std::abs(rep.sigma[0]) <= std::max(3 * rep.sigma_se[0], 1e-2));
    CHECK(std::abs(rep.phi(0, 0) - v) <= 0.4 * v);
}

TEST_CASE("sigma_and_phi: symmetric unimodular fixture has opposite-signed growth pair") {
    MeasureSpec mu = fixtures::sl2_symmetric();
    LimitLawReport rep = sigma_and_phi(mu, 10000, 64, 124);
    LyapunovSpectrum sp = lyapunov_spectrum(mu, 10000, 64, 125);
    double se0 = std::sqrt(rep.sigma_se[0] * rep.sigma_se[0] + sp.se[0] * sp.se[0]);
    CHECK(std::abs(rep.sigma[0] - sp.lambda[0]) <= 3 * se0);
    CHECK(std::abs(rep.sigma[1] + sp.lambda[0]) <= 3 * std::sqrt(rep.sigma_se[1] * rep.sigma_se[1] + sp.se[0] * sp.se[0]));
    CHECK(rep.phi(0, 0) > 0);
}

TEST_CASE("lil_diagnostic: scalar fixture stays in the dilated ball and leaves the shrunk one") {
    std::vector<long> grid;
    for (long n = 100; n <= 100000; n = static_cast<long>(n * 1.6) + 1) grid.push_back(n);
    grid.push_back(100000);
    LimitLawReport rep = lil_diagnostic(fixtures::d1_symmetric(), grid, 16, 126);
    CHECK(rep.containment_ratio >= 0.95);
    CHECK(rep.exited_half_ball);
}

TEST_CASE("lil_diagnostic: deterministic word pins every excursion at zero") {
    MeasureSpec mu;
    mu.d = 1;
    mu.atoms = {{1.0, {Matrix(1, 1, {2.0}), {0.0}}}};
    std::vector<long> grid = {100, 1000, 10000};
    LimitLawReport rep = lil_diagnostic(mu, grid, 4, 127);
    for (const Vec& p : rep.lil_points) CHECK(std::abs(p[0]) < 1e-9);
    CHECK_FALSE(rep.exited_half_ball);
}
