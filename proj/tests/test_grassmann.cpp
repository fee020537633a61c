#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "affwalk/grassmann.hpp"
#include "test_util.hpp"

using namespace affwalk;
using testutil::random_invertible;
using testutil::random_matrix;

namespace {

AffineSubspace random_subspace(Rng& rng, int k, int d) {
    Vec point(static_cast<std::size_t>(d));
    for (double& v : point) v = rng.uniform(-3.0, 3.0);
    return canonical_subspace(point, random_matrix(rng, d, k));
}

AffineMap random_affine(Rng& rng, int d) {
    AffineMap g{random_invertible(rng, d), Vec(static_cast<std::size_t>(d))};
    for (double& v : g.translation) v = rng.uniform(-2.0, 2.0);
    return g;
}

AffineSubspace line_y_equals(double c) {
    Matrix dir(2, 1);
    dir(0, 0) = 1;
    return canonical_subspace({0.0, c}, dir);
}

} // namespace

TEST_CASE("canonicalization: foot of perpendicular, idempotent") {
    Matrix dir(2, 1);
    dir(0, 0) = 1;
    AffineSubspace x = canonical_subspace({5.0, 1.0}, dir); // same line as {y=1}
    CHECK(x.base[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x.base[1] == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + static_cast<int>(rng.next_index(4));
        int k = static_cast<int>(rng.next_index(static_cast<std::size_t>(d)));
        AffineSubspace a = random_subspace(rng, k, d);
        AffineSubspace b = canonicalize(a);
        for (std::size_t i = 0; i < a.base.size(); ++i) CHECK(std::abs(a.base[i] - b.base[i]) <= 1e-12);
        CHECK(max_abs_diff(a.frame, b.frame) <= 1e-12);
    }
}

TEST_CASE("act: translation along the line fixes the canonical value") {
    AffineSubspace x = line_y_equals(1.0);
    AffineMap slide{Matrix::identity(2), {7.5, 0.0}};
    CHECK(same_subspace(act(slide, x), x, 1e-12));
}

TEST_CASE("act: homothety moves the line y=1 to y=2") {
    AffineSubspace x = line_y_equals(1.0);
    AffineMap g{2.0 * Matrix::identity(2), {0.0, 0.0}};
    AffineSubspace y = act(g, x);
    CHECK(y.base[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(y.base[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("act: composition is associative on canonical values") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + static_cast<int>(rng.next_index(3));
        int k = static_cast<int>(rng.next_index(static_cast<std::size_t>(d)));
        AffineSubspace x = random_subspace(rng, k, d);
        AffineMap g = random_affine(rng, d), h = random_affine(rng, d);
        CHECK(same_subspace(act(g, act(h, x)), act(g.compose(h), x), 1e-8));
    }
}

TEST_CASE("plucker_embed: line through the origin has no invariant-block part") {
    Matrix dir(2, 1);
    dir(0, 0) = 1;
    AffineSubspace x = canonical_subspace({0.0, 0.0}, dir);
    PluckerPoint p = plucker_embed(x);
    CHECK(norm2(p.w) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(norm2(p.wprime) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("plucker_embed: offset line has gauge ratio equal to the offset") {
    for (double c : {0.5, 3.0, -2.0}) {
        PluckerPoint p = plucker_embed(line_y_equals(c));
        CHECK(norm2(p.w) == doctest::Approx(std::abs(c)).epsilon(1e-12));
        CHECK(norm2(p.wprime) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("plucker_embed: equivariant under the wedge action of the embedding") {
    Rng rng(5);
    for (int d = 2; d <= 5; ++d)
        for (int k = 0; k < d; ++k)
            for (int trial = 0; trial < 10; ++trial) {
                AffineSubspace x = random_subspace(rng, k, d);
                AffineMap g = random_affine(rng, d);
                Vec lhs = plucker_embed(act(g, x)).full_vector();
                Vec rhs = exterior_power(embed_gl(g), k + 1).apply(plucker_embed(x).full_vector());
                CHECK(proj_distance_full(lhs, rhs) < 1e-8);
            }
}

TEST_CASE("u_delta: values on model lines") {
    Matrix dir(2, 1);
    dir(0, 0) = 1;
    PluckerPoint origin_line = plucker_embed(canonical_subspace({0.0, 0.0}, dir));
    for (double delta : {0.25, 1.0, 2.0}) CHECK(u_delta(origin_line, delta) == 0.0);

    PluckerPoint p = plucker_embed(line_y_equals(3.0));
    CHECK(u_delta(p, 1.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(u_delta(p, 2.0) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("dist_origin agrees with the gauge of the embedded point") {
    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        int d = 2 + static_cast<int>(rng.next_index(4));
        int k = static_cast<int>(rng.next_index(static_cast<std::size_t>(d)));
        AffineSubspace x = random_subspace(rng, k, d);
        CHECK(std::abs(u_delta(plucker_embed(x), 1.0) - dist_origin(x)) < 1e-10);
    }
}

TEST_CASE("proj_distance: projective identification and right angles") {
    PluckerPoint p = plucker_embed(line_y_equals(1.0));
    CHECK(proj_distance(p, p) == 0.0);
    PluckerPoint neg = p;
    for (double& v : neg.w) v = -v;
    for (double& v : neg.wprime) v = -v;
    CHECK(proj_distance(p, neg) == doctest::Approx(0.0).epsilon(1e-12));

    // orthogonal wedge vectors: the lines x=0 and y=0 through the origin
    Matrix dx(2, 1), dy(2, 1);
    dx(0, 0) = 1;
    dy(1, 0) = 1;
    PluckerPoint a = plucker_embed(canonical_subspace({0.0, 0.0}, dx));
    PluckerPoint b = plucker_embed(canonical_subspace({0.0, 0.0}, dy));
    CHECK(proj_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gauge invariance under raw-vector scaling") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + static_cast<int>(rng.next_index(3));
        int k = static_cast<int>(rng.next_index(static_cast<std::size_t>(d)));
        WedgeSplit ws = wedge_split(k, d);
        AffineSubspace x = random_subspace(rng, k, d);
        Vec raw = plucker_embed(x).full_vector();
        double lambda = rng.uniform(0.01, 50.0) * (rng.next01() < 0.5 ? -1.0 : 1.0);
        Vec scaled = raw;
        for (double& v : scaled) v *= lambda;
        PluckerPoint p = split_and_gauge(raw, ws);
        PluckerPoint q = split_and_gauge(scaled, ws);
        for (double delta : {0.5, 1.0, 2.0}) CHECK(std::abs(u_delta(p, delta) - u_delta(q, delta)) < 1e-10);
        CHECK(proj_distance(p, q) < 1e-10);
    }
}

TEST_CASE("near-degenerate wedge vectors are rejected") {
    WedgeSplit ws = wedge_split(1, 2);
    Vec raw(static_cast<std::size_t>(ws.dim()), 0.0);
    raw[static_cast<std::size_t>(ws.w_index[0])] = 1.0; // all mass on the invariant block
    CHECK_THROWS_AS(split_and_gauge(raw, ws), degenerate_wedge);
}
