#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "affwalk/group.hpp"

// Built-in measures used by the test suites and shipped as scenario files.
//
// Density of the generated group is established by hand, not certified by
// the tool: each dense fixture mixes a split element with distinct singular
// values, an irrational-angle rotation and a translation, so the closure of
// the generated group contains a full rotation group and a split torus and
// acts irreducibly with no invariant affine subspace. Classifier outputs
// are conditional on that standing assumption.

namespace affwalk::fixtures {

inline Matrix rot2(double theta) {
    return Matrix(2, 2, {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)});
}

inline Matrix rot3_z(double theta) {
    Matrix m = Matrix::identity(3);
    m(0, 0) = std::cos(theta);
    m(0, 1) = -std::sin(theta);
    m(1, 0) = std::sin(theta);
    m(1, 1) = std::cos(theta);
    return m;
}

inline Matrix rot3_x(double theta) {
    Matrix m = Matrix::identity(3);
    m(1, 1) = std::cos(theta);
    m(1, 2) = -std::sin(theta);
    m(2, 1) = std::sin(theta);
    m(2, 2) = std::cos(theta);
    return m;
}

/// d=1, linear parts {2, 1/2} with equal weights: the top exponent is
/// exactly zero.
inline MeasureSpec d1_symmetric() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::Aff;
    mu.d = 1;
    mu.atoms = {{0.5, {Matrix(1, 1, {2.0}), {1.0}}}, {0.5, {Matrix(1, 1, {0.5}), {-1.0}}}};
    return mu;
}

/// d=1 strictly contracting point walk (top exponent < 0).
inline MeasureSpec d1_contract() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::Aff;
    mu.d = 1;
    mu.atoms = {{0.5, {Matrix(1, 1, {0.4}), {1.0}}}, {0.5, {Matrix(1, 1, {0.5}), {-1.0}}}};
    return mu;
}

/// d=1 strictly expanding point walk (top exponent > 0).
inline MeasureSpec d1_expand() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::Aff;
    mu.d = 1;
    mu.atoms = {{0.5, {Matrix(1, 1, {2.0}), {1.0}}}, {0.5, {Matrix(1, 1, {2.5}), {-1.0}}}};
    return mu;
}

/// Dense special affine fixture on the plane: hyperbolic element with a
/// translation, irrational rotation, pure translation.
inline MeasureSpec saff2() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::SAff;
    mu.d = 2;
    mu.atoms = {
        {0.45, {Matrix(2, 2, {4.0, 0.0, 0.0, 0.25}), {0.5, 0.0}}},
        {0.30, {rot2(1.0), {0.0, 0.0}}},
        {0.25, {Matrix::identity(2), {0.0, 0.5}}},
    };
    return mu;
}

/// Symmetric dense fixture on the full affine group of R^3: inverse-closed
/// atom pairs with equal weights. The middle exponent is exactly zero.
inline MeasureSpec aff3_symmetric() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::Aff;
    mu.d = 3;
    AffineMap a{Matrix(3, 3, {3, 0, 0, 0, 1, 0, 0, 0, 1.0 / 3.0}), {1.0, 0.0, 0.0}};
    AffineMap rz{rot3_z(1.0), {0.0, 0.0, 0.0}};
    AffineMap rx{rot3_x(1.0), {0.0, 0.5, 0.0}};
    AffineMap sc{2.0 * Matrix::identity(3), {0.0, 0.0, 0.0}};
    mu.atoms = {
        {0.15, a},  {0.15, a.inverted()},  {0.15, rz}, {0.15, rz.inverted()},
        {0.10, rx}, {0.10, rx.inverted()}, {0.10, sc}, {0.10, sc.inverted()},
    };
    return mu;
}

/// Commuting diagonal ensemble with independent signed entries; the
/// spectrum equals the sorted per-entry expectations of log|entry|, exactly
/// computable by enumeration.
inline MeasureSpec commuting_diag() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::Aff;
    mu.d = 3;
    const double e1[2] = {4.0, -0.5};
    const double e2[2] = {-2.0, 0.125};
    const double e3[2] = {-0.25, -0.5};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                mu.atoms.push_back({0.125, {Matrix::diagonal({e1[i], e2[j], e3[l]}), {0.0, 0.0, 0.0}}});
    return mu;
}

/// Enumerated expectation oracle for commuting_diag: sorted means of
/// log|entry| per diagonal position.
inline Vec commuting_diag_oracle() {
    Vec e = {0.5 * (std::log(4.0) + std::log(0.5)), 0.5 * (std::log(2.0) + std::log(0.125)),
             0.5 * (std::log(0.25) + std::log(0.5))};
    std::sort(e.begin(), e.end(), std::greater<>());
    return e;
}

/// Symmetric dense fixture with unimodular linear parts on the plane,
/// translations zero.
inline MeasureSpec sl2_symmetric() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::SAff;
    mu.d = 2;
    Vec z = {0.0, 0.0};
    mu.atoms = {
        {0.25, {Matrix(2, 2, {2, 0, 0, 0.5}), z}},
        {0.25, {Matrix(2, 2, {0.5, 0, 0, 2}), z}},
        {0.25, {rot2(1.0), z}},
        {0.25, {rot2(-1.0), z}},
    };
    return mu;
}

/// Conformal linear parts with balanced log-scales: both wedge blocks are
/// scaled isometries, so the block-ratio statistic is an additive
/// mean-zero random walk.
inline MeasureSpec conformal2_balanced() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::Aff;
    mu.d = 2;
    AffineMap g1{2.0 * rot2(0.9), {1.0, 0.0}};
    AffineMap g2{2.0 * rot2(-1.3), {0.0, 1.0}};
    mu.atoms = {{0.25, g1}, {0.25, g1.inverted()}, {0.25, g2}, {0.25, g2.inverted()}};
    return mu;
}

/// Single rotation atom: an isometry group, outside every density
/// hypothesis; backward orbits never couple.
inline MeasureSpec rotation2() {
    MeasureSpec mu;
    mu.group_kind = GroupKind::SAff;
    mu.d = 2;
    mu.atoms = {{1.0, {rot2(1.0), {0.0, 0.0}}}};
    return mu;
}

} // namespace affwalk::fixtures
