#pragma once

#include <cmath>
#include <vector>

#include "affwalk/group.hpp"
#include "affwalk/linalg.hpp"

namespace affwalk {

// ---------------------------------------------------------------------------
// Affine subspaces of R^d in canonical form: the base point is the foot of
// the perpendicular from the origin and the frame is orthonormal. Two values
// represent the same subspace iff the bases agree and the frames span the
// same k-plane.
// ---------------------------------------------------------------------------

struct AffineSubspace {
    int k = 0;    // intrinsic dimension, 0 <= k < d
    Vec base;     // d entries, orthogonal to the frame
    Matrix frame; // d x k, orthonormal columns (k == 0: d x 0)

    int ambient_dim() const { return static_cast<int>(base.size()); }
};

/// Canonical form from an arbitrary point on the subspace and a spanning
/// set of directions.
inline AffineSubspace canonical_subspace(const Vec& point, const Matrix& directions) {
    AffineSubspace x;
    x.k = directions.cols();
    const int d = static_cast<int>(point.size());
    if (x.k == 0) {
        x.base = point;
        x.frame = Matrix(d, 0);
        return x;
    }
    x.frame = qr_step(directions).q;
    x.base = point;
    // remove the in-subspace component of the point (twice, for orthogonality
    // at the 1e-10 tolerance the representation promises)
    for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < x.k; ++j) {
            double proj = 0;
            for (int i = 0; i < d; ++i) proj += x.frame(i, j) * x.base[static_cast<std::size_t>(i)];
            for (int i = 0; i < d; ++i) x.base[static_cast<std::size_t>(i)] -= proj * x.frame(i, j);
        }
    return x;
}

inline AffineSubspace canonicalize(const AffineSubspace& x) { return canonical_subspace(x.base, x.frame); }

/// Euclidean distance from the origin to the subspace.
inline double dist_origin(const AffineSubspace& x) { return norm2(x.base); }

/// Image subspace under an affine map, re-canonicalized.
inline AffineSubspace act(const AffineMap& g, const AffineSubspace& x) {
    Vec p = g.apply(x.base);
    Matrix dirs = g.linear * x.frame;
    return canonical_subspace(p, dirs);
}

/// True iff both canonical values describe the same subspace to tolerance.
inline bool same_subspace(const AffineSubspace& a, const AffineSubspace& b, double tol = 1e-8) {
    if (a.k != b.k || a.base.size() != b.base.size()) return false;
    for (std::size_t i = 0; i < a.base.size(); ++i)
        if (std::abs(a.base[i] - b.base[i]) > tol) return false;
    // frames span the same k-plane iff projecting one onto the other loses nothing
    for (int j = 0; j < a.k; ++j) {
        Vec va = a.frame.col(j);
        Vec resid = va;
        for (int i = 0; i < b.k; ++i) {
            Vec vb = b.frame.col(i);
            double c = dot(va, vb);
            for (std::size_t r = 0; r < resid.size(); ++r) resid[r] -= c * vb[r];
        }
        if (norm2(resid) > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Wedge coordinates: the ambient space for k-dim affine subspaces of R^d is
// the (k+1)-fold wedge of R^{d+1} on the lexicographic basis. Basis wedges
// not involving the last axis span the invariant block W; those involving it
// span the chosen complement.
// ---------------------------------------------------------------------------

struct WedgeSplit {
    int k = 0, d = 0;
    std::vector<std::vector<int>> subsets; // lex (k+1)-subsets of {0..d}
    std::vector<int> w_index;              // positions of subsets without axis d
    std::vector<int> s_index;              // positions of subsets containing axis d

    int dim() const { return static_cast<int>(subsets.size()); }
};

inline WedgeSplit wedge_split(int k, int d) {
    WedgeSplit ws;
    ws.k = k;
    ws.d = d;
    ws.subsets = lex_subsets(d + 1, k + 1);
    for (int i = 0; i < static_cast<int>(ws.subsets.size()); ++i) {
        if (ws.subsets[static_cast<std::size_t>(i)].back() == d)
            ws.s_index.push_back(i);
        else
            ws.w_index.push_back(i);
    }
    return ws;
}

/// Homogeneous wedge coordinates split into the invariant block and its
/// complement, gauged so the complement part has unit norm. Defined up to a
/// simultaneous sign flip.
struct PluckerPoint {
    int k = 0, d = 0;
    Vec w;      // coordinates on the invariant block
    Vec wprime; // coordinates on the complement, unit norm

    /// Full coordinate vector in the lexicographic wedge basis.
    Vec full_vector() const {
        WedgeSplit ws = wedge_split(k, d);
        Vec v(static_cast<std::size_t>(ws.dim()), 0.0);
        for (std::size_t i = 0; i < ws.w_index.size(); ++i) v[static_cast<std::size_t>(ws.w_index[i])] = w[i];
        for (std::size_t i = 0; i < ws.s_index.size(); ++i) v[static_cast<std::size_t>(ws.s_index[i])] = wprime[i];
        return v;
    }
};

/// Splits and gauges a raw wedge vector. Throws degenerate_wedge when the
/// complement part underflows; points of the state space never do.
inline PluckerPoint split_and_gauge(const Vec& raw, const WedgeSplit& ws) {
    PluckerPoint p;
    p.k = ws.k;
    p.d = ws.d;
    p.w.resize(ws.w_index.size());
    p.wprime.resize(ws.s_index.size());
    for (std::size_t i = 0; i < ws.w_index.size(); ++i) p.w[i] = raw[static_cast<std::size_t>(ws.w_index[i])];
    for (std::size_t i = 0; i < ws.s_index.size(); ++i) p.wprime[i] = raw[static_cast<std::size_t>(ws.s_index[i])];
    double nw = norm2(p.wprime);
    if (nw < 1e-250) throw degenerate_wedge("plucker: vanishing complement block");
    for (double& v : p.w) v /= nw;
    for (double& v : p.wprime) v /= nw;
    return p;
}

/// Wedge of the lifted frame ((base,1), (v_1,0), ..., (v_k,0)) expanded on
/// the lexicographic basis, then split and gauged.
inline PluckerPoint plucker_embed(const AffineSubspace& x) {
    const int d = x.ambient_dim(), k = x.k;
    Matrix lift(d + 1, k + 1);
    for (int i = 0; i < d; ++i) lift(i, 0) = x.base[static_cast<std::size_t>(i)];
    lift(d, 0) = 1.0;
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < d; ++i) lift(i, j + 1) = x.frame(i, j);

    WedgeSplit ws = wedge_split(k, d);
    Vec raw(static_cast<std::size_t>(ws.dim()));
    Matrix minor(k + 1, k + 1);
    for (int b = 0; b < ws.dim(); ++b) {
        const auto& rows = ws.subsets[static_cast<std::size_t>(b)];
        for (int r = 0; r < k + 1; ++r)
            for (int c = 0; c < k + 1; ++c) minor(r, c) = lift(rows[static_cast<std::size_t>(r)], c);
        raw[static_cast<std::size_t>(b)] = determinant(minor);
    }
    return split_and_gauge(raw, ws);
}

/// Proper gauge function: norm of the invariant-block part to the power
/// delta. With the unit gauge this equals dist_origin(x)^delta on embedded
/// subspaces.
inline double u_delta(const PluckerPoint& p, double delta) {
    double n = norm2(p.w);
    return delta == 1.0 ? n : std::pow(n, delta);
}

/// Sine of the angle between two homogeneous coordinate vectors; the
/// standard projective metric, 0 iff the points coincide. Computed through
/// the chord length, which stays accurate down to zero distance.
inline double proj_distance_full(const Vec& a, const Vec& b) {
    double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dm = 0, dp = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i] / na, y = b[i] / nb;
        dm += (x - y) * (x - y);
        dp += (x + y) * (x + y);
    }
    double h = std::sqrt(std::min(dm, dp)); // 2 sin(theta/2), theta in [0, pi/2]
    double c2 = 1.0 - h * h / 4.0;
    return h * std::sqrt(c2 > 0 ? c2 : 0.0);
}

inline double proj_distance(const PluckerPoint& p, const PluckerPoint& q) {
    return proj_distance_full(p.full_vector(), q.full_vector());
}

} // namespace affwalk
