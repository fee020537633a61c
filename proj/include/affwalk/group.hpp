#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "affwalk/linalg.hpp"

namespace affwalk {

// ---------------------------------------------------------------------------
// Affine maps x -> A x + u
// ---------------------------------------------------------------------------

struct AffineMap {
    Matrix linear;   // d x d, invertible
    Vec translation; // d

    int dim() const { return linear.rows(); }

    Vec apply(const Vec& x) const {
        Vec y = linear.apply(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += translation[i];
        return y;
    }

    AffineMap compose(const AffineMap& rhs) const {
        // (A,u) o (B,v) = (AB, Av + u)
        AffineMap out;
        out.linear = linear * rhs.linear;
        out.translation = linear.apply(rhs.translation);
        for (std::size_t i = 0; i < out.translation.size(); ++i) out.translation[i] += translation[i];
        return out;
    }

    AffineMap inverted() const {
        AffineMap out;
        out.linear = inverse(linear);
        out.translation = out.linear.apply(translation);
        for (double& c : out.translation) c = -c;
        return out;
    }

    static AffineMap identity(int d) { return AffineMap{Matrix::identity(d), Vec(static_cast<std::size_t>(d), 0.0)}; }
};

/// Embeds (A,u) as the (d+1)x(d+1) matrix fixing the hyperplane x_{d+1}=1:
/// top-left block A, last column (u,1), bottom row (0,...,0,1).
inline Matrix embed_gl(const AffineMap& g) {
    const int d = g.dim();
    Matrix m(d + 1, d + 1);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = g.linear(i, j);
        m(i, d) = g.translation[static_cast<std::size_t>(i)];
    }
    m(d, d) = 1.0;
    return m;
}

// ---------------------------------------------------------------------------
// Finite-support measures on the affine / special affine group
// ---------------------------------------------------------------------------

enum class GroupKind { Aff, SAff };

struct Atom {
    double weight;
    AffineMap map;
};

struct MeasureSpec {
    GroupKind group_kind = GroupKind::Aff;
    int d = 0;
    std::vector<Atom> atoms;

    /// Throws validation_error naming the violated invariant.
    void validate() const {
        if (d < 1) throw validation_error("d");
        if (atoms.empty()) throw validation_error("atoms");
        double sum = 0;
        for (const Atom& a : atoms) {
            if (!(a.weight > 0)) throw validation_error("weights");
            sum += a.weight;
            if (a.map.linear.rows() != d || a.map.linear.cols() != d ||
                a.map.translation.size() != static_cast<std::size_t>(d))
                throw validation_error("atom dimension");
            double det = determinant(a.map.linear);
            if (det == 0.0) throw validation_error("atom invertibility");
            if (group_kind == GroupKind::SAff && std::abs(det - 1.0) > 1e-9)
                throw validation_error("SAff determinant");
        }
        if (std::abs(sum - 1.0) > 1e-12) throw validation_error("weights");
    }

    /// Measure on the linear parts only (used by the spectrum estimators).
    std::vector<std::pair<double, Matrix>> linear_atoms() const {
        std::vector<std::pair<double, Matrix>> out;
        out.reserve(atoms.size());
        for (const Atom& a : atoms) out.emplace_back(a.weight, a.map.linear);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Word sampler: one deterministic stream of atom indices
// ---------------------------------------------------------------------------

class WordSampler {
  public:
    explicit WordSampler(std::uint64_t seed) : rng_(seed) {}

    /// Draws an atom index according to the weights.
    std::size_t next_atom(const MeasureSpec& mu) {
        double u = rng_.next01();
        double acc = 0;
        for (std::size_t i = 0; i + 1 < mu.atoms.size(); ++i) {
            acc += mu.atoms[i].weight;
            if (u < acc) return i;
        }
        return mu.atoms.size() - 1;
    }

    Rng& rng() { return rng_; }

  private:
    Rng rng_;
};

inline const AffineMap& sample(const MeasureSpec& mu, WordSampler& sampler) {
    return mu.atoms[sampler.next_atom(mu)].map;
}

// ---------------------------------------------------------------------------
// Symmetry check: mu equals its pushforward under g -> g^{-1}
// ---------------------------------------------------------------------------

inline bool is_symmetric(const MeasureSpec& mu) {
    const std::size_t n = mu.atoms.size();
    std::vector<bool> used(n, false);
    auto matches = [&](const AffineMap& inv, const Atom& cand, double weight) {
        if (std::abs(cand.weight - weight) > 1e-12) return false;
        if (max_abs_diff(inv.linear, cand.map.linear) > 1e-9) return false;
        for (std::size_t i = 0; i < inv.translation.size(); ++i)
            if (std::abs(inv.translation[i] - cand.map.translation[i]) > 1e-9) return false;
        return true;
    };
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        AffineMap inv = mu.atoms[i].map.inverted();
        if (matches(inv, mu.atoms[i], mu.atoms[i].weight)) {
            used[i] = true; // involutive atom pairs with itself
            continue;
        }
        bool found = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j] || j == i) continue;
            if (matches(inv, mu.atoms[j], mu.atoms[i].weight)) {
                used[i] = used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Proximality certificate
//
// Searches random words for a product whose induced action on p-fold wedges
// of the linear part has a simple dominant eigenvalue (spectral gap >= 1.05
// in modulus). Such an element makes the generated semigroup proximal on
// that representation; failure to find one proves nothing.
// ---------------------------------------------------------------------------

struct ProximalityCertificate {
    std::vector<std::size_t> word; // atom indices, applied left to right
    double gap_ratio = 0;
};

namespace detail {

/// Top-two eigenvalue moduli via orthogonal iteration on a 2-column frame.
/// Returns nullopt when the iteration does not settle (e.g. rotations).
inline std::optional<std::pair<double, double>> top_two_moduli(const Matrix& m, Rng& rng) {
    const int n = m.rows();
    if (n == 1) return std::make_pair(std::abs(m(0, 0)), 0.0);
    Matrix z(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) z(i, j) = rng.uniform(-1.0, 1.0);
    double prev1 = 0, prev2 = 0;
    int stable = 0;
    for (int iter = 0; iter < 300; ++iter) {
        Matrix w = m * z;
        QrStep qr;
        try {
            qr = qr_step(w);
        } catch (const rank_deficient&) {
            return std::nullopt;
        }
        z = qr.q;
        double r1 = std::exp(qr.log_diag[0]);
        double r2 = std::exp(qr.log_diag[1]);
        if (iter > 4 && std::abs(r1 - prev1) < 1e-10 * (1 + r1) && std::abs(r2 - prev2) < 1e-10 * (1 + r2)) {
            if (++stable >= 3) {
                // Rayleigh 2x2 block gives the two leading eigenvalues.
                Matrix mz = m * z;
                double b00 = dot(z.col(0), mz.col(0)), b01 = dot(z.col(0), mz.col(1));
                double b10 = dot(z.col(1), mz.col(0)), b11 = dot(z.col(1), mz.col(1));
                double tr = b00 + b11, det = b00 * b11 - b01 * b10;
                double disc = tr * tr - 4 * det;
                if (disc < 0) return std::make_pair(std::sqrt(std::abs(det)), std::sqrt(std::abs(det)));
                double sq = std::sqrt(disc);
                double l1 = (tr + sq) / 2, l2 = (tr - sq) / 2;
                double a1 = std::abs(l1), a2 = std::abs(l2);
                if (a1 < a2) std::swap(a1, a2);
                return std::make_pair(a1, a2);
            }
        } else {
            stable = 0;
        }
        prev1 = r1;
        prev2 = r2;
    }
    return std::nullopt;
}

} // namespace detail

inline std::optional<ProximalityCertificate> proximality_certificate(const MeasureSpec& mu, int p, int trials,
                                                                     int max_length, std::uint64_t seed = 1) {
    if (p < 1 || p > mu.d) throw bad_degree("proximality_certificate: degree out of range");
    Rng rng(derive_seed(seed, 0xA11CE));
    std::vector<Matrix> wedge_atoms;
    wedge_atoms.reserve(mu.atoms.size());
    for (const Atom& a : mu.atoms) wedge_atoms.push_back(exterior_power(a.map.linear, p));

    WordSampler sampler(derive_seed(seed, 0xB0B));
    for (int t = 0; t < trials; ++t) {
        int len = 1 + t % max_length;
        std::vector<std::size_t> word(static_cast<std::size_t>(len));
        Matrix prod = Matrix::identity(wedge_atoms[0].rows());
        for (int i = 0; i < len; ++i) {
            std::size_t a = sampler.next_atom(mu);
            word[static_cast<std::size_t>(i)] = a;
            prod = prod * wedge_atoms[a];
        }
        double scale = prod.max_abs();
        if (!(scale > 0) || !std::isfinite(scale)) continue;
        prod *= 1.0 / scale;
        auto moduli = detail::top_two_moduli(prod, rng);
        if (!moduli) continue;
        auto [a1, a2] = *moduli;
        if (a1 <= 0) continue;
        double ratio = a2 > 0 ? a1 / a2 : std::numeric_limits<double>::infinity();
        if (ratio >= 1.05) return ProximalityCertificate{std::move(word), ratio};
    }
    return std::nullopt;
}

} // namespace affwalk
