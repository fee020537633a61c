#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "affwalk/group.hpp"
#include "affwalk/linalg.hpp"

namespace affwalk {

// ---------------------------------------------------------------------------
// Lyapunov spectrum via per-step QR re-orthonormalization, replica-averaged.
// Standard errors come from inter-replica dispersion; replicas are exactly
// independent by seed derivation.
// ---------------------------------------------------------------------------

struct LyapunovSpectrum {
    Vec lambda;         // non-increasing estimates
    Vec se;             // per-exponent standard error
    Vec partial_sum;    // lambda_1 + ... + lambda_p
    Vec partial_sum_se; // standard error of each partial sum
    long n_steps = 0;
    int replicas = 0;

    int dim() const { return static_cast<int>(lambda.size()); }
};

namespace detail {

inline void mean_and_se(const std::vector<Vec>& rows, Vec& mean, Vec& se) {
    const std::size_t r = rows.size(), d = rows[0].size();
    mean.assign(d, 0.0);
    se.assign(d, 0.0);
    for (const Vec& v : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += v[j];
    for (double& m : mean) m /= static_cast<double>(r);
    if (r < 2) return;
    for (const Vec& v : rows)
        for (std::size_t j = 0; j < d; ++j) {
            double c = v[j] - mean[j];
            se[j] += c * c;
        }
    for (double& s : se) s = std::sqrt(s / static_cast<double>(r - 1) / static_cast<double>(r));
}

} // namespace detail

inline LyapunovSpectrum lyapunov_spectrum(const MeasureSpec& mu, long n_steps, int replicas, std::uint64_t seed,
                                          unsigned workers = 1) {
    const int d = mu.d;
    std::vector<Vec> lam(static_cast<std::size_t>(replicas));
    std::vector<Vec> partial(static_cast<std::size_t>(replicas));
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        WordSampler s(derive_seed(seed, r));
        Matrix q = Matrix::identity(d);
        Vec acc(static_cast<std::size_t>(d), 0.0);
        for (long n = 0; n < n_steps; ++n) {
            const Matrix& a = mu.atoms[s.next_atom(mu)].map.linear;
            QrStep qr = qr_step(a * q);
            q = std::move(qr.q);
            for (int j = 0; j < d; ++j) acc[static_cast<std::size_t>(j)] += qr.log_diag[static_cast<std::size_t>(j)];
        }
        for (double& v : acc) v /= static_cast<double>(n_steps);
        std::sort(acc.begin(), acc.end(), std::greater<>());
        Vec ps(acc.size());
        double run = 0;
        for (std::size_t j = 0; j < acc.size(); ++j) ps[j] = (run += acc[j]);
        lam[r] = std::move(acc);
        partial[r] = std::move(ps);
    });
    LyapunovSpectrum out;
    out.n_steps = n_steps;
    out.replicas = replicas;
    detail::mean_and_se(lam, out.lambda, out.se);
    detail::mean_and_se(partial, out.partial_sum, out.partial_sum_se);
    return out;
}

// ---------------------------------------------------------------------------
// Cross-check of the partial sums: the same quantities through the norm
// growth of the induced action on p-fold wedges. Independent estimator
// route, used to validate the QR route.
// ---------------------------------------------------------------------------

struct GrowthEstimate {
    double value = 0;
    double se = 0;
    long n_steps = 0;
    int replicas = 0;
};

namespace detail {

inline double scalar_se(const Vec& xs, double mean) {
    if (xs.size() < 2) return 0;
    double s = 0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

/// (1/N) log ||M_N ... M_1|| for one word, with per-step Frobenius rescaling
/// and an exact operator-norm correction at the end.
inline double norm_growth_rate(const std::vector<Matrix>& atoms, const MeasureSpec& mu, long n_steps, WordSampler& s) {
    Matrix p = Matrix::identity(atoms[0].rows());
    double acc = 0;
    for (long n = 0; n < n_steps; ++n) {
        p = atoms[s.next_atom(mu)] * p;
        double f = p.frobenius();
        acc += std::log(f);
        p *= 1.0 / f;
    }
    return (acc + std::log(operator_norm(p))) / static_cast<double>(n_steps);
}

} // namespace detail

inline GrowthEstimate spectrum_crosscheck(const MeasureSpec& mu, int p, long n_steps, int replicas, std::uint64_t seed,
                                          unsigned workers = 1) {
    if (mu.d > 6) throw bad_degree("spectrum_crosscheck: dimension guard d <= 6");
    if (p < 1 || p > mu.d) throw bad_degree("spectrum_crosscheck: degree out of range");
    std::vector<Matrix> wedge;
    wedge.reserve(mu.atoms.size());
    for (const Atom& a : mu.atoms) wedge.push_back(exterior_power(a.map.linear, p));
    Vec est(static_cast<std::size_t>(replicas));
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        WordSampler s(derive_seed(seed, r));
        est[r] = detail::norm_growth_rate(wedge, mu, n_steps, s);
    });
    GrowthEstimate out;
    out.n_steps = n_steps;
    out.replicas = replicas;
    for (double v : est) out.value += v;
    out.value /= static_cast<double>(replicas);
    out.se = detail::scalar_se(est, out.value);
    return out;
}

// ---------------------------------------------------------------------------
// Top exponents of the two diagonal blocks of the wedge action of the
// affine embedding. Per replica, both blocks ride the same word, so the
// difference estimate carries the natural paired standard error.
// ---------------------------------------------------------------------------

struct BlockExponents {
    double lambda_w = 0, se_w = 0; // invariant block
    double lambda_s = 0, se_s = 0; // complement block
    double diff = 0, se_diff = 0;  // lambda_w - lambda_s
    long n_steps = 0;
    int replicas = 0;
};

/// Induced action on p-fold wedges, extended to p = 0 (the scalar 1).
inline Matrix wedge_block(const Matrix& a, int p) {
    if (p == 0) return Matrix::identity(1);
    return exterior_power(a, p);
}

inline BlockExponents block_exponents(const MeasureSpec& mu, int k, long n_steps, int replicas, std::uint64_t seed,
                                      unsigned workers = 1) {
    if (k < 0 || k >= mu.d) throw bad_degree("block_exponents: k out of range");
    std::vector<Matrix> wa, wd;
    for (const Atom& a : mu.atoms) {
        wa.push_back(wedge_block(a.map.linear, k + 1));
        wd.push_back(wedge_block(a.map.linear, k));
    }
    Vec ew(static_cast<std::size_t>(replicas)), es(static_cast<std::size_t>(replicas)),
        ediff(static_cast<std::size_t>(replicas));
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        WordSampler s1(derive_seed(seed, r));
        WordSampler s2(derive_seed(seed, r)); // same word for both blocks
        ew[r] = detail::norm_growth_rate(wa, mu, n_steps, s1);
        es[r] = detail::norm_growth_rate(wd, mu, n_steps, s2);
        ediff[r] = ew[r] - es[r];
    });
    BlockExponents out;
    out.n_steps = n_steps;
    out.replicas = replicas;
    for (int r = 0; r < replicas; ++r) {
        out.lambda_w += ew[static_cast<std::size_t>(r)];
        out.lambda_s += es[static_cast<std::size_t>(r)];
        out.diff += ediff[static_cast<std::size_t>(r)];
    }
    out.lambda_w /= replicas;
    out.lambda_s /= replicas;
    out.diff /= replicas;
    out.se_w = detail::scalar_se(ew, out.lambda_w);
    out.se_s = detail::scalar_se(es, out.lambda_s);
    out.se_diff = detail::scalar_se(ediff, out.diff);
    return out;
}

// ---------------------------------------------------------------------------
// Opposition involution: negate and reverse. For products of GL blocks this
// is exactly the Cartan vector of the inverse.
// ---------------------------------------------------------------------------

inline CartanVector opposition_involution(const CartanVector& v) {
    CartanVector out;
    out.kappa.assign(v.kappa.rbegin(), v.kappa.rend());
    for (double& x : out.kappa) x = -x;
    return out;
}

// ---------------------------------------------------------------------------
// Cartan limit laws: growth vector (law of large numbers scale), covariance
// 2-tensor (CLT scale) and iterated-logarithm cloud.
//
// kappa of the n-letter product is accumulated with the per-step QR
// surrogate (sorted log R-diagonals); under a simple spectrum its deviation
// from the exact Cartan vector stays bounded, which vanishes at every
// normalization used here. Words are built letters-appended-on-the-right;
// the accumulation runs on transposes, which share singular values.
// ---------------------------------------------------------------------------

struct LimitLawReport {
    Vec sigma;    // kappa / n limit estimate
    Vec sigma_se; // per-coordinate standard error
    Matrix phi;   // covariance 2-tensor estimate (symmetric PSD)
    std::vector<Vec> lil_points;
    double containment_ratio = -1; // inside the 1.5-dilated phi unit ball
    bool exited_half_ball = false; // some point left the 0.5-dilated ball
    long n_steps = 0;
    int replicas = 0;
};

namespace detail {

/// QR accumulator for kappa(b_1 ... b_n): left-multiplies transposes.
class KappaAccumulator {
  public:
    explicit KappaAccumulator(int d) : q_(Matrix::identity(d)), acc_(static_cast<std::size_t>(d), 0.0) {}

    void push(const Matrix& letter) {
        QrStep qr = qr_step(letter.transposed() * q_);
        q_ = std::move(qr.q);
        for (std::size_t j = 0; j < acc_.size(); ++j) acc_[j] += qr.log_diag[j];
    }

    Vec kappa() const {
        Vec k = acc_;
        std::sort(k.begin(), k.end(), std::greater<>());
        return k;
    }

  private:
    Matrix q_;
    Vec acc_;
};

} // namespace detail

inline LimitLawReport sigma_and_phi(const MeasureSpec& mu, long n_steps, int replicas, std::uint64_t seed,
                                    unsigned workers = 1) {
    const int d = mu.d;
    std::vector<Vec> kap(static_cast<std::size_t>(replicas));
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        WordSampler s(derive_seed(seed, r));
        detail::KappaAccumulator acc(d);
        for (long n = 0; n < n_steps; ++n) acc.push(mu.atoms[s.next_atom(mu)].map.linear);
        kap[r] = acc.kappa();
    });
    LimitLawReport out;
    out.n_steps = n_steps;
    out.replicas = replicas;
    std::vector<Vec> rates(kap.size());
    for (std::size_t r = 0; r < kap.size(); ++r) {
        rates[r] = kap[r];
        for (double& v : rates[r]) v /= static_cast<double>(n_steps);
    }
    detail::mean_and_se(rates, out.sigma, out.sigma_se);
    out.phi = Matrix(d, d);
    if (replicas > 1) {
        double root_n = std::sqrt(static_cast<double>(n_steps));
        for (const Vec& k : kap) {
            Vec y(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j)
                y[static_cast<std::size_t>(j)] =
                    (k[static_cast<std::size_t>(j)] - static_cast<double>(n_steps) * out.sigma[static_cast<std::size_t>(j)]) /
                    root_n;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    out.phi(i, j) += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
        }
        out.phi *= 1.0 / static_cast<double>(replicas - 1);
    }
    return out;
}

namespace detail {

/// Mahalanobis norm under phi, with near-null directions ridge-regularized
/// so degenerate covariances (pinned coordinate sums) stay finite.
inline double phi_mahalanobis(const Matrix& phi, const Vec& x) {
    if (norm2(x) <= 1e-9) return 0.0;
    SymEigen eig = sym_eigen(phi);
    double lmax = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
    if (lmax <= 0) return std::numeric_limits<double>::infinity();
    double m2 = 0;
    const int n = phi.rows();
    for (int i = 0; i < n; ++i) {
        double c = 0;
        for (int r = 0; r < n; ++r) c += eig.vectors(r, i) * x[static_cast<std::size_t>(r)];
        double lam = std::max(eig.values[static_cast<std::size_t>(i)], 1e-9 * lmax);
        m2 += c * c / lam;
    }
    return std::sqrt(m2);
}

} // namespace detail

/// Normalized excursions of kappa along single words, evaluated on a grid,
/// tested against the covariance unit ball.
inline LimitLawReport lil_diagnostic(const MeasureSpec& mu, const std::vector<long>& n_grid, int words,
                                     std::uint64_t seed, unsigned workers = 1) {
    const int d = mu.d;
    const long n_max = n_grid.empty() ? 0 : n_grid.back();
    LimitLawReport base = sigma_and_phi(mu, std::min<long>(n_max, 10000), 64, derive_seed(seed, 0x516), workers);

    std::vector<std::vector<Vec>> pts(static_cast<std::size_t>(words));
    parallel_for(static_cast<std::size_t>(words), workers, [&](std::size_t w) {
        WordSampler s(derive_seed(seed, 0x717 + w));
        detail::KappaAccumulator acc(d);
        long n = 0;
        std::size_t gi = 0;
        std::vector<Vec> mine;
        while (gi < n_grid.size()) {
            acc.push(mu.atoms[s.next_atom(mu)].map.linear);
            ++n;
            if (n == n_grid[gi]) {
                Vec k = acc.kappa();
                double denom = std::sqrt(2.0 * n * std::log(std::log(static_cast<double>(n))));
                Vec p(static_cast<std::size_t>(d));
                for (int j = 0; j < d; ++j)
                    p[static_cast<std::size_t>(j)] =
                        (k[static_cast<std::size_t>(j)] - n * base.sigma[static_cast<std::size_t>(j)]) / denom;
                mine.push_back(std::move(p));
                ++gi;
            }
        }
        pts[w] = std::move(mine);
    });

    LimitLawReport out = base;
    long inside = 0, total = 0;
    for (auto& wp : pts)
        for (auto& p : wp) {
            double m = detail::phi_mahalanobis(out.phi, p);
            if (m <= 1.5) ++inside;
            if (m > 0.5) out.exited_half_ball = true;
            ++total;
            out.lil_points.push_back(p);
        }
    out.containment_ratio = total ? static_cast<double>(inside) / static_cast<double>(total) : -1;
    return out;
}

} // namespace affwalk
