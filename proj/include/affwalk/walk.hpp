#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "affwalk/grassmann.hpp"
#include "affwalk/group.hpp"
#include "affwalk/limitlaws.hpp"

namespace affwalk {

/// Log-spaced integer grid 1..n_max (n_max always included).
inline std::vector<long> log_grid(long n_max, int points = 40) {
    std::vector<long> g;
    double lmax = std::log10(static_cast<double>(n_max));
    for (int i = 0; i < points; ++i) {
        long n = static_cast<long>(std::llround(std::pow(10.0, lmax * i / (points - 1))));
        n = std::max<long>(1, std::min(n, n_max));
        if (g.empty() || n > g.back()) g.push_back(n);
    }
    if (g.empty() || g.back() != n_max) g.push_back(n_max);
    return g;
}

// ---------------------------------------------------------------------------
// Forward walk
// ---------------------------------------------------------------------------

struct Trajectory {
    Vec dist;     // dist_origin(x_n), n = 1..N
    bool overflow = false;
};

inline constexpr double kDistCap = 1e300;

namespace detail {

// Walk state with a log-scale escape hatch. While the base magnitude stays
// moderate the affine step is exact. Past the threshold the magnitude excess
// moves into log_scale and the translation term (relatively ~1e-148 at that
// point) is dropped; a later contraction re-enters the exact regime.
struct WalkState {
    AffineSubspace x;
    double log_scale = 0;

    static constexpr double kRescale = 1e150;

    void step(const AffineMap& g) {
        if (log_scale == 0) {
            x = act(g, x);
        } else {
            AffineMap lin{g.linear, Vec(x.base.size(), 0.0)};
            x = act(lin, x);
        }
        double m = 0;
        for (double v : x.base) m = std::max(m, std::abs(v));
        if (m > kRescale) {
            log_scale += std::log(m / kRescale);
            for (double& v : x.base) v *= kRescale / m;
        } else if (log_scale > 0 && m > 0) {
            double back = std::min(log_scale, std::log(kRescale / m));
            double f = std::exp(back);
            for (double& v : x.base) v *= f;
            log_scale -= back;
        }
    }

    /// dist_origin of the true state, capped; sets the flag on overflow.
    double dist(bool& overflow) const {
        double nb = norm2(x.base);
        if (nb == 0) return 0;
        double ld = std::log(nb) + log_scale;
        if (ld > std::log(kDistCap)) {
            overflow = true;
            return kDistCap;
        }
        return std::exp(ld);
    }
};

} // namespace detail

inline Trajectory run_forward(const MeasureSpec& mu, const AffineSubspace& x0, long n_steps, WordSampler& sampler) {
    Trajectory t;
    t.dist.reserve(static_cast<std::size_t>(n_steps));
    detail::WalkState st{canonicalize(x0), 0};
    for (long n = 0; n < n_steps; ++n) {
        st.step(sample(mu, sampler));
        t.dist.push_back(st.dist(t.overflow));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Cesaro mass diagnostic for recurrence in law
// ---------------------------------------------------------------------------

struct RecurrenceReport {
    double radius = 0;
    long horizon = 0;
    int replicas = 0;
    std::vector<long> n_grid;
    Vec mass_curve;   // fraction of replicas inside the ball at each grid n
    Vec cesaro_curve; // running Cesaro mean of the per-step mass
    Vec cesaro_se;    // replica-dispersion standard error
    std::string verdict; // recurrent-like | transient-like | inconclusive
    double threshold_recurrent = 0.9;
    double threshold_transient = 0.1;
    bool overflow = false;
};

inline RecurrenceReport cesaro_mass(const MeasureSpec& mu, const AffineSubspace& x0, long n_steps, double radius,
                                    int replicas, std::uint64_t seed, unsigned workers = 1) {
    if (!(radius > 0)) throw validation_error("R");
    if (replicas < 100) throw validation_error("replicas >= 100 required");
    RecurrenceReport rep;
    rep.radius = radius;
    rep.horizon = n_steps;
    rep.replicas = replicas;
    rep.n_grid = log_grid(n_steps);
    const std::size_t g = rep.n_grid.size();

    std::vector<Vec> inside(static_cast<std::size_t>(replicas)); // instantaneous indicator at grid
    std::vector<Vec> cesaro(static_cast<std::size_t>(replicas)); // per-replica Cesaro at grid
    std::vector<char> oflow(static_cast<std::size_t>(replicas), 0);
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        WordSampler s(derive_seed(seed, r));
        detail::WalkState st{canonicalize(x0), 0};
        Vec ind(g, 0.0), ces(g, 0.0);
        long count_inside = 0;
        std::size_t gi = 0;
        for (long n = 1; n <= n_steps; ++n) {
            st.step(sample(mu, s));
            bool of = false;
            double dist = st.dist(of);
            if (of) oflow[r] = 1;
            if (dist <= radius) ++count_inside;
            if (gi < g && n == rep.n_grid[gi]) {
                ind[gi] = dist <= radius ? 1.0 : 0.0;
                ces[gi] = static_cast<double>(count_inside) / static_cast<double>(n);
                ++gi;
            }
        }
        inside[r] = std::move(ind);
        cesaro[r] = std::move(ces);
    });

    detail::mean_and_se(cesaro, rep.cesaro_curve, rep.cesaro_se);
    Vec dummy;
    detail::mean_and_se(inside, rep.mass_curve, dummy);
    for (char f : oflow) rep.overflow |= (f != 0);

    double terminal = rep.cesaro_curve.back();
    if (terminal >= rep.threshold_recurrent)
        rep.verdict = "recurrent-like";
    else if (terminal <= rep.threshold_transient)
        rep.verdict = "transient-like";
    else
        rep.verdict = "inconclusive";
    return rep;
}

// ---------------------------------------------------------------------------
// Backward coupling: distances between the images of two starts under the
// left-to-right products. Dirac limit shows as coupling of the two orbits.
// ---------------------------------------------------------------------------

struct CouplingReport {
    std::vector<long> n_grid;
    std::vector<Vec> dist_series; // per word, at grid points
    double coupled_fraction = 0;  // terminal distance <= couple_tol
    double couple_tol = 1e-6;
    long horizon = 0;
    int words = 0;
};

inline CouplingReport backward_coupling(const MeasureSpec& mu, const AffineSubspace& x0, const AffineSubspace& y0,
                                        long n_steps, int words, std::uint64_t seed, unsigned workers = 1) {
    CouplingReport rep;
    rep.horizon = n_steps;
    rep.words = words;
    rep.n_grid = log_grid(n_steps, 80);
    const int k = x0.k, d = x0.ambient_dim();
    if (y0.k != k || y0.ambient_dim() != d || d != mu.d)
        throw bad_degree("backward_coupling: mismatched start subspaces");
    WedgeSplit ws = wedge_split(k, d);
    std::vector<Matrix> wedge_atoms;
    for (const Atom& a : mu.atoms) wedge_atoms.push_back(exterior_power(embed_gl(a.map), k + 1));
    const Vec px = plucker_embed(x0).full_vector();
    const Vec py = plucker_embed(y0).full_vector();

    rep.dist_series.assign(static_cast<std::size_t>(words), Vec());
    std::vector<char> coupled(static_cast<std::size_t>(words), 0);
    parallel_for(static_cast<std::size_t>(words), workers, [&](std::size_t w) {
        WordSampler s(derive_seed(seed, w));
        Matrix prod = Matrix::identity(ws.dim());
        Vec series;
        series.reserve(rep.n_grid.size());
        std::size_t gi = 0;
        double terminal = proj_distance_full(px, py);
        for (long n = 1; n <= n_steps; ++n) {
            prod = prod * wedge_atoms[s.next_atom(mu)]; // letters appended on the right
            double m = prod.max_abs();
            if (m > 0) prod *= 1.0 / m;
            if (gi < rep.n_grid.size() && n == rep.n_grid[gi]) {
                double dist = proj_distance_full(prod.apply(px), prod.apply(py));
                series.push_back(dist);
                terminal = dist;
                ++gi;
            }
        }
        coupled[w] = terminal <= rep.couple_tol ? 1 : 0;
        rep.dist_series[w] = std::move(series);
    });
    long c = 0;
    for (char f : coupled) c += f;
    rep.coupled_fraction = words ? static_cast<double>(c) / words : 0;
    return rep;
}

// ---------------------------------------------------------------------------
// Block-ratio series T_n = log||a_n|| - log||d_n|| of the wedge action,
// in log space with per-step operator-norm rescaling of each block.
// ---------------------------------------------------------------------------

struct RatioSeries {
    std::vector<long> n_grid;
    std::vector<Vec> t_values; // per word, at grid points
    std::vector<Vec> run_sup;  // per word, running suprema over all n <= grid point
    double max_block_leak = 0; // largest relative magnitude seen below the diagonal
    long horizon = 0;
    int k = 0;
};

namespace detail {

struct WedgeBlocks {
    Matrix a, c, d; // [[a, c], [0, d]] in the (invariant, complement) order
};

inline WedgeBlocks extract_blocks(const Matrix& m, const WedgeSplit& ws) {
    WedgeBlocks b;
    const int nw = static_cast<int>(ws.w_index.size()), ns = static_cast<int>(ws.s_index.size());
    b.a = Matrix(nw, nw);
    b.c = Matrix(nw, ns);
    b.d = Matrix(ns, ns);
    for (int i = 0; i < nw; ++i) {
        for (int j = 0; j < nw; ++j) b.a(i, j) = m(ws.w_index[static_cast<std::size_t>(i)], ws.w_index[static_cast<std::size_t>(j)]);
        for (int j = 0; j < ns; ++j) b.c(i, j) = m(ws.w_index[static_cast<std::size_t>(i)], ws.s_index[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) b.d(i, j) = m(ws.s_index[static_cast<std::size_t>(i)], ws.s_index[static_cast<std::size_t>(j)]);
    return b;
}

inline double lower_left_leak(const Matrix& m, const WedgeSplit& ws) {
    double leak = 0;
    for (int i : ws.s_index)
        for (int j : ws.w_index) leak = std::max(leak, std::abs(m(i, j)));
    double scale = m.max_abs();
    return scale > 0 ? leak / scale : 0.0;
}

} // namespace detail

inline RatioSeries ratio_series(const MeasureSpec& mu, int k, long n_steps, int words, std::uint64_t seed,
                                unsigned workers = 1) {
    if (k < 0 || k >= mu.d) throw bad_degree("ratio_series: k out of range");
    RatioSeries rep;
    rep.horizon = n_steps;
    rep.k = k;
    rep.n_grid = log_grid(n_steps, 60);
    WedgeSplit ws = wedge_split(k, mu.d);
    std::vector<detail::WedgeBlocks> blocks;
    std::vector<Matrix> wedge_atoms;
    for (const Atom& a : mu.atoms) {
        Matrix m = exterior_power(embed_gl(a.map), k + 1);
        wedge_atoms.push_back(m);
        blocks.push_back(detail::extract_blocks(m, ws));
    }
    rep.t_values.assign(static_cast<std::size_t>(words), Vec());
    rep.run_sup.assign(static_cast<std::size_t>(words), Vec());
    Vec leaks(static_cast<std::size_t>(words), 0.0);

    parallel_for(static_cast<std::size_t>(words), workers, [&](std::size_t w) {
        WordSampler s(derive_seed(seed, w));
        const int nw = blocks[0].a.rows(), ns = blocks[0].d.rows();
        Matrix a = Matrix::identity(nw), d = Matrix::identity(ns);
        Matrix full = Matrix::identity(ws.dim());
        double log_a = 0, log_d = 0, sup = -std::numeric_limits<double>::infinity();
        Vec tv, rs;
        std::size_t gi = 0;
        for (long n = 1; n <= n_steps; ++n) {
            std::size_t atom = s.next_atom(mu);
            a = a * blocks[atom].a;
            d = d * blocks[atom].d;
            double na = operator_norm(a), nd = operator_norm(d);
            log_a += std::log(na);
            log_d += std::log(nd);
            a *= 1.0 / na;
            d *= 1.0 / nd;
            full = full * wedge_atoms[atom];
            double mf = full.max_abs();
            if (mf > 0) full *= 1.0 / mf;
            double leak = detail::lower_left_leak(full, ws);
            leaks[w] = std::max(leaks[w], leak);
            double t = log_a - log_d;
            sup = std::max(sup, t);
            if (gi < rep.n_grid.size() && n == rep.n_grid[gi]) {
                tv.push_back(t);
                rs.push_back(sup);
                ++gi;
            }
        }
        rep.t_values[w] = std::move(tv);
        rep.run_sup[w] = std::move(rs);
    });
    for (double l : leaks) rep.max_block_leak = std::max(rep.max_block_leak, l);
    if (rep.max_block_leak > 1e-8)
        throw block_structure_violated("ratio_series: invariant block leaked below the diagonal");
    return rep;
}

/// Additive statistic matching T_n on conformal-block words:
/// (1/r) log|det a| - (1/r') log|det d| of one letter.
inline double block_det_increment(const MeasureSpec& mu, int k, std::size_t atom_index) {
    WedgeSplit ws = wedge_split(k, mu.d);
    Matrix m = exterior_power(embed_gl(mu.atoms[atom_index].map), k + 1);
    detail::WedgeBlocks b = detail::extract_blocks(m, ws);
    double r = b.a.rows(), rp = b.d.rows();
    return std::log(std::abs(determinant(b.a))) / r - std::log(std::abs(determinant(b.d))) / rp;
}

// ---------------------------------------------------------------------------
// Drift verifier: estimates the contraction factor of the gauge function
// under the n0-step averaging operator, outside the recipe compact set.
// ---------------------------------------------------------------------------

struct DriftCell {
    double lo = 0, hi = 0; // gauge-magnitude range
    double ratio_mean = 0; // mean of u_delta(gx)/u_delta(x)
    double se = 0;
    long n_samples = 0;
};

struct DriftReport {
    double delta = 0;
    int n0 = 1;
    double c = 0;        // compact-set constant
    double k_radius = 0; // 1/c: gauge magnitude bounding the compact set
    double epsilon = 0;
    double kappa = 0;
    double m_hat = 0;
    double a_hat = std::numeric_limits<double>::infinity();
    double b_hat = 0;
    double lambda_w = 0, se_w = 0, lambda_s = 0, se_s = 0;
    std::vector<DriftCell> cells;
    bool recipe_ok = false;
    std::string note;
    long samples = 0;
};

namespace detail {

/// u_1 of a raw (ungauged) wedge vector: block-norm ratio.
inline double u1_of_raw(const Vec& v, const WedgeSplit& ws) {
    double nw = 0, nsq = 0;
    for (int i : ws.w_index) nw += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    for (int i : ws.s_index) nsq += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    if (nsq <= 0) throw degenerate_wedge("drift: image fell into the invariant block");
    return std::sqrt(nw / nsq);
}

/// Deterministic test state: orthonormal k-frame plus a base of exact
/// magnitude in the orthogonal complement.
inline AffineSubspace stratified_state(int k, int d, double magnitude, Rng& rng) {
    Matrix dirs(d, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < d; ++i) dirs(i, j) = rng.uniform(-1.0, 1.0);
    AffineSubspace x;
    x.k = k;
    x.frame = k > 0 ? qr_step(dirs).q : Matrix(d, 0);
    for (;;) {
        Vec b(static_cast<std::size_t>(d));
        for (double& v : b) v = rng.uniform(-1.0, 1.0);
        for (int j = 0; j < k; ++j) {
            double proj = 0;
            for (int i = 0; i < d; ++i) proj += x.frame(i, j) * b[static_cast<std::size_t>(i)];
            for (int i = 0; i < d; ++i) b[static_cast<std::size_t>(i)] -= proj * x.frame(i, j);
        }
        double nb = norm2(b);
        if (nb > 1e-3) {
            for (double& v : b) v *= magnitude / nb;
            x.base = std::move(b);
            return x;
        }
    }
}

} // namespace detail

inline DriftReport drift_verify(const MeasureSpec& mu, int k, std::optional<double> delta_override,
                                std::optional<int> n0_override, long samples, std::uint64_t seed,
                                unsigned workers = 1) {
    if (k < 0 || k >= mu.d) throw bad_degree("drift_verify: k out of range");
    DriftReport rep;
    rep.samples = samples;
    const int d = mu.d;
    WedgeSplit ws = wedge_split(k, d);
    std::vector<Matrix> wedge_atoms;
    std::vector<detail::WedgeBlocks> blocks;
    for (const Atom& a : mu.atoms) {
        Matrix m = exterior_power(embed_gl(a.map), k + 1);
        wedge_atoms.push_back(m);
        blocks.push_back(detail::extract_blocks(m, ws));
    }

    // Block exponents and the spectral gap driving every recipe constant.
    BlockExponents be = block_exponents(mu, k, 4000, 32, derive_seed(seed, 1), workers);
    rep.lambda_w = be.lambda_w;
    rep.se_w = be.se_w;
    rep.lambda_s = be.lambda_s;
    rep.se_s = be.se_s;
    double gap = be.lambda_s - be.lambda_w;
    if (!(gap > 0)) {
        rep.note = "no positive block gap; contraction recipe inapplicable";
        return rep;
    }
    rep.epsilon = gap / 16.0;

    // n0: first horizon at which direction-averaged block growth sits inside
    // the epsilon band around the block exponents, for a panel of directions.
    // Recipe constants come from fixed-budget internal probes, so enlarging
    // `samples` refines only the verification estimates, never the recipe.
    const long recipe_words = 2048;
    if (n0_override) {
        rep.n0 = *n0_override;
    } else {
        const int n_dirs = 6;
        long probe_words = recipe_words / 2;
        Rng dir_rng(derive_seed(seed, 2));
        auto band_ok = [&](int n) {
            for (int side = 0; side < 2; ++side) {
                const bool w_side = side == 0;
                const int dim = w_side ? blocks[0].a.rows() : blocks[0].d.rows();
                double target = w_side ? be.lambda_w : be.lambda_s;
                for (int t = 0; t < n_dirs; ++t) {
                    Vec v0(static_cast<std::size_t>(dim));
                    for (double& x : v0) x = dir_rng.uniform(-1.0, 1.0);
                    double n0v = norm2(v0);
                    for (double& x : v0) x /= n0v;
                    double mean = 0;
                    WordSampler s(derive_seed(seed, 0x900 + static_cast<std::uint64_t>(n) * 64 + static_cast<std::uint64_t>(t)));
                    for (long wd = 0; wd < probe_words; ++wd) {
                        Vec v = v0;
                        double acc = 0;
                        for (int i = 0; i < n; ++i) {
                            std::size_t a = s.next_atom(mu);
                            v = (w_side ? blocks[a].a : blocks[a].d).apply(v);
                            double nv = norm2(v);
                            acc += std::log(nv);
                            for (double& x : v) x /= nv;
                        }
                        mean += acc / n;
                    }
                    mean /= static_cast<double>(probe_words);
                    if (std::abs(mean - target) > rep.epsilon) return false;
                }
            }
            return true;
        };
        rep.n0 = 64;
        bool verified = false;
        for (int n : {1, 2, 4, 8, 16, 32, 64})
            if (band_ok(n)) {
                rep.n0 = n;
                verified = true;
                break;
            }
        if (!verified) rep.note = "direction bands not verified at horizon 64; using n0=64";
    }

    // c from the mean coupling-block magnitude over n0-step products.
    {
        WordSampler s(derive_seed(seed, 3));
        double mean = 0;
        for (long wd = 0; wd < recipe_words; ++wd) {
            Matrix p = Matrix::identity(ws.dim());
            for (int i = 0; i < rep.n0; ++i) p = p * wedge_atoms[s.next_atom(mu)];
            detail::WedgeBlocks b = detail::extract_blocks(p, ws);
            Vec sv = singular_values(b.a);
            mean += operator_norm(b.c) / sv.back();
        }
        mean /= static_cast<double>(recipe_words);
        double c_inv = 4.0 / (rep.n0 * gap) * mean;
        if (!(c_inv > 0) || !std::isfinite(c_inv)) c_inv = 1e-6; // no coupling block: compact set degenerates
        if (c_inv > 1e100) {
            c_inv = 1e100; // keeps squared gauge magnitudes representable
            rep.note = "compact-set radius clamped to 1e100";
        }
        rep.c = 1.0 / c_inv;
        rep.k_radius = c_inv;
    }

    // Stratified states outside the compact set: 20 log-spaced magnitude
    // cells, a few deterministic directions each, a common pool of words.
    const int n_cells = 20, n_dirs = 4;
    const double span_decades = 6.0;
    Rng state_rng(derive_seed(seed, 4));
    std::vector<std::vector<Vec>> cell_states(n_cells);
    rep.cells.assign(n_cells, DriftCell{});
    for (int cidx = 0; cidx < n_cells; ++cidx) {
        double flo = rep.k_radius * std::pow(10.0, span_decades * cidx / n_cells);
        double fhi = rep.k_radius * std::pow(10.0, span_decades * (cidx + 1) / n_cells);
        rep.cells[static_cast<std::size_t>(cidx)].lo = flo;
        rep.cells[static_cast<std::size_t>(cidx)].hi = fhi;
        double mag = std::sqrt(flo * fhi);
        for (int t = 0; t < n_dirs; ++t) {
            AffineSubspace x = detail::stratified_state(k, d, mag, state_rng);
            cell_states[static_cast<std::size_t>(cidx)].push_back(plucker_embed(x).full_vector());
        }
    }

    auto build_words = [&](std::uint64_t tag, long count) {
        std::vector<Matrix> prods(static_cast<std::size_t>(count));
        parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t wd) {
            WordSampler s(derive_seed(seed, tag + wd));
            Matrix p = Matrix::identity(ws.dim());
            for (int i = 0; i < rep.n0; ++i) p = p * wedge_atoms[s.next_atom(mu)];
            prods[wd] = std::move(p);
        });
        return prods;
    };
    auto gauge_log_ratio = [&](const Matrix& prod, const Vec& px, double u1x) {
        Vec img = prod.apply(px);
        double u1g;
        try {
            u1g = detail::u1_of_raw(img, ws);
        } catch (const degenerate_wedge&) {
            u1g = 0;
        }
        return u1g > 0 ? std::log(u1g) - std::log(u1x) : -std::numeric_limits<double>::infinity();
    };

    // delta from the quadratic majorant 1 - delta*kappa + delta^2*M. The
    // remainder bound comes from its own fixed-size probe pool, so the
    // derived constants never depend on the verification budget.
    rep.kappa = rep.n0 * gap / 2.0;
    {
        std::vector<Matrix> probe = build_words(0x200000, recipe_words / 4);
        const double log_floor = std::log(1e-12);
        double m_hat = 0;
        for (int cidx = 0; cidx < n_cells; ++cidx)
            for (int t = 0; t < n_dirs; ++t) {
                const Vec& px = cell_states[static_cast<std::size_t>(cidx)][static_cast<std::size_t>(t)];
                double u1x = detail::u1_of_raw(px, ws);
                for (const Matrix& p : probe) {
                    double l = std::max(gauge_log_ratio(p, px, u1x), log_floor);
                    double rem = l <= 0 ? l * l / 2.0 : std::expm1(l) - l;
                    m_hat = std::max(m_hat, rem);
                }
            }
        rep.m_hat = m_hat;
        rep.delta = delta_override ? *delta_override
                                   : std::clamp(m_hat > 0 ? rep.kappa / (2.0 * m_hat) : 1.0, 1e-8, 1.0);
    }

    // Log-ratios of the gauge under the shared verification words.
    long words = std::max<long>(64, samples / n_dirs);
    std::vector<std::vector<Vec>> logs(n_cells); // per cell, per state, per word
    for (auto& c : logs) c.assign(n_dirs, Vec());
    std::vector<Matrix> word_products = build_words(0x100000, words);
    for (int cidx = 0; cidx < n_cells; ++cidx)
        for (int t = 0; t < n_dirs; ++t) {
            const Vec& px = cell_states[static_cast<std::size_t>(cidx)][static_cast<std::size_t>(t)];
            double u1x = detail::u1_of_raw(px, ws);
            Vec& ls = logs[static_cast<std::size_t>(cidx)][static_cast<std::size_t>(t)];
            ls.reserve(static_cast<std::size_t>(words));
            for (long wd = 0; wd < words; ++wd)
                ls.push_back(gauge_log_ratio(word_products[static_cast<std::size_t>(wd)], px, u1x));
        }

    // Contraction estimate per cell; a_hat takes the worst cell plus two
    // standard errors.
    rep.a_hat = 0;
    for (int cidx = 0; cidx < n_cells; ++cidx) {
        DriftCell& cell = rep.cells[static_cast<std::size_t>(cidx)];
        double sum = 0, sumsq = 0;
        long n = 0;
        for (int t = 0; t < n_dirs; ++t)
            for (double l : logs[static_cast<std::size_t>(cidx)][static_cast<std::size_t>(t)]) {
                double r = std::exp(rep.delta * l);
                sum += r;
                sumsq += r * r;
                ++n;
            }
        cell.n_samples = n;
        cell.ratio_mean = sum / n;
        double var = std::max(0.0, sumsq / n - cell.ratio_mean * cell.ratio_mean);
        cell.se = std::sqrt(var / n);
        rep.a_hat = std::max(rep.a_hat, cell.ratio_mean + 2.0 * cell.se);
    }

    // b_hat: the averaged gauge over states inside the compact set.
    {
        double bh = 0;
        for (int t = 0; t < 8; ++t) {
            double mag = rep.k_radius * (t + 0.5) / 8.0;
            AffineSubspace x = detail::stratified_state(k, d, mag, state_rng);
            Vec px = plucker_embed(x).full_vector();
            double sum = 0, sumsq = 0;
            for (long wd = 0; wd < words; ++wd) {
                Vec img = word_products[static_cast<std::size_t>(wd)].apply(px);
                double u1g;
                try {
                    u1g = detail::u1_of_raw(img, ws);
                } catch (const degenerate_wedge&) {
                    u1g = 0;
                }
                double v = u1g > 0 ? std::pow(u1g, rep.delta) : 0.0;
                sum += v;
                sumsq += v * v;
            }
            double mean = sum / words;
            double se = std::sqrt(std::max(0.0, sumsq / words - mean * mean) / words);
            bh = std::max(bh, mean + 2.0 * se);
        }
        rep.b_hat = bh;
    }

    rep.recipe_ok = rep.a_hat < 1.0;
    if (!rep.recipe_ok && rep.note.empty()) rep.note = "no contraction certificate: a_hat >= 1";
    return rep;
}

// ---------------------------------------------------------------------------
// Dichotomy classifier on the sign of the (k+1)-th exponent.
//
// The direct rule is the 3-sigma test on the estimate. When that is
// inconclusive and the measure carries structure that pins the sign --
// symmetry (pairing exponent p with -exponent d+1-p) or a special affine
// group at k = d-1 (exponent sum zero) -- the verdict follows from the
// certified strict inequality between distinct exponents, or from the exact
// middle-exponent identity. Verdicts remain conditional on the density
// assumptions documented with the fixtures.
// ---------------------------------------------------------------------------

struct Classification {
    std::string verdict; // recurrent | transient | inconclusive
    double z = 0;        // confidence z-score of the deciding statistic
    std::string basis;   // direct | symmetry | symmetry-identity | unimodular
};

inline constexpr double kIdentityZ = 1e9; // verdict forced by an exact identity

inline Classification classify(const MeasureSpec& mu, int k, const LyapunovSpectrum& spectrum) {
    const int d = mu.d;
    if (k < 0 || k >= d) throw bad_degree("classify: k out of range");
    double lam = spectrum.lambda[static_cast<std::size_t>(k)];
    double se = spectrum.se[static_cast<std::size_t>(k)];
    double z = se > 0 ? lam / se : (lam == 0 ? 0 : std::copysign(kIdentityZ, lam));

    if (lam - 3 * se > 0) return {"transient", z, "direct"};
    if (lam + 3 * se < 0) return {"recurrent", -z, "direct"};

    if (is_symmetric(mu)) {
        // exponent p and exponent d+1-p sum to zero
        int mirror = d - k - 1; // 0-based index of exponent d-k
        if (2 * k >= d) {
            double diff = spectrum.lambda[static_cast<std::size_t>(mirror)] - lam;
            double sed = std::sqrt(spectrum.se[static_cast<std::size_t>(mirror)] * spectrum.se[static_cast<std::size_t>(mirror)] + se * se);
            double zs = sed > 0 ? diff / sed : kIdentityZ;
            if (zs >= 3) return {"recurrent", zs, "symmetry"};
        } else if (mirror == k) {
            // middle exponent of a symmetric measure is exactly zero
            return {"transient", kIdentityZ, "symmetry-identity"};
        } else {
            double diff = lam - spectrum.lambda[static_cast<std::size_t>(mirror)];
            double sed = std::sqrt(spectrum.se[static_cast<std::size_t>(mirror)] * spectrum.se[static_cast<std::size_t>(mirror)] + se * se);
            double zs = sed > 0 ? diff / sed : kIdentityZ;
            if (zs >= 3) return {"transient", zs, "symmetry"};
        }
    }
    if (mu.group_kind == GroupKind::SAff && k == d - 1) {
        // exponent sum is zero; a certified non-constant spectrum forces the
        // last exponent below zero
        double diff = spectrum.lambda[0] - spectrum.lambda[static_cast<std::size_t>(d - 1)];
        double sed = std::sqrt(spectrum.se[0] * spectrum.se[0] +
                               spectrum.se[static_cast<std::size_t>(d - 1)] * spectrum.se[static_cast<std::size_t>(d - 1)]);
        double zs = sed > 0 ? diff / sed : kIdentityZ;
        if (zs >= 3) return {"recurrent", zs, "unimodular"};
    }
    return {"inconclusive", std::abs(z), "direct"};
}

} // namespace affwalk
