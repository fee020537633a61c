#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "affwalk/scenario.hpp"
#include "affwalk/svg.hpp"
#include "affwalk/walk.hpp"

namespace affwalk {

// ---------------------------------------------------------------------------
// Deterministic JSON fragments (17 significant digits everywhere)
// ---------------------------------------------------------------------------

namespace detail {

inline std::string jstr(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += std::string("\\") + c;
        else if (c == '\n')
            out += "\\n";
        else
            out += c;
    }
    return out + "\"";
}

inline std::string jarr(const Vec& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt17(v[i]);
    }
    return s + "]";
}

inline std::string jarr(const std::vector<long>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

inline std::string jmat(const Matrix& m) {
    std::string s = "[";
    for (int i = 0; i < m.rows(); ++i) {
        if (i) s += ", ";
        s += "[";
        for (int j = 0; j < m.cols(); ++j) {
            if (j) s += ", ";
            s += fmt17(m(i, j));
        }
        s += "]";
    }
    return s + "]";
}

} // namespace detail

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct ReportBundle {
    ScenarioConfig config;

    std::optional<LyapunovSpectrum> spectrum;
    std::optional<LimitLawReport> sigma_phi;
    std::optional<BlockExponents> blocks;
    std::vector<GrowthEstimate> crosschecks; // index p-1
    std::optional<Classification> classification;
    std::optional<RecurrenceReport> recurrence;
    std::optional<CouplingReport> coupling;
    std::optional<RatioSeries> ratio;
    std::optional<DriftReport> drift;
    std::optional<LimitLawReport> lil;

    std::vector<std::pair<std::string, std::string>> json_files;
    std::vector<std::pair<std::string, std::string>> csv_files;
    std::vector<std::pair<std::string, std::string>> svg_files;

    std::string failed_stage; // empty on success
    bool inconclusive = false;
};

/// Default pair of distinct starting subspaces: frame on the leading axes
/// with the base on the last one, and frame on the trailing axes with a
/// farther base on the first one.
inline AffineSubspace default_start_x(int k, int d) {
    Matrix frame(d, k);
    for (int j = 0; j < k; ++j) frame(j, j) = 1.0;
    Vec base(static_cast<std::size_t>(d), 0.0);
    base[static_cast<std::size_t>(d - 1)] = 1.0;
    return canonical_subspace(base, frame);
}

inline AffineSubspace default_start_y(int k, int d) {
    Matrix frame(d, k);
    for (int j = 0; j < k; ++j) frame(d - k + j, j) = 1.0;
    Vec base(static_cast<std::size_t>(d), 0.0);
    base[0] = 2.0;
    return canonical_subspace(base, frame);
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

namespace detail {

inline bool within(double a, double b, double se, double floor = 1e-12) {
    return std::abs(a - b) <= 3 * se + floor;
}

inline void run_spectrum_stage(ReportBundle& b, unsigned workers) {
    const ScenarioConfig& cfg = b.config;
    const MeasureSpec& mu = cfg.measure;
    const int d = mu.d;
    b.spectrum = lyapunov_spectrum(mu, cfg.n_steps, cfg.replicas, derive_seed(cfg.seed, 101), workers);
    b.sigma_phi = sigma_and_phi(mu, cfg.n_steps, cfg.replicas, derive_seed(cfg.seed, 103), workers);
    int cross_reps = std::max(8, cfg.replicas / 4);
    if (d <= 6) {
        b.crosschecks.clear();
        for (int p = 1; p <= d; ++p)
            b.crosschecks.push_back(spectrum_crosscheck(mu, p, cfg.n_steps, cross_reps,
                                                        derive_seed(cfg.seed, 200 + static_cast<std::uint64_t>(p)),
                                                        workers));
    }
    b.blocks = block_exponents(mu, cfg.k, cfg.n_steps, cross_reps, derive_seed(cfg.seed, 102), workers);

    const LyapunovSpectrum& sp = *b.spectrum;
    std::string sym = "n/a", uni = "n/a", cross = "n/a", blockcheck = "n/a";
    if (is_symmetric(mu)) {
        sym = "pass";
        for (int p = 0; p < d; ++p) {
            int q = d - 1 - p;
            double se = std::sqrt(sp.se[static_cast<std::size_t>(p)] * sp.se[static_cast<std::size_t>(p)] +
                                  sp.se[static_cast<std::size_t>(q)] * sp.se[static_cast<std::size_t>(q)]);
            if (!within(sp.lambda[static_cast<std::size_t>(p)], -sp.lambda[static_cast<std::size_t>(q)], se)) sym = "flag";
        }
    }
    if (mu.group_kind == GroupKind::SAff) {
        uni = within(sp.partial_sum.back(), 0.0, sp.partial_sum_se.back()) ? "pass" : "flag";
    }
    if (!b.crosschecks.empty()) {
        cross = "pass";
        for (int p = 1; p <= static_cast<int>(b.crosschecks.size()); ++p) {
            const GrowthEstimate& est = b.crosschecks[static_cast<std::size_t>(p - 1)];
            double se = std::sqrt(est.se * est.se + sp.partial_sum_se[static_cast<std::size_t>(p - 1)] *
                                                        sp.partial_sum_se[static_cast<std::size_t>(p - 1)]);
            if (!within(est.value, sp.partial_sum[static_cast<std::size_t>(p - 1)], se)) cross = "flag";
        }
    }
    {
        const BlockExponents& be = *b.blocks;
        double se = std::sqrt(be.se_diff * be.se_diff +
                              sp.se[static_cast<std::size_t>(cfg.k)] * sp.se[static_cast<std::size_t>(cfg.k)]);
        blockcheck = within(be.diff, sp.lambda[static_cast<std::size_t>(cfg.k)], se) ? "pass" : "flag";
    }

    std::ostringstream os;
    os << "{\n";
    os << "  \"lambda\": " << jarr(sp.lambda) << ",\n";
    os << "  \"stderr\": " << jarr(sp.se) << ",\n";
    os << "  \"partial_sum\": " << jarr(sp.partial_sum) << ",\n";
    os << "  \"partial_sum_stderr\": " << jarr(sp.partial_sum_se) << ",\n";
    os << "  \"sigma\": " << jarr(b.sigma_phi->sigma) << ",\n";
    os << "  \"sigma_stderr\": " << jarr(b.sigma_phi->sigma_se) << ",\n";
    os << "  \"phi\": " << jmat(b.sigma_phi->phi) << ",\n";
    os << "  \"crosscheck\": [";
    for (std::size_t i = 0; i < b.crosschecks.size(); ++i) {
        if (i) os << ", ";
        os << "{\"p\": " << (i + 1) << ", \"value\": " << fmt17(b.crosschecks[i].value)
           << ", \"stderr\": " << fmt17(b.crosschecks[i].se) << "}";
    }
    os << "],\n";
    os << "  \"block\": {\"k\": " << cfg.k << ", \"lambda_w\": " << fmt17(b.blocks->lambda_w)
       << ", \"stderr_w\": " << fmt17(b.blocks->se_w) << ", \"lambda_s\": " << fmt17(b.blocks->lambda_s)
       << ", \"stderr_s\": " << fmt17(b.blocks->se_s) << ", \"diff\": " << fmt17(b.blocks->diff)
       << ", \"stderr_diff\": " << fmt17(b.blocks->se_diff) << "},\n";
    os << "  \"checks\": {\"symmetry\": \"" << sym << "\", \"unimodularity\": \"" << uni << "\", \"crosscheck\": \""
       << cross << "\", \"prop21c\": \"" << blockcheck << "\"},\n";
    os << "  \"N\": " << cfg.n_steps << ",\n";
    os << "  \"replicas\": " << cfg.replicas << "\n";
    os << "}\n";
    b.json_files.emplace_back("spectrum.json", os.str());
}

inline void run_classify_stage(ReportBundle& b, unsigned workers) {
    if (!b.spectrum) run_spectrum_stage(b, workers);
    const ScenarioConfig& cfg = b.config;
    b.classification = classify(cfg.measure, cfg.k, *b.spectrum);
    const Classification& c = *b.classification;
    std::ostringstream os;
    os << "{\n";
    os << "  \"k\": " << cfg.k << ",\n";
    os << "  \"verdict\": " << jstr(c.verdict) << ",\n";
    os << "  \"z\": " << fmt17(c.z) << ",\n";
    os << "  \"basis\": " << jstr(c.basis) << ",\n";
    os << "  \"lambda\": " << fmt17(b.spectrum->lambda[static_cast<std::size_t>(cfg.k)]) << ",\n";
    os << "  \"stderr\": " << fmt17(b.spectrum->se[static_cast<std::size_t>(cfg.k)]) << "\n";
    os << "}\n";
    b.json_files.emplace_back("classify.json", os.str());
    if (c.verdict == "inconclusive") b.inconclusive = true;
}

inline void run_cesaro_stage(ReportBundle& b, unsigned workers) {
    const ScenarioConfig& cfg = b.config;
    AffineSubspace x0 = cfg.x0 ? *cfg.x0 : default_start_x(cfg.k, cfg.measure.d);
    b.recurrence =
        cesaro_mass(cfg.measure, x0, cfg.n_steps, cfg.radius, cfg.replicas, derive_seed(cfg.seed, 104), workers);
    const RecurrenceReport& r = *b.recurrence;

    std::ostringstream os;
    os << "{\n";
    os << "  \"R\": " << fmt17(r.radius) << ",\n";
    os << "  \"N\": " << r.horizon << ",\n";
    os << "  \"replicas\": " << r.replicas << ",\n";
    os << "  \"terminal_cesaro\": " << fmt17(r.cesaro_curve.back()) << ",\n";
    os << "  \"terminal_mass\": " << fmt17(r.mass_curve.back()) << ",\n";
    os << "  \"verdict\": " << jstr(r.verdict) << ",\n";
    os << "  \"threshold_recurrent\": " << fmt17(r.threshold_recurrent) << ",\n";
    os << "  \"threshold_transient\": " << fmt17(r.threshold_transient) << ",\n";
    os << "  \"overflow\": " << (r.overflow ? "true" : "false") << "\n";
    os << "}\n";
    b.json_files.emplace_back("cesaro.json", os.str());

    std::ostringstream ces;
    ces << "n,mass,stderr\n";
    for (std::size_t i = 0; i < r.n_grid.size(); ++i)
        ces << r.n_grid[i] << "," << fmt17(r.cesaro_curve[i]) << "," << fmt17(r.cesaro_se[i]) << "\n";
    b.csv_files.emplace_back("cesaro.csv", ces.str());

    std::ostringstream mass;
    mass << "n,mass,stderr\n";
    for (std::size_t i = 0; i < r.n_grid.size(); ++i) {
        double p = r.mass_curve[i];
        double se = std::sqrt(std::max(0.0, p * (1 - p)) / r.replicas);
        mass << r.n_grid[i] << "," << fmt17(p) << "," << fmt17(se) << "\n";
    }
    b.csv_files.emplace_back("mass.csv", mass.str());

    WordSampler s(derive_seed(cfg.seed, 109));
    Trajectory t = run_forward(cfg.measure, x0, std::min<long>(cfg.n_steps, 10000), s);
    std::ostringstream tr;
    tr << "n,dist\n";
    for (std::size_t i = 0; i < t.dist.size(); ++i) tr << (i + 1) << "," << fmt17(t.dist[i]) << "\n";
    b.csv_files.emplace_back("trajectory.csv", tr.str());
}

inline void run_coupling_stage(ReportBundle& b, unsigned workers) {
    const ScenarioConfig& cfg = b.config;
    int words = std::min(cfg.replicas, 100);
    AffineSubspace x0 = cfg.x0 ? *cfg.x0 : default_start_x(cfg.k, cfg.measure.d);
    AffineSubspace y0 = cfg.y0 ? *cfg.y0 : default_start_y(cfg.k, cfg.measure.d);
    b.coupling = backward_coupling(cfg.measure, x0, y0, cfg.n_steps, words, derive_seed(cfg.seed, 105), workers);
    const CouplingReport& c = *b.coupling;
    std::ostringstream os;
    os << "{\n";
    os << "  \"N\": " << c.horizon << ",\n";
    os << "  \"words\": " << c.words << ",\n";
    os << "  \"tolerance\": " << fmt17(c.couple_tol) << ",\n";
    os << "  \"coupled_fraction\": " << fmt17(c.coupled_fraction) << "\n";
    os << "}\n";
    b.json_files.emplace_back("coupling.json", os.str());

    std::ostringstream cs;
    cs << "word,n,dist\n";
    for (std::size_t w = 0; w < c.dist_series.size(); ++w)
        for (std::size_t i = 0; i < c.n_grid.size(); ++i)
            cs << w << "," << c.n_grid[i] << "," << fmt17(c.dist_series[w][i]) << "\n";
    b.csv_files.emplace_back("coupling.csv", cs.str());
}

inline void run_ratio_stage(ReportBundle& b, unsigned workers) {
    const ScenarioConfig& cfg = b.config;
    int words = std::min(cfg.replicas, 8);
    b.ratio = ratio_series(cfg.measure, cfg.k, cfg.n_steps, words, derive_seed(cfg.seed, 106), workers);
    const RatioSeries& r = *b.ratio;
    Vec terminal_t, terminal_sup;
    for (int w = 0; w < words; ++w) {
        terminal_t.push_back(r.t_values[static_cast<std::size_t>(w)].back());
        terminal_sup.push_back(r.run_sup[static_cast<std::size_t>(w)].back());
    }
    std::ostringstream os;
    os << "{\n";
    os << "  \"k\": " << r.k << ",\n";
    os << "  \"N\": " << r.horizon << ",\n";
    os << "  \"words\": " << words << ",\n";
    os << "  \"max_block_leak\": " << fmt17(r.max_block_leak) << ",\n";
    os << "  \"terminal_t\": " << jarr(terminal_t) << ",\n";
    os << "  \"terminal_runsup\": " << jarr(terminal_sup) << "\n";
    os << "}\n";
    b.json_files.emplace_back("ratio.json", os.str());

    for (int w = 0; w < words; ++w) {
        std::ostringstream cs;
        cs << "n,T_n,runsup\n";
        for (std::size_t i = 0; i < r.n_grid.size(); ++i)
            cs << r.n_grid[i] << "," << fmt17(r.t_values[static_cast<std::size_t>(w)][i]) << ","
               << fmt17(r.run_sup[static_cast<std::size_t>(w)][i]) << "\n";
        b.csv_files.emplace_back("ratio_word" + std::to_string(w) + ".csv", cs.str());
    }
}

inline void run_drift_stage(ReportBundle& b, unsigned workers) {
    const ScenarioConfig& cfg = b.config;
    long samples = std::max<long>(1000, 4L * cfg.replicas);
    b.drift = drift_verify(cfg.measure, cfg.k, cfg.delta, cfg.n0, samples, derive_seed(cfg.seed, 107), workers);
    const DriftReport& d = *b.drift;
    std::ostringstream os;
    os << "{\n";
    os << "  \"delta\": " << fmt17(d.delta) << ",\n";
    os << "  \"n0\": " << d.n0 << ",\n";
    os << "  \"c\": " << fmt17(d.c) << ",\n";
    os << "  \"K_radius\": " << fmt17(d.k_radius) << ",\n";
    os << "  \"epsilon\": " << fmt17(d.epsilon) << ",\n";
    os << "  \"kappa\": " << fmt17(d.kappa) << ",\n";
    os << "  \"M_hat\": " << fmt17(d.m_hat) << ",\n";
    os << "  \"a_hat\": " << fmt17(d.a_hat) << ",\n";
    os << "  \"b_hat\": " << fmt17(d.b_hat) << ",\n";
    os << "  \"lambda_w\": " << fmt17(d.lambda_w) << ",\n";
    os << "  \"lambda_s\": " << fmt17(d.lambda_s) << ",\n";
    os << "  \"samples\": " << d.samples << ",\n";
    os << "  \"recipe_ok\": " << (d.recipe_ok ? "true" : "false") << ",\n";
    os << "  \"note\": " << jstr(d.note) << "\n";
    os << "}\n";
    b.json_files.emplace_back("drift.json", os.str());

    std::ostringstream cs;
    cs << "cell_lo,cell_hi,ratio_mean,stderr,n_samples\n";
    for (const DriftCell& c : d.cells)
        cs << fmt17(c.lo) << "," << fmt17(c.hi) << "," << fmt17(c.ratio_mean) << "," << fmt17(c.se) << ","
           << c.n_samples << "\n";
    b.csv_files.emplace_back("drift_cells.csv", cs.str());

    if (!d.recipe_ok) b.inconclusive = true;
}

inline void run_lil_stage(ReportBundle& b, unsigned workers) {
    const ScenarioConfig& cfg = b.config;
    std::vector<long> grid;
    for (long n : log_grid(cfg.n_steps, 24))
        if (n >= 100) grid.push_back(n);
    if (grid.empty()) grid.push_back(cfg.n_steps);
    int words = std::min(cfg.replicas, 16);
    b.lil = lil_diagnostic(cfg.measure, grid, words, derive_seed(cfg.seed, 108), workers);
    const LimitLawReport& l = *b.lil;
    std::ostringstream os;
    os << "{\n";
    os << "  \"words\": " << words << ",\n";
    os << "  \"grid\": " << jarr(grid) << ",\n";
    os << "  \"containment_ratio\": " << fmt17(l.containment_ratio) << ",\n";
    os << "  \"exited_half_ball\": " << (l.exited_half_ball ? "true" : "false") << ",\n";
    os << "  \"sigma\": " << jarr(l.sigma) << ",\n";
    os << "  \"phi\": " << jmat(l.phi) << "\n";
    os << "}\n";
    b.json_files.emplace_back("lil.json", os.str());

    std::ostringstream cs;
    cs << "word,n";
    for (int j = 0; j < cfg.measure.d; ++j) cs << ",c" << (j + 1);
    cs << "\n";
    const std::size_t per_word = grid.size();
    for (std::size_t i = 0; i < l.lil_points.size(); ++i) {
        cs << (i / per_word) << "," << grid[i % per_word];
        for (double v : l.lil_points[i]) cs << "," << fmt17(v);
        cs << "\n";
    }
    b.csv_files.emplace_back("lil_points.csv", cs.str());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Plots
// ---------------------------------------------------------------------------

/// Renders the SVG views of whatever the bundle holds; returns a note when
/// nothing was plottable.
inline std::string emit_plots(ReportBundle& b) {
    int emitted = 0;
    auto log10c = [](double v) { return std::log10(std::max(v, 1e-300)); };

    if (b.spectrum) {
        const LyapunovSpectrum& sp = *b.spectrum;
        SvgPlot plot("exponent spectrum", "p", "lambda_p");
        std::vector<std::pair<double, double>> pts;
        for (int p = 0; p < sp.dim(); ++p) {
            pts.emplace_back(p + 1, sp.lambda[static_cast<std::size_t>(p)]);
            plot.add_whisker(p + 1, sp.lambda[static_cast<std::size_t>(p)] - 3 * sp.se[static_cast<std::size_t>(p)],
                             sp.lambda[static_cast<std::size_t>(p)] + 3 * sp.se[static_cast<std::size_t>(p)],
                             "steelblue");
        }
        plot.add_points(pts, "crimson");
        plot.add_hline(0.0, "gray");
        b.svg_files.emplace_back("spectrum.svg", plot.render());
        ++emitted;
    }
    if (b.recurrence) {
        const RecurrenceReport& r = *b.recurrence;
        SvgPlot plot("mass inside the ball", "log10 n", "mass");
        std::vector<std::pair<double, double>> ces, inst;
        for (std::size_t i = 0; i < r.n_grid.size(); ++i) {
            ces.emplace_back(log10c(static_cast<double>(r.n_grid[i])), r.cesaro_curve[i]);
            inst.emplace_back(log10c(static_cast<double>(r.n_grid[i])), r.mass_curve[i]);
        }
        plot.add_line(ces, "crimson");
        plot.add_line(inst, "steelblue");
        plot.add_hline(r.threshold_recurrent, "gray");
        plot.add_hline(r.threshold_transient, "gray");
        b.svg_files.emplace_back("cesaro.svg", plot.render());
        ++emitted;
    }
    if (b.coupling) {
        const CouplingReport& c = *b.coupling;
        SvgPlot plot("coupling distance", "log10 n", "log10 distance");
        for (std::size_t w = 0; w < c.dist_series.size() && w < 20; ++w) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < c.n_grid.size(); ++i)
                pts.emplace_back(log10c(static_cast<double>(c.n_grid[i])), log10c(c.dist_series[w][i]));
            plot.add_line(pts, w % 2 ? "steelblue" : "seagreen");
        }
        plot.add_hline(std::log10(c.couple_tol), "gray");
        b.svg_files.emplace_back("coupling.svg", plot.render());
        ++emitted;
    }
    if (b.ratio) {
        const RatioSeries& r = *b.ratio;
        SvgPlot plot("block ratio statistic", "log10 n", "T_n");
        for (std::size_t w = 0; w < r.t_values.size() && w < 8; ++w) {
            std::vector<std::pair<double, double>> tv, rs;
            for (std::size_t i = 0; i < r.n_grid.size(); ++i) {
                tv.emplace_back(log10c(static_cast<double>(r.n_grid[i])), r.t_values[w][i]);
                rs.emplace_back(log10c(static_cast<double>(r.n_grid[i])), r.run_sup[w][i]);
            }
            plot.add_line(tv, "steelblue");
            plot.add_line(rs, "crimson");
        }
        b.svg_files.emplace_back("ratio.svg", plot.render());
        ++emitted;
    }
    if (b.drift) {
        const DriftReport& d = *b.drift;
        if (!d.cells.empty()) {
            SvgPlot plot("gauge contraction by cell", "log10 gauge", "mean ratio");
            std::vector<std::pair<double, double>> pts;
            for (const DriftCell& c : d.cells) {
                double x = log10c(std::sqrt(c.lo * c.hi));
                pts.emplace_back(x, c.ratio_mean);
                plot.add_whisker(x, c.ratio_mean - 2 * c.se, c.ratio_mean + 2 * c.se, "steelblue");
            }
            plot.add_points(pts, "crimson");
            plot.add_hline(1.0, "gray");
            plot.add_hline(d.a_hat, "seagreen");
            b.svg_files.emplace_back("drift.svg", plot.render());
            ++emitted;
        }
    }
    if (b.lil && b.lil->containment_ratio >= 0) {
        const LimitLawReport& l = *b.lil;
        const int d = b.config.measure.d;
        SvgPlot plot("iterated-logarithm excursions", d >= 2 ? "c1" : "point index", d >= 2 ? "c2" : "c1");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < l.lil_points.size(); ++i) {
            if (d >= 2)
                pts.emplace_back(l.lil_points[i][0], l.lil_points[i][1]);
            else
                pts.emplace_back(static_cast<double>(i), l.lil_points[i][0]);
        }
        plot.add_points(pts, "steelblue");
        if (d >= 2) {
            Matrix phi2(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) phi2(i, j) = l.phi(i, j);
            SymEigen eig = sym_eigen(phi2);
            double r1 = std::sqrt(std::max(eig.values[0], 0.0)), r2 = std::sqrt(std::max(eig.values[1], 0.0));
            double angle = std::atan2(eig.vectors(1, 0), eig.vectors(0, 0)) * 180.0 / 3.14159265358979323846;
            plot.add_ellipse(0, 0, 1.5 * r1, 1.5 * r2, angle, "crimson");
            plot.add_ellipse(0, 0, 0.5 * r1, 0.5 * r2, angle, "gray");
        } else {
            double s = std::sqrt(std::max(l.phi(0, 0), 0.0));
            plot.add_hline(1.5 * s, "crimson");
            plot.add_hline(-1.5 * s, "crimson");
            plot.add_hline(0.5 * s, "gray");
            plot.add_hline(-0.5 * s, "gray");
        }
        b.svg_files.emplace_back("lil.svg", plot.render());
        ++emitted;
    }
    return emitted ? "" : "no plottable data in bundle";
}

// ---------------------------------------------------------------------------
// Experiment dispatch
// ---------------------------------------------------------------------------

inline ReportBundle run_experiment(const ScenarioConfig& cfg, unsigned workers = 1) {
    cfg.validate();
    ReportBundle b;
    b.config = cfg;

    auto stage = [&](const char* name, auto&& fn) {
        if (!b.failed_stage.empty()) return;
        try {
            fn();
        } catch (const error& e) {
            b.failed_stage = std::string(name) + ": " + e.what();
        }
    };

    const std::string& exp = cfg.experiment;
    if (exp == "spectrum") {
        stage("spectrum", [&] { detail::run_spectrum_stage(b, workers); });
    } else if (exp == "classify") {
        stage("classify", [&] { detail::run_classify_stage(b, workers); });
    } else if (exp == "cesaro") {
        stage("cesaro", [&] { detail::run_cesaro_stage(b, workers); });
    } else if (exp == "coupling") {
        stage("coupling", [&] { detail::run_coupling_stage(b, workers); });
    } else if (exp == "ratio") {
        stage("ratio", [&] { detail::run_ratio_stage(b, workers); });
    } else if (exp == "drift") {
        stage("drift", [&] { detail::run_drift_stage(b, workers); });
    } else if (exp == "lil") {
        stage("lil", [&] { detail::run_lil_stage(b, workers); });
    } else if (exp == "full") {
        stage("spectrum", [&] { detail::run_spectrum_stage(b, workers); });
        stage("classify", [&] { detail::run_classify_stage(b, workers); });
        stage("cesaro", [&] { detail::run_cesaro_stage(b, workers); });
        if (b.classification && b.classification->verdict == "recurrent") {
            stage("drift", [&] { detail::run_drift_stage(b, workers); });
            stage("coupling", [&] { detail::run_coupling_stage(b, workers); });
        } else if (b.classification && b.classification->verdict == "transient") {
            stage("ratio", [&] { detail::run_ratio_stage(b, workers); });
        }
    }

    // bundle manifest (wall-clock deliberately kept out of the payloads)
    std::ostringstream os;
    os << "{\n";
    os << "  \"tool\": \"" << kToolVersion << "\",\n";
    os << "  \"scenario\": " << detail::jstr(cfg.name) << ",\n";
    os << "  \"experiment\": \"" << cfg.experiment << "\",\n";
    os << "  \"failed_stage\": " << detail::jstr(b.failed_stage) << ",\n";
    os << "  \"inconclusive\": " << (b.inconclusive ? "true" : "false") << ",\n";
    os << "  \"files\": [";
    bool first = true;
    for (const auto& f : b.json_files) {
        if (!first) os << ", ";
        os << "\"" << f.first << "\"";
        first = false;
    }
    for (const auto& f : b.csv_files) {
        if (!first) os << ", ";
        os << "\"" << f.first << "\"";
        first = false;
    }
    os << "]\n}\n";
    b.json_files.emplace_back("bundle.json", os.str());
    b.json_files.emplace_back("scenario_resolved.json", write_scenario(cfg));
    return b;
}

/// Writes every payload of the bundle under dir/<scenario name>/.
inline std::filesystem::path write_bundle(const ReportBundle& b, const std::string& out_dir, bool with_plots = true) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(out_dir) / b.config.name;
    fs::create_directories(dir);
    auto dump = [&](const std::vector<std::pair<std::string, std::string>>& files) {
        for (const auto& [name, content] : files) {
            std::ofstream out(dir / name, std::ios::binary);
            out << content;
        }
    };
    dump(b.json_files);
    dump(b.csv_files);
    if (with_plots) dump(b.svg_files);
    return dir;
}

} // namespace affwalk
