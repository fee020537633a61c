#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "affwalk/fixtures.hpp"
#include "affwalk/report.hpp"

using namespace affwalk;

namespace {

ScenarioConfig make_fixture(const std::string& name, MeasureSpec mu, int k, const std::string& experiment, long n,
                            int replicas, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.measure = std::move(mu);
    cfg.k = k;
    cfg.experiment = experiment;
    cfg.n_steps = n;
    cfg.replicas = replicas;
    cfg.seed = seed;
    return cfg;
}

std::vector<ScenarioConfig> builtin_fixtures() {
    using namespace fixtures;
    return {
        make_fixture("saff2_lines", saff2(), 1, "full", 10000, 256, 42),
        make_fixture("saff2_points", saff2(), 0, "full", 10000, 256, 42),
        make_fixture("aff3_sym_k0", aff3_symmetric(), 0, "classify", 10000, 128, 43),
        make_fixture("aff3_sym_k1", aff3_symmetric(), 1, "classify", 10000, 128, 43),
        make_fixture("aff3_sym_k2", aff3_symmetric(), 2, "classify", 10000, 128, 43),
        make_fixture("d1_symmetric", d1_symmetric(), 0, "spectrum", 100000, 64, 44),
        make_fixture("d1_contract", d1_contract(), 0, "cesaro", 10000, 256, 45),
        make_fixture("d1_expand", d1_expand(), 0, "cesaro", 10000, 256, 46),
        make_fixture("commuting_diag", commuting_diag(), 0, "spectrum", 10000, 64, 47),
        make_fixture("sl2_symmetric", sl2_symmetric(), 0, "lil", 100000, 16, 48),
        make_fixture("conformal2", conformal2_balanced(), 1, "ratio", 10000, 8, 49),
        make_fixture("rotation2", rotation2(), 1, "coupling", 500, 100, 50),
    };
}

int write_fixtures(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const ScenarioConfig& cfg : builtin_fixtures()) {
        std::ofstream out(std::filesystem::path(out_dir) / (cfg.name + ".json"), std::ios::binary);
        out << write_scenario(cfg);
        std::cout << "wrote " << cfg.name << ".json\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation laboratory for random walks on spaces of affine subspaces"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    unsigned workers = default_workers();
    std::uint64_t seed_override = 0;
    bool seed_given = false, no_plots = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the scenario)");
        sub->add_option("--workers", workers, "worker threads");
        sub->add_option("--seed", seed_override, "seed override")->each([&](const std::string&) { seed_given = true; });
        sub->add_flag("--no-plots", no_plots, "skip SVG emission");
    };

    std::vector<CLI::App*> verbs;
    for (const std::string& name : experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_common(sub);
        verbs.push_back(sub);
    }
    CLI::App* fix = app.add_subcommand("fixtures", "write the built-in fixture scenario files");
    std::string fix_out = "fixtures";
    fix->add_option("--out", fix_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (fix->parsed()) return write_fixtures(fix_out);

    try {
        ScenarioConfig cfg = load_scenario(scenario_path);
        for (std::size_t i = 0; i < verbs.size(); ++i)
            if (verbs[i]->parsed()) cfg.experiment = experiment_names()[i];
        if (seed_given) cfg.seed = seed_override;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();

        auto t0 = std::chrono::steady_clock::now();
        ReportBundle bundle = run_experiment(cfg, workers);
        if (!no_plots) emit_plots(bundle);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        auto dir = write_bundle(bundle, cfg.out_dir, !no_plots);
        {
            std::ofstream timing(dir / "timing.txt");
            timing << "wall_seconds " << fmt17(wall) << "\n";
        }

        std::cout << "scenario " << cfg.name << " experiment " << cfg.experiment << "\n";
        if (bundle.classification)
            std::cout << "verdict " << bundle.classification->verdict << " (z=" << bundle.classification->z << ")\n";
        if (bundle.recurrence) std::cout << "cesaro " << bundle.recurrence->verdict << "\n";
        if (bundle.drift)
            std::cout << "drift a_hat=" << bundle.drift->a_hat << (bundle.drift->recipe_ok ? " (ok)" : " (failed)")
                      << "\n";
        if (bundle.coupling) std::cout << "coupled fraction " << bundle.coupling->coupled_fraction << "\n";
        std::cout << "reports in " << dir.string() << " (" << wall << "s)\n";

        if (!bundle.failed_stage.empty()) {
            std::cerr << "failed stage: " << bundle.failed_stage << "\n";
            return 1;
        }
        if (bundle.inconclusive) return 3;
        return 0;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
