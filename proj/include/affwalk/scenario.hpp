#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "affwalk/grassmann.hpp"
#include "affwalk/group.hpp"

namespace affwalk {

inline constexpr const char* kToolVersion = "affwalk 0.1.0";

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"spectrum", "classify", "cesaro", "coupling",
                                                   "ratio",    "drift",    "lil",    "full"};
    return names;
}

struct ScenarioConfig {
    std::string name = "scenario";
    MeasureSpec measure;
    int k = 0;
    std::uint64_t seed = 1;
    std::string experiment = "full";
    long n_steps = 10000;
    int replicas = 256;
    double radius = 10.0;
    std::optional<double> delta;
    std::optional<int> n0;
    std::optional<AffineSubspace> x0; // starting subspaces; defaults are
    std::optional<AffineSubspace> y0; // derived from (k, d) when absent
    std::string out_dir = "reports";

    void validate() const {
        if (measure.d < 1 || measure.d > 10) throw validation_error("d");
        if (k < 0 || k >= measure.d) throw validation_error("k < d required");
        if (n_steps < 1) throw validation_error("N");
        if (replicas < 1) throw validation_error("replicas");
        if (!(radius > 0)) throw validation_error("R");
        bool known = false;
        for (const std::string& e : experiment_names()) known |= e == experiment;
        if (!known) throw validation_error("experiment");
        if (delta && !(*delta > 0)) throw validation_error("delta");
        if (n0 && *n0 < 1) throw validation_error("n0");
        for (const auto& start : {x0, y0})
            if (start && (start->k != k || start->ambient_dim() != measure.d)) throw validation_error("start subspace");
        measure.validate();
    }
};

inline ScenarioConfig parse_scenario(const nlohmann::json& j, const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    try {
        std::string group = j.at("group").get<std::string>();
        if (group == "Aff")
            cfg.measure.group_kind = GroupKind::Aff;
        else if (group == "SAff")
            cfg.measure.group_kind = GroupKind::SAff;
        else
            throw validation_error("group");
        cfg.measure.d = j.at("d").get<int>();
        cfg.k = j.at("k").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("experiment")) cfg.experiment = j.at("experiment").get<std::string>();
        if (j.contains("N")) cfg.n_steps = j.at("N").get<long>();
        if (j.contains("replicas")) cfg.replicas = j.at("replicas").get<int>();
        if (j.contains("R")) cfg.radius = j.at("R").get<double>();
        if (j.contains("delta") && !j.at("delta").is_null()) cfg.delta = j.at("delta").get<double>();
        if (j.contains("n0") && !j.at("n0").is_null()) cfg.n0 = j.at("n0").get<int>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();

        auto read_subspace = [&](const char* key) -> std::optional<AffineSubspace> {
            if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
            const auto& js = j.at(key);
            int sk = js.at("k").get<int>();
            const auto& jb = js.at("base");
            if (static_cast<int>(jb.size()) != cfg.measure.d) throw validation_error("start subspace");
            Vec point(static_cast<std::size_t>(cfg.measure.d));
            for (std::size_t i = 0; i < point.size(); ++i) point[i] = jb.at(i).get<double>();
            const auto& jf = js.at("frame");
            if (static_cast<int>(jf.size()) != sk) throw validation_error("start subspace");
            Matrix dirs(cfg.measure.d, sk);
            for (int c = 0; c < sk; ++c) {
                const auto& row = jf.at(static_cast<std::size_t>(c));
                if (static_cast<int>(row.size()) != cfg.measure.d) throw validation_error("start subspace");
                for (int i = 0; i < cfg.measure.d; ++i) dirs(i, c) = row.at(static_cast<std::size_t>(i)).get<double>();
            }
            return canonical_subspace(point, dirs);
        };
        cfg.x0 = read_subspace("x0");
        cfg.y0 = read_subspace("y0");

        const auto& atoms = j.at("measure").at("atoms");
        const int d = cfg.measure.d;
        for (const auto& ja : atoms) {
            Atom a;
            a.weight = ja.at("weight").get<double>();
            const auto& lin = ja.at("A");
            if (static_cast<int>(lin.size()) != d * d) throw validation_error("atom A size");
            a.map.linear = Matrix(d, d);
            for (int i = 0; i < d; ++i)
                for (int c = 0; c < d; ++c)
                    a.map.linear(i, c) = lin.at(static_cast<std::size_t>(i * d + c)).get<double>();
            const auto& tr = ja.at("u");
            if (static_cast<int>(tr.size()) != d) throw validation_error("atom u size");
            a.map.translation.resize(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) a.map.translation[static_cast<std::size_t>(i)] = tr.at(static_cast<std::size_t>(i)).get<double>();
            cfg.measure.atoms.push_back(std::move(a));
        }
    } catch (const validation_error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("scenario: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("scenario: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("scenario: ") + e.what());
    }
    std::string name = path;
    if (auto slash = name.find_last_of("/\\"); slash != std::string::npos) name = name.substr(slash + 1);
    if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    return parse_scenario(j, name);
}

/// Serializes a config back to the scenario schema, 17 significant digits.
inline std::string write_scenario(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"group\": \"" << (cfg.measure.group_kind == GroupKind::SAff ? "SAff" : "Aff") << "\",\n";
    os << "  \"d\": " << cfg.measure.d << ",\n";
    os << "  \"k\": " << cfg.k << ",\n";
    os << "  \"seed\": " << cfg.seed << ",\n";
    os << "  \"experiment\": \"" << cfg.experiment << "\",\n";
    os << "  \"N\": " << cfg.n_steps << ",\n";
    os << "  \"replicas\": " << cfg.replicas << ",\n";
    os << "  \"R\": " << fmt17(cfg.radius) << ",\n";
    if (cfg.delta) os << "  \"delta\": " << fmt17(*cfg.delta) << ",\n";
    if (cfg.n0) os << "  \"n0\": " << *cfg.n0 << ",\n";
    auto dump_subspace = [&](const char* key, const AffineSubspace& x) {
        os << "  \"" << key << "\": {\"k\": " << x.k << ", \"base\": [";
        for (std::size_t i = 0; i < x.base.size(); ++i) {
            if (i) os << ", ";
            os << fmt17(x.base[i]);
        }
        os << "], \"frame\": [";
        for (int c = 0; c < x.k; ++c) {
            if (c) os << ", ";
            os << "[";
            for (int i = 0; i < x.frame.rows(); ++i) {
                if (i) os << ", ";
                os << fmt17(x.frame(i, c));
            }
            os << "]";
        }
        os << "]},\n";
    };
    if (cfg.x0) dump_subspace("x0", *cfg.x0);
    if (cfg.y0) dump_subspace("y0", *cfg.y0);
    os << "  \"measure\": {\"atoms\": [\n";
    for (std::size_t a = 0; a < cfg.measure.atoms.size(); ++a) {
        const Atom& atom = cfg.measure.atoms[a];
        os << "    {\"weight\": " << fmt17(atom.weight) << ", \"A\": [";
        const int d = cfg.measure.d;
        for (int i = 0; i < d * d; ++i) {
            if (i) os << ", ";
            os << fmt17(atom.map.linear(i / d, i % d));
        }
        os << "], \"u\": [";
        for (int i = 0; i < d; ++i) {
            if (i) os << ", ";
            os << fmt17(atom.map.translation[static_cast<std::size_t>(i)]);
        }
        os << "]}" << (a + 1 < cfg.measure.atoms.size() ? "," : "") << "\n";
    }
    os << "  ]}\n}\n";
    return os.str();
}

} // namespace affwalk
