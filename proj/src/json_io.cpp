#include "pexmap/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pexmap/errors.hpp"

namespace pexmap {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    json j;
    in >> j;
    return j;
}

MapModel map_from_json(const json& j) {
    std::string family = j.at("family").get<std::string>();
    int truncation = j.value("truncation", 60);
    int iterate = j.value("iterate", 1);
    json params = j.value("params", json::object());
    if (family == "doubling") return MapModel::doubling(iterate);
    if (family == "dyadic") return MapModel::dyadic(params.value("m", 2), iterate);
    if (family == "vssv") return MapModel::vssv(params.at("lambda").get<double>(), truncation, iterate);
    if (family == "geometric_tail") {
        LambdaRule rule;
        std::string kind = params.value("lambda_rule", std::string("constant"));
        if (kind == "constant") {
            rule.kind = LambdaRule::Kind::constant;
            rule.value = params.value("lambda_value", 2.0);
        } else if (kind == "index") {
            rule.kind = LambdaRule::Kind::index;
        } else {
            throw Error(ErrorCode::bad_parameter, "unknown lambda_rule " + kind);
        }
        return MapModel::geometric_tail(params.value("ratio", 0.5), rule, truncation, iterate);
    }
    if (family == "explicit") {
        std::vector<BranchSpec> branches;
        int idx = 1;
        for (const auto& b : j.at("branches")) {
            BranchSpec spec;
            spec.index = idx++;
            spec.domain = Interval{b.at("domain")[0].get<double>(), b.at("domain")[1].get<double>()};
            double slope = b.at("slope").get<double>();
            double intercept = b.at("intercept").get<double>();
            spec.action = AffineAction{slope, intercept};
            double y1 = slope * spec.domain.lo + intercept, y2 = slope * spec.domain.hi + intercept;
            if (y1 > y2) std::swap(y1, y2);
            spec.image = Interval{y1, y2};
            branches.push_back(spec);
        }
        return MapModel::explicit_map(std::move(branches), iterate);
    }
    throw Error(ErrorCode::bad_parameter, "unknown family " + family);
}

} // namespace

MapModel load_map_spec(const std::string& path) { return map_from_json(load_json(path)); }

MapModel parse_map_spec(const std::string& text) { return map_from_json(json::parse(text)); }

namespace {

StandardFamily family_from_json(const json& j) {
    StandardFamily fam;
    for (const auto& e : j) {
        Interval support{e.at("support")[0].get<double>(), e.at("support")[1].get<double>()};
        double weight = e.value("weight", 1.0);
        StandardPair pair;
        const auto& dens = e.at("density");
        if (dens.is_string() && dens.get<std::string>() == "uniform") {
            pair = StandardPair::lebesgue(support);
        } else {
            std::vector<double> bp{0.0, 1.0};
            for (const auto& p : dens) {
                bp.push_back(p.at("left").get<double>());
                bp.push_back(p.at("right").get<double>());
            }
            std::sort(bp.begin(), bp.end());
            std::vector<double> dd;
            for (double p : bp)
                if (dd.empty() || !points_equal(dd.back(), p)) dd.push_back(p);
            std::vector<double> vals(dd.size() - 1, 0.0);
            for (const auto& p : dens) {
                double l = p.at("left").get<double>(), r = p.at("right").get<double>();
                double v = p.at("value").get<double>();
                for (std::size_t i = 0; i + 1 < dd.size(); ++i) {
                    double mid = 0.5 * (dd[i] + dd[i + 1]);
                    if (mid > l && mid <= r) vals[i] = v;
                }
            }
            pair = StandardPair::with_density(
                support, PiecewiseDensity::from_breakpoints(std::move(dd), std::move(vals)));
        }
        fam.entries().push_back(WeightedPair{std::move(pair), weight});
    }
    return fam;
}

ObservableSpec observable_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "polynomial")
        return ObservableSpec::polynomial(j.at("coefficients").get<std::vector<double>>());
    if (kind == "indicator")
        return ObservableSpec::indicator_of(
            Interval{j.at("interval")[0].get<double>(), j.at("interval")[1].get<double>()});
    if (kind == "power_singularity") return ObservableSpec::power_singularity(j.at("tau").get<double>());
    if (kind == "piecewise") {
        ObservableSpec f;
        f.kind = ObservableSpec::Kind::piecewise;
        for (const auto& p : j.at("pieces"))
            f.pieces.emplace_back(
                Interval{p.at("interval")[0].get<double>(), p.at("interval")[1].get<double>()},
                p.at("coefficients").get<std::vector<double>>());
        return f;
    }
    throw Error(ErrorCode::bad_parameter, "unknown observable kind " + kind);
}

} // namespace

StandardFamily load_family_spec(const std::string& path) {
    return family_from_json(load_json(path));
}
StandardFamily parse_family_spec(const std::string& text) {
    return family_from_json(json::parse(text));
}

ObservableSpec load_observable_spec(const std::string& path) {
    return observable_from_json(load_json(path));
}
ObservableSpec parse_observable_spec(const std::string& text) {
    return observable_from_json(json::parse(text));
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_full(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
}

void write_density_csv(const std::string& path, const PiecewiseDensity& d) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < d.values().size(); ++i)
        rows.push_back({d.breakpoints()[i], d.breakpoints()[i + 1], d.values()[i]});
    write_csv(path, {"left", "right", "value"}, rows);
}

void write_tower_json(const std::string& path, const Tower& t) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : t.nodes)
        j["nodes"].push_back({{"interval", {n.interval.lo, n.interval.hi}}, {"level", n.level}});
    j["edges"] = json::array();
    for (std::size_t i = 0; i < t.edges.size(); ++i)
        for (const auto& e : t.edges[i])
            j["edges"].push_back({{"from", i}, {"branch", e.branch}, {"to", e.target}});
    j["hit_node_cap"] = t.hit_node_cap;
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_ledger_csv(const std::string& path, const CouplingLedger& ledger) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : ledger.rounds)
        rows.push_back({static_cast<double>(r.round), static_cast<double>(r.time),
                        r.coupled_mass, r.cumulative_coupled, r.residual_mass, r.residual_z,
                        r.covering_ratio_observed});
    write_csv(path, {"round", "time", "coupled_mass", "cumulative", "residual", "residual_Z",
                     "delta_observed"},
              rows);
}

} // namespace pexmap
