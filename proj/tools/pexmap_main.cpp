// pexmap: piecewise expanding interval map toolkit
//
// Subcommands: verify h1|h3, density, family, couple, tower, tower-mass,
// mix, clt, repro. See README.md for recipes.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pexmap/assumptions.hpp"
#include "pexmap/coupling.hpp"
#include "pexmap/density.hpp"
#include "pexmap/errors.hpp"
#include "pexmap/hofbauer.hpp"
#include "pexmap/json_io.hpp"
#include "pexmap/recipes.hpp"
#include "pexmap/statistics.hpp"
#include "pexmap/ulam.hpp"

using namespace pexmap;

namespace {

std::string out_path(const std::string& out, const std::string& fallback) {
    if (!out.empty()) return out;
    const char* dir = std::getenv("PEXMAP_OUT_DIR");
    return (dir ? std::string(dir) + "/" : std::string()) + fallback;
}

bool parse_interval(const std::string& text, Interval& iv) {
    auto comma = text.find(',');
    if (comma == std::string::npos) return false;
    try {
        iv.lo = std::stod(text.substr(0, comma));
        iv.hi = std::stod(text.substr(comma + 1));
    } catch (...) {
        return false;
    }
    return !iv.empty();
}

void print_recipe(const RecipeResult& r) {
    for (const auto& c : r.checks) {
        std::printf("[%s] %-55s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    }
    std::printf("%s: %s (%.2f s)\n", r.recipe.c_str(), r.pass() ? "PASS" : "FAIL", r.seconds);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise expanding interval map toolkit"};
    app.set_config("--config");
    int threads = 0;
    app.add_option("--threads", threads, "parallelism degree (default: cores)");

    std::string map_path, fam_path, f_path, g_path, out, magnet_text, recipe_name, method;
    double q = 0.5, delta = 0.1;
    int n_max = 30, bins = 1 << 14, steps = 0, depth = 8, rounds = 10, horizon = 10000;
    std::uint64_t seed = 1;
    std::size_t samples = 10000;
    std::string mode = "empirical";

    auto* verify = app.add_subcommand("verify", "assumption checkers");
    auto* h1 = verify->add_subcommand("h1", "one-step expansion estimate");
    h1->add_option("--map", map_path)->required();
    h1->add_option("--q", q);
    h1->add_option("--delta", delta);
    std::vector<double> delta_grid;
    h1->add_option("--delta-grid", delta_grid, "report theta_hat over several delta values");
    h1->add_option("--out", out);

    auto* h3cmd = verify->add_subcommand("h3", "eventual covering of a magnet");
    h3cmd->add_option("--map", map_path)->required();
    h3cmd->add_option("--magnet", magnet_text)->required();
    h3cmd->add_option("--n-max", n_max);
    int h3_seeds = 16;
    h3cmd->add_option("--seeds", h3_seeds, "number of equal probe pieces");

    auto* density = app.add_subcommand("density", "invariant density estimation");
    density->add_option("--map", map_path)->required();
    density->add_option("--method", method, "ulam|iterate|closed-form")->required();
    density->add_option("--bins", bins);
    density->add_option("--steps", steps);
    density->add_option("--out", out);

    auto* family = app.add_subcommand("family", "standard family operations");
    std::string fam_op;
    family->add_option("op", fam_op, "iterate|cut|z")->required();
    family->add_option("--in", fam_path)->required();
    family->add_option("--map", map_path);
    family->add_option("--q0", q);
    family->add_option("--steps", steps);
    std::string cuts_text;
    family->add_option("--points", cuts_text, "comma-separated cut points");
    family->add_option("--out", out);

    auto* couple = app.add_subcommand("couple", "coupling algorithm over a magnet");
    couple->add_option("--map", map_path)->required();
    couple->add_option("--magnet", magnet_text)->required();
    couple->add_option("--family", fam_path);
    couple->add_option("--rounds", rounds);
    couple->add_option("--mode", mode, "empirical|proof");
    couple->add_option("--q0", q);
    couple->add_option("--delta0", delta);
    couple->add_option("--out", out);

    auto* tower = app.add_subcommand("tower", "Hofbauer tower construction");
    tower->add_option("--map", map_path)->required();
    tower->add_option("--depth", depth);
    tower->add_option("--out", out);

    auto* tower_mass = app.add_subcommand("tower-mass", "lifted mass profile");
    tower_mass->add_option("--map", map_path)->required();
    tower_mass->add_option("--depth", depth);
    tower_mass->add_option("--n", steps)->required();
    tower_mass->add_option("--out", out);

    auto* mix = app.add_subcommand("mix", "correlation series");
    mix->add_option("--map", map_path)->required();
    mix->add_option("--f", f_path)->required();
    mix->add_option("--g", g_path);
    mix->add_option("--n-max", n_max);
    mix->add_option("--method", method, "exact|mc");
    mix->add_option("--samples", samples);
    mix->add_option("--seed", seed);
    mix->add_option("--out", out);

    auto* clt = app.add_subcommand("clt", "Birkhoff-sum CLT diagnostic");
    clt->add_option("--map", map_path)->required();
    clt->add_option("--f", f_path)->required();
    clt->add_option("--n", horizon);
    clt->add_option("--samples", samples);
    clt->add_option("--seed", seed);

    auto* repro = app.add_subcommand("repro", "run a named reproduction recipe");
    repro->add_option("name", recipe_name,
                      "vssv-density|vssv-threshold|rychlik-fail|doubling-clt|unbounded-corr")
        ->required();
    repro->add_option("--seed", seed);
    repro->add_option("--out-dir", out);

    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads > 0) setenv("PEXMAP_THREADS", std::to_string(threads).c_str(), 1);

    try {
        if (h1->parsed()) {
            MapModel map = load_map_spec(map_path);
            for (double d : delta_grid) {
                H1Report sweep = estimate_theta0(map, q, d);
                std::printf("delta = %g: theta_hat = %s (%s)\n", d,
                            format_full(sweep.theta_hat).c_str(), sweep.pass ? "pass" : "fail");
            }
            H1Report rep = estimate_theta0(map, q, delta);
            std::vector<std::vector<double>> rows;
            for (const auto& w : rep.windows)
                rows.push_back({w.window.lo, w.window.hi, w.sum, w.error_bar});
            if (!out.empty() || std::getenv("PEXMAP_OUT_DIR"))
                write_csv(out_path(out, "h1_windows.csv"),
                          {"window_left", "window_right", "sum", "error_bar"}, rows);
            std::printf("theta_hat = %s at window (%s, %s], verdict: %s\n",
                        format_full(rep.theta_hat).c_str(), format_full(rep.worst_window.lo).c_str(),
                        format_full(rep.worst_window.hi).c_str(), rep.pass ? "pass" : "fail");
            return rep.pass ? 0 : 1;
        }
        if (h3cmd->parsed()) {
            MapModel map = load_map_spec(map_path);
            Interval magnet;
            if (!parse_interval(magnet_text, magnet)) {
                std::fprintf(stderr, "bad --magnet, expected a,b\n");
                return 2;
            }
            std::vector<Interval> seeds;
            for (int i = 1; i <= h3_seeds; ++i)
                seeds.push_back(Interval{static_cast<double>(i - 1) / h3_seeds,
                                         static_cast<double>(i) / h3_seeds});
            H3Report rep = check_h3(map, magnet, seeds, n_max);
            for (const auto& s : rep.seeds)
                std::printf("seed (%g, %g]: %s\n", s.seed.lo, s.seed.hi,
                            s.n_w < 0 ? "FAIL" : ("n_W = " + std::to_string(s.n_w)).c_str());
            std::printf("n_c candidate: %d, verdict: %s\n", rep.n_c_candidate,
                        rep.pass ? "pass" : "fail");
            return rep.pass ? 0 : 1;
        }
        if (density->parsed()) {
            MapModel map = load_map_spec(map_path);
            PiecewiseDensity d;
            if (method == "ulam") {
                auto stat = stationary_density(ulam_matrix(map, bins));
                d = stat.density;
                std::printf("power iteration: %d sweeps, residual %s\n", stat.iterations,
                            format_full(stat.residual).c_str());
            } else if (method == "iterate") {
                d = pushforward(map, PiecewiseDensity::uniform(), steps > 0 ? steps : 200);
            } else if (method == "closed-form") {
                if (map.generator().family != Family::vssv)
                    throw Error(ErrorCode::bad_parameter, "closed-form density is vssv-only");
                d = closed_form_vssv_density(map.generator().lambda, map.truncation());
            } else {
                std::fprintf(stderr, "unknown method %s\n", method.c_str());
                return 2;
            }
            write_density_csv(out_path(out, "density.csv"), d);
            std::printf("mass = %s, pieces = %zu, tail mass = %s\n",
                        format_full(d.mass()).c_str(), d.piece_count(),
                        format_full(map.tail_mass()).c_str());
            return 0;
        }
        if (family->parsed()) {
            StandardFamily fam = load_family_spec(fam_path);
            if (fam_op == "z") {
                std::printf("Z = %s\n", format_full(z_value(fam, q)).c_str());
                return 0;
            }
            if (fam_op == "cut") {
                std::vector<double> pts;
                std::stringstream ss(cuts_text);
                std::string tok;
                while (std::getline(ss, tok, ',')) pts.push_back(std::stod(tok));
                fam = cut_family(fam, pts);
            } else if (fam_op == "iterate") {
                MapModel map = load_map_spec(map_path);
                fam = iterate_family(map, fam, steps > 0 ? steps : 1);
            } else {
                std::fprintf(stderr, "unknown family op %s\n", fam_op.c_str());
                return 2;
            }
            std::vector<std::vector<double>> rows;
            for (const auto& e : fam.entries())
                rows.push_back({e.pair.support.lo, e.pair.support.hi, e.weight});
            write_csv(out_path(out, "family.csv"), {"support_left", "support_right", "weight"},
                      rows);
            std::printf("pairs = %zu, total weight = %s, dropped = %s\n", fam.entries().size(),
                        format_full(fam.total_weight()).c_str(),
                        format_full(fam.dropped_mass()).c_str());
            return 0;
        }
        if (couple->parsed()) {
            MapModel map = load_map_spec(map_path);
            Interval magnet;
            if (!parse_interval(magnet_text, magnet)) {
                std::fprintf(stderr, "bad --magnet, expected a,b\n");
                return 2;
            }
            StandardFamily fam =
                fam_path.empty()
                    ? StandardFamily::single(StandardPair::lebesgue(Interval{0.0, 1.0}))
                    : load_family_spec(fam_path);
            ConstantsMode m = mode == "proof" ? ConstantsMode::proof : ConstantsMode::empirical;
            CouplingConstants c = derive_constants(map, q, delta, magnet, m);
            std::printf("theta0 = %g, c0 = %g, C_p = %g, n_p = %d, n_c = %d, d_c = %g, "
                        "Theta_c = %g, N_c = %d\n",
                        c.theta0, c.c0, c.c_p, c.n_p, c.n_c, c.d_c, c.theta_c, c.n_coupling);
            if (m == ConstantsMode::proof)
                std::printf("proof covering pieces k >= %g (probes used instead)\n",
                            c.proof_covering_pieces);
            CouplingLedger ledger = run_coupling(map, fam, c, rounds);
            write_ledger_csv(out_path(out, "ledger.csv"), ledger);
            const auto& last = ledger.rounds.back();
            std::printf("rounds = %zu, cumulative coupled = %s, residual = %s, defect = %s\n",
                        ledger.rounds.size(), format_full(last.cumulative_coupled).c_str(),
                        format_full(last.residual_mass).c_str(),
                        format_full(ledger.accounting_defect).c_str());
            return 0;
        }
        if (tower->parsed()) {
            MapModel map = load_map_spec(map_path);
            Tower t = build_tower(map, depth);
            write_tower_json(out_path(out, "tower.json"), t);
            std::printf("nodes = %zu%s\n", t.nodes.size(),
                        t.hit_node_cap ? " (node cap hit, partial tower)" : "");
            return 0;
        }
        if (tower_mass->parsed()) {
            MapModel map = load_map_spec(map_path);
            Tower t = build_tower(map, depth);
            LiftProfile p = lift_mass_profile(map, t, steps);
            std::vector<std::vector<double>> rows;
            for (std::size_t l = 0; l < p.level_mass.size(); ++l)
                rows.push_back({static_cast<double>(l), p.level_mass[l],
                                p.cesaro_level_mass[l]});
            write_csv(out_path(out, "tower_mass.csv"), {"level", "mass", "cesaro_mass"}, rows);
            std::printf("levels = %zu, unresolved = %s\n", p.level_mass.size(),
                        format_full(p.unresolved).c_str());
            return 0;
        }
        if (mix->parsed()) {
            MapModel map = load_map_spec(map_path);
            ObservableSpec f = load_observable_spec(f_path);
            ObservableSpec g = g_path.empty() ? f : load_observable_spec(g_path);
            CorrelationMethod m =
                method == "mc" ? CorrelationMethod::monte_carlo : CorrelationMethod::exact;
            McOptions mc;
            mc.seed = seed;
            mc.samples = samples;
            auto series = correlation_series(map, f, g, n_max, m, mc);
            std::vector<std::vector<double>> rows;
            for (std::size_t n = 0; n < series.cov.size(); ++n)
                rows.push_back({static_cast<double>(n), series.cov[n],
                                n < series.stderrs.size() ? series.stderrs[n] : 0.0});
            write_csv(out_path(out, "mix.csv"), {"n", "cov", "stderr"}, rows);
            std::printf("fitted rate = %s\n", format_full(series.fitted_rate).c_str());
            return 0;
        }
        if (clt->parsed()) {
            MapModel map = load_map_spec(map_path);
            ObservableSpec f = load_observable_spec(f_path);
            auto series = correlation_series(map, f, f, 60, CorrelationMethod::exact);
            auto gk = green_kubo_sigma(series, 60);
            if (gk.coboundary || gk.sigma2 <= 0.0) {
                std::printf("sigma^2 = 0 (coboundary); CLT diagnostic skipped\n");
                return 1;
            }
            CltReport rep = birkhoff_clt_report(map, f, horizon, samples, seed, gk.sigma2);
            std::printf("sigma^2 = %s, KS = %s, variance slope = %s%s\n",
                        format_full(rep.sigma2).c_str(), format_full(rep.ks_distance).c_str(),
                        format_full(rep.variance_slope).c_str(),
                        rep.low_sample_warning ? " (low sample count)" : "");
            return 0;
        }
        if (repro->parsed()) {
            std::string dir = out.empty() ? "." : out;
            RecipeResult r;
            if (recipe_name == "vssv-density") r = repro_vssv_density(dir);
            else if (recipe_name == "vssv-threshold") r = repro_vssv_threshold();
            else if (recipe_name == "rychlik-fail") r = repro_rychlik_fail();
            else if (recipe_name == "doubling-clt") r = repro_doubling_clt(seed);
            else if (recipe_name == "unbounded-corr") r = repro_unbounded_corr();
            else {
                std::fprintf(stderr,
                             "unknown recipe %s (vssv-density, vssv-threshold, rychlik-fail, "
                             "doubling-clt, unbounded-corr)\n",
                             recipe_name.c_str());
                return 2;
            }
            print_recipe(r);
            return r.pass() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
