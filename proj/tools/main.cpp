#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "beamlab/evolve.hpp"
#include "beamlab/experiments.hpp"
#include "beamlab/geometry.hpp"
#include "beamlab/io.hpp"
#include "beamlab/oscillator.hpp"
#include "beamlab/quasimode.hpp"
#include "beamlab/wkb.hpp"

namespace fs = std::filesystem;
using beamlab::format_double;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string default_out_root() {
    const char* env = std::getenv("BEAMLAB_OUT");
    return env && *env ? env : "out";
}

struct WkbCli {
    double p = 2.0;
    int sigma = 1;
    int n_terms = 1;
    double omega = 1.0;
    double h = 1.0 / 16.0;
    bool shifted = false;
    int n_max = 128;
};

void add_wkb_options(CLI::App* cmd, WkbCli& o, bool with_h) {
    cmd->add_option("--p", o.p, "nonlinearity power (even integer for N >= 2)");
    cmd->add_option("--sigma", o.sigma, "reduced-equation coupling sign, +1 or -1");
    cmd->add_option("--N", o.n_terms, "number of correction terms");
    cmd->add_option("--n-max", o.n_max, "Hermite truncation");
    if (with_h) {
        cmd->add_option("--omega", o.omega, "oscillator frequency");
        cmd->add_option("--h", o.h, "semiclassical parameter, 1/k");
        cmd->add_flag("--shifted", o.shifted, "keep -h^q E1 on the left of the order-1 solve");
    }
}

beamlab::WkbSolution solve_from_cli(const WkbCli& o, double omega) {
    beamlab::WkbConfig cfg;
    cfg.p = o.p;
    cfg.sigma = o.sigma;
    cfg.n_terms = o.n_terms;
    cfg.omega = omega;
    cfg.n_max = o.n_max;
    cfg.shifted = o.shifted;
    cfg.h_shift = o.shifted ? o.h : 0.0;
    beamlab::OscillatorBasis basis(
        omega, cfg.n_max, std::max(4, 2 * static_cast<int>(std::ceil(cfg.p / 2.0))));
    return beamlab::solve_hierarchy(cfg, basis);
}

ordered_json field_diagnostics_json(const beamlab::QuasimodeField& field,
                                    const beamlab::MetricProfile& profile,
                                    beamlab::PotentialMode mode, double delta) {
    const beamlab::Diagnostics res = beamlab::residual(field, profile, mode);
    const beamlab::Diagnostics loc = beamlab::localization(field, delta);
    ordered_json j;
    j["k"] = field.k;
    j["h"] = field.h;
    j["lambda"] = field.lambda;
    j["coupling_effective"] = field.coupling;
    j["beam_amplitude"] = field.amplitude;
    j["theta_mode_mass_fraction"] = beamlab::theta_mode_mass_fraction(field);
    j["residual_l2"] = res.residual_l2;
    j["reduced_residual"] = res.reduced_residual;
    j["tube_mass_out"] = loc.tube_mass_out;
    ordered_json hr = ordered_json::object();
    for (const auto& [r, v] : loc.hr_norms) hr["H" + std::to_string(r)] = v;
    j["hr_norms"] = hr;
    return j;
}

void dump_field_csv(const beamlab::QuasimodeField& field, const std::string& path) {
    beamlab::CsvWriter csv(path, {"theta_index", "x_index", "re_u", "im_u"});
    for (int i = 0; i < field.grid.n_theta; ++i)
        for (int j = 0; j < field.grid.n_x; ++j) {
            const beamlab::cplx v = field.values[field.idx(i, j)];
            csv.row({std::to_string(i), std::to_string(j), format_double(v.real()),
                     format_double(v.imag())});
        }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"beamlab: nonlinear Gaussian-beam quasimodes on a surface of revolution"};
    app.require_subcommand(1);

    std::string out_root = default_out_root();
    app.add_option("--out", out_root, "output root directory (env BEAMLAB_OUT)");
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker count for sweeps (never affects results)");

    // ------------------------------------------------------------- selftest
    CLI::App* selftest = app.add_subcommand("selftest", "run the oscillator invariant suite");

    // ------------------------------------------------------------ wkb solve
    CLI::App* wkb = app.add_subcommand("wkb", "reduced stationary hierarchy");
    CLI::App* wkb_solve = wkb->add_subcommand("solve", "solve the hierarchy and assemble at h");
    wkb_solve->set_help_flag("--help", "print help");  // frees -h/--h for the parameter
    WkbCli wkb_opts;
    std::string wkb_csv, wkb_json;
    add_wkb_options(wkb_solve, wkb_opts, /*with_h=*/true);
    wkb_solve->add_option("--csv", wkb_csv, "write phi(z; h) samples to this CSV");
    wkb_solve->add_option("--json", wkb_json, "write the JSON record here (default stdout)");

    // ------------------------------------------------------------ quasimode
    CLI::App* qm = app.add_subcommand("quasimode", "torus quasimode assembly and diagnostics");
    CLI::App* qm_build = qm->add_subcommand("build", "build one quasimode");
    WkbCli qm_opts;
    int qm_k = 16;
    std::string qm_preset = "paper", qm_mode = "geometric";
    double qm_delta = 0.1;
    int qm_ntheta = 0, qm_nx = 0;
    bool qm_dump = false;
    add_wkb_options(qm_build, qm_opts, /*with_h=*/false);
    qm_build->add_option("--k", qm_k, "angular mode number (h = 1/k)");
    qm_build->add_option("--preset", qm_preset, "metric preset or profile CSV path");
    qm_build->add_option("--mode", qm_mode, "potential mode: geometric | toy");
    qm_build->add_option("--delta", qm_delta, "tube exponent for localization");
    qm_build->add_option("--n-theta", qm_ntheta, "override grid size in theta");
    qm_build->add_option("--n-x", qm_nx, "override grid size in x");
    qm_build->add_flag("--dump-field", qm_dump, "also write the field sample CSV");

    CLI::App* qm_sweep = qm->add_subcommand("sweep", "diagnostics over a list of k");
    WkbCli qs_opts;
    std::vector<int> qs_klist = {8, 16, 32, 64};
    std::string qs_preset = "paper", qs_mode = "geometric";
    double qs_delta = 0.1;
    bool qs_dump = false;
    add_wkb_options(qm_sweep, qs_opts, /*with_h=*/false);
    qm_sweep->add_option("--k-list", qs_klist, "ascending mode numbers");
    qm_sweep->add_option("--preset", qs_preset, "metric preset or profile CSV path");
    qm_sweep->add_option("--mode", qs_mode, "potential mode: geometric | toy");
    qm_sweep->add_option("--delta", qs_delta, "tube exponent for localization");
    qm_sweep->add_flag("--dump-fields", qs_dump, "write a field CSV per k");

    // --------------------------------------------------------------- evolve
    CLI::App* ev = app.add_subcommand("evolve", "split-step evolution");
    CLI::App* ev_run = ev->add_subcommand("run", "evolve one quasimode");
    WkbCli ev_opts;
    int ev_k = 16;
    std::string ev_preset = "paper", ev_mode = "geometric", ev_law = "power";
    double ev_tfinal = -1.0, ev_dt = 0.0, ev_delta = 0.1, ev_c0 = 0.1, ev_eps = 0.1;
    int ev_record = 1;
    add_wkb_options(ev_run, ev_opts, /*with_h=*/false);
    ev_run->add_option("--k", ev_k, "angular mode number");
    ev_run->add_option("--preset", ev_preset, "metric preset or profile CSV path");
    ev_run->add_option("--mode", ev_mode, "potential mode: geometric | toy");
    ev_run->add_option("--t-final", ev_tfinal, "final time (default: horizon law)");
    ev_run->add_option("--law", ev_law, "horizon law: power | power-eps | log");
    ev_run->add_option("--c0", ev_c0, "prefactor of the log horizon");
    ev_run->add_option("--eps", ev_eps, "exponent offset of the p=1 horizon");
    ev_run->add_option("--dt", ev_dt, "time step (default 0.1 h^2)");
    ev_run->add_option("--record-every", ev_record, "recording cadence in steps");
    ev_run->add_option("--delta", ev_delta, "tube exponent");

    CLI::App* ev_sweep = ev->add_subcommand("sweep", "horizon sweep over k");
    WkbCli es_opts;
    std::vector<int> es_klist = {8, 16, 32};
    std::string es_preset = "paper", es_mode = "geometric", es_law = "power";
    double es_delta = 0.1, es_c0 = 0.1, es_eps = 0.1;
    add_wkb_options(ev_sweep, es_opts, /*with_h=*/false);
    ev_sweep->add_option("--k-list", es_klist, "ascending mode numbers (>= 3)");
    ev_sweep->add_option("--preset", es_preset, "metric preset or profile CSV path");
    ev_sweep->add_option("--mode", es_mode, "potential mode: geometric | toy");
    ev_sweep->add_option("--law", es_law, "horizon law: power | power-eps | log");
    ev_sweep->add_option("--c0", es_c0, "prefactor of the log horizon");
    ev_sweep->add_option("--eps", es_eps, "exponent offset of the p=1 horizon");
    ev_sweep->add_option("--delta", es_delta, "tube exponent");

    // --------------------------------------------------------------- report
    CLI::App* report = app.add_subcommand("report", "run a named experiment");
    std::string rep_name, rep_config;
    std::vector<std::string> rep_sets;
    report->add_option("--experiment", rep_name, "experiment name")->required();
    report->add_option("--config", rep_config, "key=value config file");
    report->add_option("--set", rep_sets, "override, key=value (repeatable; flags win)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*selftest) {
            auto res = beamlab::run_experiment("oscillator-selftest", beamlab::KeyValueConfig{},
                                               out_root, jobs);
            for (const auto& c : res.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                          << "  measured=" << format_double(c.measured) << " bar "
                          << c.comparator << " " << format_double(c.bar) << "\n";
            std::cout << (res.all_passed ? "selftest: all invariants hold\n"
                                         : "selftest: FAILURES above\n");
            return res.all_passed ? 0 : 1;
        }

        if (*wkb_solve) {
            auto sol = solve_from_cli(wkb_opts, wkb_opts.omega);
            auto beam = beamlab::assemble(sol, wkb_opts.h);
            ordered_json j;
            j["schema_version"] = 1;
            j["q"] = sol.q;
            j["energies"] = sol.energies;
            j["defects"] = sol.defects;
            j["h"] = wkb_opts.h;
            j["energy_h"] = beam.energy;
            j["lambda"] = beam.lambda;
            j["validity_warning"] = beam.validity_warning;
            if (beam.validity_warning)
                std::cerr << "warning: correction energies are not small against E0; "
                             "the expansion may be outside its validity range\n";
            if (wkb_csv.size()) {
                beamlab::OscillatorBasis basis(wkb_opts.omega, wkb_opts.n_max, 4);
                beamlab::CsvWriter csv(wkb_csv, {"z", "phi"});
                const double zmax = 12.0 / std::sqrt(wkb_opts.omega);
                std::vector<double> z(801);
                for (int i = 0; i <= 800; ++i) z[i] = -zmax + 2.0 * zmax * i / 800;
                auto vals = basis.eval_series(beam.coeffs, z);
                for (int i = 0; i <= 800; ++i) csv.row_values({z[i], vals[i]});
            }
            if (wkb_json.size())
                beamlab::write_json_file(wkb_json, j);
            else
                std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*qm_build) {
            const auto profile = beamlab::build_profile(qm_preset);
            const auto sol = solve_from_cli(qm_opts, profile.omega());
            std::optional<beamlab::TorusGrid> grid;
            if (qm_ntheta > 0 && qm_nx > 0) grid = beamlab::TorusGrid{qm_ntheta, qm_nx};
            const auto field = beamlab::build_quasimode(sol, qm_k, profile, grid);
            const auto mode = qm_mode == "geometric" ? beamlab::PotentialMode::geometric
                                                     : beamlab::PotentialMode::toy;
            fs::create_directories(out_root);
            const std::string base = out_root + "/quasimode_k" + std::to_string(qm_k);
            ordered_json j = field_diagnostics_json(field, profile, mode, qm_delta);
            j["schema_version"] = 1;
            beamlab::write_json_file(base + ".json", j);
            if (qm_dump) dump_field_csv(field, base + ".csv");
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*qm_sweep) {
            const auto profile = beamlab::build_profile(qs_preset);
            const auto sol = solve_from_cli(qs_opts, profile.omega());
            const auto mode = qs_mode == "geometric" ? beamlab::PotentialMode::geometric
                                                     : beamlab::PotentialMode::toy;
            fs::create_directories(out_root);
            beamlab::CsvWriter csv(out_root + "/quasimode_sweep.csv",
                                   {"k", "h", "lambda", "residual_l2", "reduced_residual",
                                    "tube_mass_out", "h1_norm", "h2_norm"});
            ordered_json all = ordered_json::array();
            for (int k : qs_klist) {
                const auto field = beamlab::build_quasimode(sol, k, profile);
                ordered_json j = field_diagnostics_json(field, profile, mode, qs_delta);
                csv.row_values({static_cast<double>(k), field.h, field.lambda,
                                j["residual_l2"].get<double>(),
                                j["reduced_residual"].get<double>(),
                                j["tube_mass_out"].get<double>(),
                                j["hr_norms"]["H1"].get<double>(),
                                j["hr_norms"]["H2"].get<double>()});
                if (qs_dump)
                    dump_field_csv(field,
                                   out_root + "/quasimode_k" + std::to_string(k) + ".csv");
                all.push_back(j);
            }
            ordered_json doc;
            doc["schema_version"] = 1;
            doc["points"] = all;
            beamlab::write_json_file(out_root + "/quasimode_sweep.json", doc);
            std::cout << doc.dump(2) << "\n";
            return 0;
        }

        if (*ev_run) {
            const auto profile = beamlab::build_profile(ev_preset);
            const auto sol = solve_from_cli(ev_opts, profile.omega());
            const auto field = beamlab::build_quasimode(sol, ev_k, profile);
            beamlab::EvolveConfig cfg;
            cfg.mode = ev_mode == "geometric" ? beamlab::PotentialMode::geometric
                                              : beamlab::PotentialMode::toy;
            cfg.dt = ev_dt;
            cfg.delta = ev_delta;
            cfg.record_every = ev_record;
            cfg.t_final = ev_tfinal >= 0.0
                              ? ev_tfinal
                              : beamlab::horizon_time(
                                    ev_law == "log"
                                        ? beamlab::HorizonLaw::log
                                        : (ev_law == "power-eps" ? beamlab::HorizonLaw::power_eps
                                                                 : beamlab::HorizonLaw::power),
                                    field.h, sol.p, ev_c0, ev_eps);
            const auto trace = beamlab::run(field, cfg, profile);

            fs::create_directories(out_root);
            const std::string base = out_root + "/evolve_k" + std::to_string(ev_k);
            beamlab::CsvWriter csv(base + "_trace.csv",
                                   {"t", "mass", "tube_mass_out", "dist_to_app", "hkh_norm"});
            for (std::size_t i = 0; i < trace.times.size(); ++i)
                csv.row_values({trace.times[i], trace.mass[i], trace.tube_mass_out[i],
                                trace.dist_to_app[i], trace.hkh_norm[i]});
            ordered_json j;
            j["schema_version"] = 1;
            j["build"] = beamlab::build_description();
            j["k"] = ev_k;
            j["h"] = field.h;
            j["lambda"] = field.lambda;
            j["coupling_effective"] = field.coupling;
            j["p"] = sol.p;
            j["sigma"] = sol.sigma;
            j["N"] = static_cast<int>(sol.energies.size()) - 1;
            j["preset"] = ev_preset;
            j["mode"] = ev_mode;
            j["grid"] = {{"n_theta", field.grid.n_theta}, {"n_x", field.grid.n_x}};
            j["dt"] = cfg.dt == 0.0 ? 0.1 * field.h * field.h : cfg.dt;
            j["t_final"] = cfg.t_final;
            j["record_every"] = cfg.record_every;
            j["delta"] = cfg.delta;
            j["records"] = trace.times.size();
            j["final_dist_to_app"] = trace.dist_to_app.back();
            beamlab::write_json_file(base + "_manifest.json", j);
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*ev_sweep) {
            beamlab::KeyValueConfig cfg;
            cfg.set("preset", es_preset);
            cfg.set("mode", es_mode);
            cfg.set("law", es_law);
            cfg.set("p", format_double(es_opts.p));
            cfg.set("sigma", std::to_string(es_opts.sigma));
            cfg.set("N", std::to_string(es_opts.n_terms));
            cfg.set("n_max", std::to_string(es_opts.n_max));
            cfg.set("delta", format_double(es_delta));
            cfg.set("c0", format_double(es_c0));
            cfg.set("eps", format_double(es_eps));
            std::string klist;
            for (std::size_t i = 0; i < es_klist.size(); ++i)
                klist += (i ? "," : "") + std::to_string(es_klist[i]);
            cfg.set("k_list", klist);
            const auto res = beamlab::run_experiment("evolve-horizon", cfg, out_root, jobs);
            std::cout << res.summary.dump(2) << "\n";
            return res.all_passed ? 0 : 1;
        }

        if (*report) {
            beamlab::KeyValueConfig cfg;
            if (!rep_config.empty()) cfg = beamlab::KeyValueConfig::from_file(rep_config);
            cfg.merge_overrides(rep_sets);
            const auto res = beamlab::run_experiment(rep_name, cfg, out_root, jobs);
            for (const auto& c : res.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
                          << "  measured=" << format_double(c.measured) << " bar "
                          << c.comparator << " " << format_double(c.bar) << "\n";
            return res.all_passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
