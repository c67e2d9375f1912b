// Command-line front end. All user-facing frequencies are in Hz.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "srlaser/analytic.hpp"
#include "srlaser/cumulant.hpp"
#include "srlaser/dicke.hpp"
#include "srlaser/error.hpp"
#include "srlaser/model.hpp"
#include "srlaser/oracle.hpp"
#include "srlaser/spectrum.hpp"
#include "srlaser/sweep.hpp"

using nlohmann::json;

namespace {

struct Shared {
    std::string config;
    std::string preset;
    std::optional<std::int64_t> n;
    std::optional<double> eta_hz;
    std::string out;
    int workers = 1;
    std::string format = "csv";
};

void add_shared(CLI::App* cmd, Shared& s) {
    cmd->add_option("--config", s.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", s.preset, "parameter preset (sr88, sr87)");
    cmd->add_option("--n", s.n, "atom number");
    cmd->add_option("--eta-hz", s.eta_hz, "repumping rate in Hz");
    cmd->add_option("--out", s.out, "output file (default: stdout)");
    cmd->add_option("--workers", s.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--format", s.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
}

json load_config(const Shared& s) {
    if (s.config.empty()) return json::object();
    std::ifstream in(s.config);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw srl::InputError("cannot parse " + s.config + ": " + e.what());
    }
}

/// Flags override the config file, which overrides the defaults.
srl::SystemParams effective_params(const Shared& s, json cfg) {
    srl::SystemParams base;
    if (!s.preset.empty()) {
        base = srl::preset(s.preset);
        cfg.erase("preset");
    }
    srl::SystemParams p = srl::params_from_json(cfg, base);
    if (s.n) p.n_atoms = *s.n;
    if (s.eta_hz) p.eta = srl::hz_to_rad(*s.eta_hz);
    p.validate();
    return p;
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw srl::InputError("cannot write " + path);
            os = &file;
        }
    }
};

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json steady_json(const srl::SystemParams& p, const srl::SteadyState& ss) {
    const auto& st = ss.state;
    const auto dp = srl::dicke_numbers(st, p);
    return {
        {"config", srl::params_to_json(p)},
        {"photon_number", st.photon_number},
        {"atom_photon_re", st.atom_photon.real()},
        {"atom_photon_im", st.atom_photon.imag()},
        {"inversion", st.inversion},
        {"pair_corr_re", st.pair_corr.real()},
        {"pair_corr_im", st.pair_corr.imag()},
        {"j_eff", dp.j_eff},
        {"m_eff", dp.m_eff},
        {"j_over_n", dp.j_over_n},
        {"m_over_n", dp.m_over_n},
        {"regime", srl::to_string(srl::classify_regime(st, p).label)},
        {"residual", ss.residual},
        {"newton_converged", ss.newton_converged},
        {"warning", ss.warning},
        {"method", ss.method},
    };
}

int cmd_presets(const Shared& s) {
    json arr = json::array();
    for (const auto& pr : srl::presets()) {
        json j = srl::params_to_json(pr.params);
        j["name"] = pr.name;
        arr.push_back(j);
    }
    Output out(s.out);
    *out.os << arr.dump(2) << '\n';
    return 0;
}

int cmd_steady(const Shared& s) {
    const auto p = effective_params(s, load_config(s));
    const auto ss = srl::steady_state(p);
    Output out(s.out);
    *out.os << steady_json(p, ss).dump(2) << '\n';
    std::cerr << "steady: N=" << p.n_atoms << " photons=" << ss.state.photon_number
              << " inversion=" << ss.state.inversion << " (" << ss.method << ")\n";
    return 0;
}

int cmd_spectrum(const Shared& s) {
    const auto p = effective_params(s, load_config(s));
    const auto lw = srl::linewidth(p);
    const json fit = {
        {"delta_nu_hz", srl::rad_to_hz(lw.delta_nu)},
        {"center_hz", srl::rad_to_hz(lw.fit.center)},
        {"amplitude", lw.fit.amplitude},
        {"offset", lw.fit.offset},
        {"rms_residual", lw.fit.rms_residual},
        {"beta_hz", srl::rad_to_hz(lw.probe.beta)},
        {"big_g_hz", srl::rad_to_hz(lw.probe.big_g)},
        {"config", srl::params_to_json(p)},
    };
    Output out(s.out);
    if (s.format == "csv") {
        *out.os << "omega_f_hz,intensity\n";
        for (const auto& pt : lw.scan.points) {
            *out.os << srl::format_number(srl::rad_to_hz(pt.omega_f)) << ','
                    << srl::format_number(pt.intensity) << '\n';
        }
    } else {
        for (const auto& pt : lw.scan.points) {
            *out.os << json{{"omega_f_hz", srl::rad_to_hz(pt.omega_f)}, {"intensity", pt.intensity}}
                           .dump()
                    << '\n';
        }
    }
    if (s.out.empty()) {
        std::cerr << fit.dump() << '\n';
    } else {
        std::ofstream(s.out + ".json") << fit.dump(2) << '\n';
    }
    std::cerr << "spectrum: delta_nu = " << srl::rad_to_hz(lw.delta_nu) << " Hz\n";
    return 0;
}

srl::SweepConfig sweep_config(const Shared& s, const json& cfg,
                              const std::vector<std::int64_t>& n_list,
                              const std::optional<double>& eta_min,
                              const std::optional<double>& eta_max, const std::optional<int>& points,
                              const std::string& spacing) {
    srl::SweepConfig sc = srl::sweep_config_from_json(cfg);
    sc.base = effective_params(s, cfg);
    if (!n_list.empty()) {
        sc.n_list = n_list;
    } else if (s.n || !cfg.contains("n_list")) {
        sc.n_list = {sc.base.n_atoms};
    }
    if (eta_min) sc.eta_grid.min_hz = *eta_min;
    if (eta_max) sc.eta_grid.max_hz = *eta_max;
    if (points) sc.eta_grid.points = *points;
    if (!spacing.empty()) {
        sc.eta_grid.spacing = spacing == "linear" ? srl::Spacing::linear : srl::Spacing::log;
    }
    if (s.eta_hz && !eta_min && !eta_max && !cfg.contains("eta_grid")) {
        sc.eta_grid.min_hz = *s.eta_hz;
        sc.eta_grid.max_hz = *s.eta_hz;
    }
    sc.workers = s.workers;
    return sc;
}

void write_rows(std::ostream& os, const std::vector<srl::SweepRow>& rows, const std::string& fmt) {
    if (fmt == "csv") {
        os << srl::kSweepHeader << '\n';
        for (const auto& r : rows) os << srl::to_csv(r) << '\n';
        return;
    }
    for (const auto& r : rows) {
        os << json{{"n_atoms", r.n_atoms},
                   {"eta_hz", r.eta_hz},
                   {"photon_number", r.photon_number},
                   {"inversion", r.inversion},
                   {"pair_corr_re", r.pair_corr_re},
                   {"j_eff", r.j_eff},
                   {"m_eff", r.m_eff},
                   {"j_over_n", r.j_over_n},
                   {"m_over_n", r.m_over_n},
                   {"regime", r.regime},
                   {"delta_nu_hz", optional_json(r.delta_nu_hz)},
                   {"delta_nu_eq3_hz", optional_json(r.delta_nu_eq3_hz)},
                   {"delta_nu_eq4_hz", optional_json(r.delta_nu_eq4_hz)},
                   {"status", r.status}}
                  .dump()
           << '\n';
    }
}

int report_sweep(const srl::SweepSummary& sum) {
    std::size_t bad = 0;
    for (const auto& r : sum.rows) bad += r.status != "ok";
    std::cerr << "sweep: " << sum.rows.size() << " rows (" << sum.computed << " computed, "
              << sum.reused << " reused, " << sum.quarantined << " quarantined, " << bad
              << " failed) in " << sum.wall_seconds << " s\n";
    return bad ? 1 : 0;
}

int cmd_limits(const Shared& s) {
    const auto p = effective_params(s, load_config(s));
    const auto ss = srl::steady_state(p);
    const auto dp = srl::dicke_numbers(ss.state, p);
    const auto in = srl::analytic_inputs(p, dp.m_eff);
    const auto lim = srl::limit_linewidths(in);
    const auto d = srl::derived(p);
    std::optional<double> eq3, eq4;
    try {
        eq3 = srl::rad_to_hz(srl::tieri_linewidth(in, p.eta, p.gamma));
    } catch (const srl::InputError&) {
    }
    try {
        eq4 = srl::rad_to_hz(srl::crossover_linewidth(in));
    } catch (const srl::InputError&) {
    }
    const auto th = srl::collective_threshold(p);
    const json j = {
        {"config", srl::params_to_json(p)},
        {"purcell_hz", srl::rad_to_hz(d.purcell)},
        {"big_gamma_hz", srl::rad_to_hz(d.big_gamma)},
        {"collective_coupling_hz", srl::rad_to_hz(d.collective_coupling)},
        {"n_purcell", srl::rad_to_hz(lim.n_purcell)},
        {"collective_rabi", srl::rad_to_hz(lim.collective_rabi)},
        {"strong_pump", srl::rad_to_hz(lim.strong_pump)},
        {"cavity", srl::rad_to_hz(lim.cavity)},
        {"m_eff", dp.m_eff},
        {"delta_nu_eq3_hz", optional_json(eq3)},
        {"delta_nu_eq4_hz", optional_json(eq4)},
        {"collective_threshold_n", th.n_threshold},
        {"collective_threshold_exceeded", th.exceeded},
        {"units", "Hz"},
    };
    Output out(s.out);
    *out.os << j.dump(2) << '\n';
    return 0;
}

int cmd_oracle_check(const Shared& s, std::uint64_t seed) {
    const auto checks = srl::oracle::run_checks(seed);
    json arr = json::array();
    bool ok = true;
    for (const auto& c : checks) {
        arr.push_back({{"test", c.test},
                       {"max_error", c.max_error},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass}});
        ok = ok && c.pass;
        std::cerr << (c.pass ? "PASS " : "FAIL ") << c.test << " max_error=" << c.max_error << '\n';
    }
    Output out(s.out);
    *out.os << arr.dump(2) << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superradiant laser steady states, spectra and sweeps (frequencies in Hz)"};
    app.require_subcommand(0, 1);
    Shared s;

    auto* presets = app.add_subcommand("presets", "list parameter presets");
    auto* steady = app.add_subcommand("steady", "cumulant steady state as JSON");
    auto* spectrum = app.add_subcommand("spectrum", "filter-cavity spectrum and linewidth");
    auto* sweep = app.add_subcommand("sweep", "(N, eta) grid to CSV with resume");
    auto* dicke_map = app.add_subcommand("dicke-map", "effective J/N and M/N over an eta grid");
    auto* limits = app.add_subcommand("limits", "analytic linewidths as JSON");
    auto* oracle = app.add_subcommand("oracle-check", "exact master-equation cross-checks");
    for (auto* c : {presets, steady, spectrum, sweep, dicke_map, limits, oracle}) add_shared(c, s);

    std::vector<std::int64_t> n_list;
    std::optional<double> eta_min, eta_max;
    std::optional<int> points;
    std::string spacing;
    bool with_linewidth = false;
    bool with_analytic = false;
    for (auto* c : {sweep, dicke_map}) {
        c->add_option("--n-list", n_list, "atom numbers");
        c->add_option("--eta-min-hz", eta_min, "smallest repumping rate");
        c->add_option("--eta-max-hz", eta_max, "largest repumping rate");
        c->add_option("--points", points, "eta grid points");
        c->add_option("--spacing", spacing)->check(CLI::IsMember({"log", "linear"}));
    }
    sweep->add_flag("--linewidth", with_linewidth, "also fit the numeric linewidth");
    sweep->add_flag("--analytic", with_analytic, "also evaluate the closed-form linewidths");
    std::uint64_t seed = 2024;
    oracle->add_option("--seed", seed, "random state seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (presets->parsed()) return cmd_presets(s);
        if (steady->parsed()) return cmd_steady(s);
        if (spectrum->parsed()) return cmd_spectrum(s);
        if (limits->parsed()) return cmd_limits(s);
        if (oracle->parsed()) return cmd_oracle_check(s, seed);
        const json cfg = load_config(s);
        auto sc = sweep_config(s, cfg, n_list, eta_min, eta_max, points, spacing);
        if (sweep->parsed()) {
            sc.observables.linewidth = sc.observables.linewidth || with_linewidth;
            sc.observables.analytic = sc.observables.analytic || with_analytic;
            if (s.out.empty() || s.format == "jsonl") {
                const std::string path = s.out;
                sc.output_path.clear();
                const auto sum = srl::run_grid(sc);
                Output out(path);
                write_rows(*out.os, sum.rows, s.format);
                return report_sweep(sum);
            }
            sc.output_path = s.out;
            return report_sweep(srl::run_grid(sc));
        }
        // dicke-map
        sc.observables = {true, true, false, false};
        sc.output_path.clear();
        const auto sum = srl::run_grid(sc);
        Output out(s.out);
        *out.os << "N,eta_hz,J,M,J_over_N,M_over_N,regime\n";
        for (const auto& r : sum.rows) {
            *out.os << r.n_atoms << ',' << srl::format_number(r.eta_hz) << ','
                    << srl::format_number(r.j_eff) << ',' << srl::format_number(r.m_eff) << ','
                    << srl::format_number(r.j_over_n) << ',' << srl::format_number(r.m_over_n)
                    << ',' << r.regime << '\n';
        }
        return report_sweep(sum);
    } catch (const srl::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const srl::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 1;
    } catch (const srl::FitError& e) {
        std::cerr << "fit error: " << e.what() << '\n';
        return 1;
    }
}
