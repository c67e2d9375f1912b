#include "srlaser/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "srlaser/analytic.hpp"
#include "srlaser/cumulant.hpp"
#include "srlaser/dicke.hpp"
#include "srlaser/error.hpp"
#include "srlaser/spectrum.hpp"

namespace srl {

namespace {

using Key = std::pair<std::int64_t, std::string>;

Key key_of(std::int64_t n, double eta_hz) { return {n, format_number(eta_hz)}; }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError("bad number '" + s + "'");
    }
    return v;
}

std::optional<double> parse_optional(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return parse_double(s);
}

std::string format_optional(const std::optional<double>& x) {
    return x ? format_number(*x) : std::string{};
}

bool row_less(const SweepRow& a, const SweepRow& b) {
    if (a.n_atoms != b.n_atoms) return a.n_atoms < b.n_atoms;
    return a.eta_hz < b.eta_hz;
}

void write_rows(const std::string& path, std::vector<SweepRow> rows) {
    std::sort(rows.begin(), rows.end(), row_less);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp);
        out << kSweepHeader << '\n';
        for (const auto& r : rows) out << to_csv(r) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

void EtaGrid::validate() const {
    if (points < 2) throw InputError("eta grid needs at least 2 points");
    if (!std::isfinite(min_hz) || !std::isfinite(max_hz) || min_hz > max_hz) {
        throw InputError("eta grid needs finite min <= max");
    }
    if (min_hz < 0.0) throw InputError("eta grid must be non-negative");
    if (spacing == Spacing::log && min_hz <= 0.0) {
        throw InputError("log eta grid needs min > 0");
    }
}

std::vector<double> EtaGrid::values_hz() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / (points - 1);
        out[static_cast<std::size_t>(k)] =
            spacing == Spacing::log ? min_hz * std::pow(max_hz / min_hz, t)
                                    : min_hz + (max_hz - min_hz) * t;
    }
    out.back() = max_hz;
    return out;
}

void SweepConfig::validate() const {
    base.validate();
    eta_grid.validate();
    if (n_list.empty()) throw InputError("sweep needs at least one atom number");
    for (auto n : n_list) {
        if (n < 1) throw InputError("atom numbers must be >= 1");
    }
    if (workers < 1) throw InputError("workers must be >= 1");
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 8);
    return {buf, res.ptr};
}

std::string to_csv(const SweepRow& r) {
    std::string s = std::to_string(r.n_atoms);
    for (double v : {r.eta_hz, r.photon_number, r.inversion, r.pair_corr_re, r.j_eff, r.m_eff,
                     r.j_over_n, r.m_over_n}) {
        s += ',';
        s += format_number(v);
    }
    s += ',' + r.regime;
    s += ',' + format_optional(r.delta_nu_hz);
    s += ',' + format_optional(r.delta_nu_eq3_hz);
    s += ',' + format_optional(r.delta_nu_eq4_hz);
    s += ',' + r.status;
    return s;
}

SweepRow parse_csv_row(const std::string& line) {
    const auto f = split(line);
    if (f.size() != 14) throw InputError("expected 14 fields");
    SweepRow r;
    std::int64_t n = 0;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), n);
    if (ec != std::errc{} || ptr != f[0].data() + f[0].size() || n < 1) {
        throw InputError("bad atom number");
    }
    r.n_atoms = n;
    r.eta_hz = parse_double(f[1]);
    r.photon_number = parse_double(f[2]);
    r.inversion = parse_double(f[3]);
    r.pair_corr_re = parse_double(f[4]);
    r.j_eff = parse_double(f[5]);
    r.m_eff = parse_double(f[6]);
    r.j_over_n = parse_double(f[7]);
    r.m_over_n = parse_double(f[8]);
    r.regime = f[9];
    r.delta_nu_hz = parse_optional(f[10]);
    r.delta_nu_eq3_hz = parse_optional(f[11]);
    r.delta_nu_eq4_hz = parse_optional(f[12]);
    r.status = f[13];
    if (r.status != "ok" && r.status != "solver_error" && r.status != "fit_error") {
        throw InputError("bad status");
    }
    return r;
}

SweepRow evaluate_cell(const SystemParams& base, std::int64_t n_atoms, double eta_hz,
                       const Observables& obs) {
    SystemParams p = base;
    p.n_atoms = n_atoms;
    p.eta = hz_to_rad(eta_hz);
    SweepRow row;
    row.n_atoms = n_atoms;
    row.eta_hz = eta_hz;
    const double nan = std::nan("");

    SteadyState ss;
    try {
        ss = steady_state(p);
    } catch (const SolverError&) {
        row.photon_number = row.inversion = row.pair_corr_re = nan;
        row.j_eff = row.m_eff = row.j_over_n = row.m_over_n = nan;
        row.regime = "unknown";
        row.status = "solver_error";
        return row;
    }
    const auto& st = ss.state;
    row.photon_number = st.photon_number;
    row.inversion = st.inversion;
    row.pair_corr_re = st.pair_corr.real();
    const DickePoint dp = dicke_numbers(st, p);
    row.j_eff = dp.j_eff;
    row.m_eff = dp.m_eff;
    row.j_over_n = dp.j_over_n;
    row.m_over_n = dp.m_over_n;
    row.regime = to_string(classify_regime(st, p).label);
    (void)obs.photons;
    (void)obs.dicke;

    if (obs.analytic) {
        const auto in = analytic_inputs(p, dp.m_eff);
        // Both expressions have restricted domains; outside them the field stays empty.
        try {
            row.delta_nu_eq3_hz = rad_to_hz(tieri_linewidth(in, p.eta, p.gamma));
        } catch (const InputError&) {
        }
        try {
            row.delta_nu_eq4_hz = rad_to_hz(crossover_linewidth(in));
        } catch (const InputError&) {
        }
    }
    if (obs.linewidth) {
        try {
            row.delta_nu_hz = rad_to_hz(linewidth(p, ss).delta_nu);
        } catch (const FitError&) {
            row.status = "fit_error";
        } catch (const SolverError&) {
            row.status = "solver_error";
        }
    }
    return row;
}

Checkpoint load_checkpoint(const std::string& path) {
    Checkpoint cp;
    std::ifstream in(path);
    if (!in) return cp;
    std::string line;
    std::ofstream quarantine;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line == kSweepHeader) continue;
        }
        if (line.empty()) continue;
        try {
            cp.rows.push_back(parse_csv_row(line));
        } catch (const InputError&) {
            if (!quarantine.is_open()) quarantine.open(path + ".quarantine", std::ios::app);
            quarantine << line << '\n';
            ++cp.quarantined;
        }
    }
    return cp;
}

SweepSummary run_grid(const SweepConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const bool persist = !cfg.output_path.empty();
    if (persist) {
        std::ofstream probe(cfg.output_path, std::ios::app);
        if (!probe) throw InputError("output path not writable: " + cfg.output_path);
    }

    const auto etas = cfg.eta_grid.values_hz();
    std::map<Key, SweepRow> done;
    SweepSummary summary;
    if (persist) {
        auto cp = load_checkpoint(cfg.output_path);
        summary.quarantined = cp.quarantined;
        for (auto& r : cp.rows) {
            if (r.status == "ok") done.emplace(key_of(r.n_atoms, r.eta_hz), std::move(r));
        }
    }

    std::vector<std::pair<std::int64_t, double>> todo;
    std::vector<SweepRow> rows;
    for (auto n : cfg.n_list) {
        for (double eta : etas) {
            auto it = done.find(key_of(n, eta));
            if (it != done.end()) {
                rows.push_back(it->second);
            } else {
                todo.emplace_back(n, eta);
            }
        }
    }
    summary.reused = rows.size();
    if (persist) write_rows(cfg.output_path, rows);

    std::mutex mu;
    std::ofstream appender;
    if (persist) appender.open(cfg.output_path, std::ios::app);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) {
            SweepRow r = evaluate_cell(cfg.base, todo[i].first, todo[i].second, cfg.observables);
            std::lock_guard lock(mu);
            if (persist) appender << to_csv(r) << '\n' << std::flush;
            rows.push_back(std::move(r));
        }
    };
    const int nthreads = std::min<int>(cfg.workers, std::max<std::size_t>(1, todo.size()));
    std::vector<std::thread> pool;
    for (int k = 1; k < nthreads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (persist) appender.close();

    std::sort(rows.begin(), rows.end(), row_less);
    summary.computed = todo.size();
    summary.rows = std::move(rows);
    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (persist) {
        write_rows(cfg.output_path, summary.rows);
        nlohmann::json side;
        side["config"] = sweep_config_to_json(cfg);
        side["config_hash"] = config_hash(cfg);
        side["code_version"] = kCodeVersion;
        side["schema"] = kSweepHeader;
        side["wall_seconds"] = summary.wall_seconds;
        side["computed"] = summary.computed;
        side["reused"] = summary.reused;
        side["quarantined"] = summary.quarantined;
        std::ofstream(cfg.output_path + ".json") << side.dump(2) << '\n';
    }
    return summary;
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    SweepConfig cfg;
    cfg.base = params_from_json(j);
    if (j.contains("n_list")) {
        cfg.n_list = j.at("n_list").get<std::vector<std::int64_t>>();
    } else {
        cfg.n_list = {cfg.base.n_atoms};
    }
    if (j.contains("eta_grid")) {
        const auto& g = j.at("eta_grid");
        cfg.eta_grid.min_hz = g.value("min_hz", cfg.eta_grid.min_hz);
        cfg.eta_grid.max_hz = g.value("max_hz", cfg.eta_grid.max_hz);
        cfg.eta_grid.points = g.value("points", cfg.eta_grid.points);
        const auto sp = g.value("spacing", std::string{"log"});
        if (sp == "log") {
            cfg.eta_grid.spacing = Spacing::log;
        } else if (sp == "linear") {
            cfg.eta_grid.spacing = Spacing::linear;
        } else {
            throw InputError("eta_grid.spacing must be log or linear");
        }
    }
    if (j.contains("observables")) {
        const auto& o = j.at("observables");
        cfg.observables.photons = o.value("photons", cfg.observables.photons);
        cfg.observables.dicke = o.value("dicke", cfg.observables.dicke);
        cfg.observables.linewidth = o.value("linewidth", cfg.observables.linewidth);
        cfg.observables.analytic = o.value("analytic", cfg.observables.analytic);
    }
    cfg.output_path = j.value("output_path", cfg.output_path);
    cfg.workers = j.value("workers", cfg.workers);
    return cfg;
}

nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
    nlohmann::json j = params_to_json(cfg.base);
    j["n_list"] = cfg.n_list;
    j["eta_grid"] = {{"min_hz", cfg.eta_grid.min_hz},
                     {"max_hz", cfg.eta_grid.max_hz},
                     {"points", cfg.eta_grid.points},
                     {"spacing", cfg.eta_grid.spacing == Spacing::log ? "log" : "linear"}};
    j["observables"] = {{"photons", cfg.observables.photons},
                        {"dicke", cfg.observables.dicke},
                        {"linewidth", cfg.observables.linewidth},
                        {"analytic", cfg.observables.analytic}};
    return j;
}

std::string config_hash(const SweepConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(sweep_config_to_json(cfg).dump())));
    return buf;
}

}  // namespace srl
