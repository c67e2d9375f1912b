#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "srlaser/error.hpp"
#include "srlaser/sweep.hpp"

using namespace srl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "srlaser_sweep_tests";
    fs::create_directories(dir);
    const auto p = dir / name;
    fs::remove(p);
    fs::remove(p.string() + ".json");
    fs::remove(p.string() + ".quarantine");
    return p;
}

SweepConfig small_grid(const std::string& out) {
    SweepConfig cfg;
    cfg.base = preset("sr88");
    cfg.n_list = {100, 1000};
    cfg.eta_grid = {1e2, 1e6, 12, Spacing::log};
    cfg.observables.analytic = true;
    cfg.output_path = out;
    return cfg;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(1.0) == "1.00000000e+00");
    CHECK(format_number(-2.5e-7) == "-2.50000000e-07");
    CHECK(format_number(123456789.0) == "1.23456789e+08");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("CSV row round trip") {
    SweepRow r;
    r.n_atoms = 1000;
    r.eta_hz = 7.5e4;
    r.photon_number = 12.5;
    r.regime = "superradiant_lasing";
    r.delta_nu_eq4_hz = 3.25;
    const auto back = parse_csv_row(to_csv(r));
    CHECK(to_csv(back) == to_csv(r));
    CHECK_FALSE(back.delta_nu_hz.has_value());
    CHECK(*back.delta_nu_eq4_hz == 3.25);
    CHECK_THROWS_AS((void)parse_csv_row("1,2,3"), InputError);
    CHECK_THROWS_AS((void)parse_csv_row(to_csv(r).substr(0, 40) + "x,,,,,,,,,,ok"), InputError);
}

TEST_CASE("eta grid") {
    EtaGrid g{1.0, 1000.0, 4, Spacing::log};
    const auto v = g.values_hz();
    REQUIRE(v.size() == 4);
    CHECK(v[1] == doctest::Approx(10.0));
    CHECK(v[3] == 1000.0);
    CHECK(EtaGrid{0.0, 10.0, 3, Spacing::linear}.values_hz()[1] == 5.0);
    CHECK_THROWS_AS((EtaGrid{0.0, 10.0, 3, Spacing::log}.validate()), InputError);
    CHECK_THROWS_AS((EtaGrid{1.0, 10.0, 1, Spacing::log}.validate()), InputError);
    CHECK_THROWS_AS((EtaGrid{10.0, 1.0, 3, Spacing::linear}.validate()), InputError);
}

TEST_CASE("single decoupled cell") {
    SweepConfig cfg;
    cfg.base.kappa = 1.0;
    cfg.base.gamma = kTwoPi * 1.0;
    cfg.n_list = {5};
    cfg.eta_grid = {3.0, 3.0, 2, Spacing::linear};
    const auto sum = run_grid(cfg);
    REQUIRE(sum.rows.size() == 2);
    CHECK(sum.rows[0].inversion == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sum.rows[0].photon_number == 0.0);
    CHECK(sum.rows[0].status == "ok");
}

TEST_CASE("rows are sorted and deterministic across worker counts") {
    const auto a = scratch("w1.csv");
    const auto b = scratch("w3.csv");
    auto cfg = small_grid(a.string());
    cfg.workers = 1;
    const auto s1 = run_grid(cfg);
    cfg.output_path = b.string();
    cfg.workers = 3;
    (void)run_grid(cfg);
    CHECK(slurp(a) == slurp(b));
    const auto ls = lines(slurp(a));
    REQUIRE(ls.size() == 25);
    CHECK(ls[0] == kSweepHeader);
    for (std::size_t k = 1; k < s1.rows.size(); ++k) {
        const auto& x = s1.rows[k - 1];
        const auto& y = s1.rows[k];
        CHECK((x.n_atoms < y.n_atoms || (x.n_atoms == y.n_atoms && x.eta_hz < y.eta_hz)));
    }
    for (const auto& r : s1.rows) {
        CHECK(r.status == "ok");
        CHECK(r.j_over_n <= 0.5 + 1e-6);
        CHECK(std::abs(r.m_over_n) <= 0.5 + 1e-6);
    }

    const auto side = nlohmann::json::parse(slurp(a.string() + ".json"));
    CHECK(side["config_hash"] == config_hash(cfg));
    CHECK(side["code_version"] == kCodeVersion);
    CHECK(side.contains("wall_seconds"));
}

TEST_CASE("resume recomputes exactly the missing cells") {
    const auto path = scratch("resume.csv");
    auto cfg = small_grid(path.string());
    const auto first = run_grid(cfg);
    CHECK(first.computed == 24);
    const auto full = slurp(path);

    // Complete file: nothing to do.
    const auto again = run_grid(cfg);
    CHECK(again.computed == 0);
    CHECK(again.reused == 24);
    CHECK(slurp(path) == full);

    // Drop the last ten rows.
    auto ls = lines(full);
    {
        std::ofstream out(path, std::ios::trunc);
        for (std::size_t k = 0; k + 10 < ls.size(); ++k) out << ls[k] << '\n';
    }
    const auto partial = run_grid(cfg);
    CHECK(partial.computed == 10);
    CHECK(partial.reused == 14);
    CHECK(slurp(path) == full);

    // Corrupt lines go to the quarantine file and are recomputed.
    {
        std::ofstream out(path, std::ios::trunc);
        out << ls[0] << '\n' << "garbage,row\n";
        for (std::size_t k = 2; k < ls.size(); ++k) out << ls[k] << '\n';
    }
    const auto healed = run_grid(cfg);
    CHECK(healed.quarantined == 1);
    CHECK(healed.computed == 1);
    CHECK(slurp(path) == full);
    CHECK(slurp(path.string() + ".quarantine") == "garbage,row\n");

    // Empty file: full run.
    { std::ofstream out(path, std::ios::trunc); }
    CHECK(run_grid(cfg).computed == 24);
    CHECK(slurp(path) == full);
}

TEST_CASE("unwritable output fails before any computation") {
    auto cfg = small_grid("/nonexistent-dir/for/sure/out.csv");
    CHECK_THROWS_AS((void)run_grid(cfg), InputError);
}

TEST_CASE("config JSON") {
    const auto cfg = sweep_config_from_json({{"preset", "sr88"},
                                             {"n_list", {100, 1000}},
                                             {"eta_grid", {{"min_hz", 10.0}, {"max_hz", 1e5}, {"points", 5}}},
                                             {"observables", {{"linewidth", true}}},
                                             {"workers", 4}});
    CHECK(cfg.n_list == std::vector<std::int64_t>{100, 1000});
    CHECK(cfg.eta_grid.points == 5);
    CHECK(cfg.observables.linewidth);
    CHECK(cfg.workers == 4);
    auto other = cfg;
    other.workers = 1;
    CHECK(config_hash(other) == config_hash(cfg));
    other.eta_grid.points = 6;
    CHECK(config_hash(other) != config_hash(cfg));
    CHECK_THROWS_AS((void)sweep_config_from_json({{"eta_grid", {{"spacing", "cubic"}}}}), InputError);
}

TEST_CASE("cells with linewidths") {
    const auto p = preset("sr88");
    const auto row = evaluate_cell(p, 100, 10.0 * rad_to_hz(p.gamma), {true, true, true, true});
    CHECK(row.status == "ok");
    REQUIRE(row.delta_nu_hz.has_value());
    REQUIRE(row.delta_nu_eq4_hz.has_value());
    CHECK(*row.delta_nu_hz > 0.0);
}
