#include "doctest.h"
#include "helpers.hpp"
#include "srlaser/error.hpp"
#include "srlaser/model.hpp"

using namespace srl;
using testing::rel;

TEST_CASE("presets carry the strontium parameters") {
    const auto a = preset("sr88");
    CHECK(rel(a.gamma, kTwoPi * 7.5e3) < 1e-15);
    CHECK(rel(a.kappa, kTwoPi * 160e3) < 1e-15);
    CHECK(rel(a.g, kTwoPi * 10.6e3) < 1e-15);
    CHECK(a.omega_a == a.omega_c);
    CHECK(a.chi == 0.0);
    CHECK(a.eta == 0.0);
    CHECK(a.n_atoms == 1);

    const auto b = preset("sr87");
    CHECK(rel(b.gamma, kTwoPi * 1e-3) < 1e-15);
    CHECK(rel(b.g, kTwoPi * 2.41) < 1e-15);
    CHECK_THROWS_AS((void)preset("sr86"), InputError);
    CHECK(presets().size() == 2);
}

TEST_CASE("Purcell rates") {
    CHECK(rel(derived(preset("sr88")).purcell, kTwoPi * 2.81e3) < 5e-3);
    // 4 g^2 / kappa = 2 pi * 1.452e-4 Hz
    CHECK(rel(derived(preset("sr87")).purcell, kTwoPi * 1.452e-4) < 1e-3);
    auto p = preset("sr88");
    p.g = 0.0;
    CHECK(derived(p).purcell == 0.0);
}

TEST_CASE("derived rates") {
    SystemParams p;
    p.n_atoms = 9;
    p.kappa = 2.0;
    p.g = 0.5;
    p.gamma = 0.1;
    p.eta = 0.3;
    p.chi = 0.05;
    const auto d = derived(p);
    CHECK(d.purcell == 4.0 * 0.25 / 2.0);
    CHECK(d.big_gamma == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.c_collective == doctest::Approx(9 * 0.5));
    CHECK(*d.d0 == doctest::Approx(0.5));
    CHECK(d.collective_coupling == doctest::Approx(1.5));

    p.eta = 0.0;
    p.gamma = 0.0;
    CHECK_FALSE(derived(p).d0.has_value());

    // Purity: bit-identical on repeat.
    const auto e = derived(p);
    const auto f = derived(p);
    CHECK(e.purcell == f.purcell);
    CHECK(e.big_gamma == f.big_gamma);
    CHECK(e.c_collective == f.c_collective);
}

TEST_CASE("d0 stays in [-1, 1]") {
    for (double eta : {0.0, 1e-3, 1.0, 1e6}) {
        for (double gamma : {0.0, 1e-3, 1.0}) {
            if (eta + gamma == 0.0) continue;
            SystemParams p;
            p.eta = eta;
            p.gamma = gamma;
            const double d0 = *derived(p).d0;
            CHECK(d0 >= -1.0);
            CHECK(d0 <= 1.0);
        }
    }
}

TEST_CASE("validation") {
    SystemParams p;
    CHECK_NOTHROW(p.validate());
    p.kappa = -1.0;
    CHECK_THROWS_AS(p.validate(), InputError);
    p.kappa = 1.0;
    p.n_atoms = 0;
    CHECK_THROWS_AS(p.validate(), InputError);
    p.n_atoms = 1;
    p.eta = std::nan("");
    CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("Hz round trip at 12 significant digits") {
    for (double f : {1e-3, 2.41, 7.5e3, 23.87e3, 160e3, 1.234567890123e7}) {
        const auto p = params_from_json({{"kappa_hz", f}, {"eta_hz", f}});
        CHECK(p.kappa == kTwoPi * f);
        const auto back = params_to_json(p);
        CHECK(rel(back["kappa_hz"].get<double>(), f) < 1e-12);
        CHECK(rel(back["eta_hz"].get<double>(), f) < 1e-12);
    }
}

TEST_CASE("JSON config overrides the preset") {
    const auto p = params_from_json(
        {{"preset", "sr88"}, {"n_atoms", 1000}, {"eta_hz", 1e4}, {"g_hz", 5e3}, {"detuning_hz", 100.0}});
    CHECK(p.n_atoms == 1000);
    CHECK(p.eta == kTwoPi * 1e4);
    CHECK(p.g == kTwoPi * 5e3);
    CHECK(p.kappa == preset("sr88").kappa);
    CHECK(rel(p.detuning(), kTwoPi * 100.0) < 1e-15);
    CHECK_THROWS_AS((void)params_from_json({{"n_atoms", "many"}}), InputError);
    CHECK_THROWS_AS((void)params_from_json(nlohmann::json::array()), InputError);
    CHECK_THROWS_AS((void)params_from_json({{"preset", "sr86"}}), InputError);
    CHECK(kEtaExpHz == 23.87e3);
}
