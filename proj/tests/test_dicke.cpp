#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "srlaser/cumulant.hpp"
#include "srlaser/dicke.hpp"
#include "srlaser/error.hpp"

using namespace srl;
using testing::rel;

TEST_CASE("Dicke numbers of pure symmetric states") {
    SystemParams p;
    p.n_atoms = 4;
    const auto ground = dicke_numbers({0.0, 0.0, -1.0, 0.0}, p);
    CHECK(ground.j_squared == doctest::Approx(6.0));
    CHECK(ground.j_eff == doctest::Approx(2.0));
    CHECK(ground.m_eff == doctest::Approx(-2.0));
    CHECK(ground.j_over_n == doctest::Approx(0.5));
    CHECK(ground.m_over_n == doctest::Approx(-0.5));

    const auto top = dicke_numbers({0.0, 0.0, 1.0, 0.0}, p);
    CHECK(top.j_eff == doctest::Approx(2.0));
    CHECK(top.m_eff == doctest::Approx(2.0));
}

TEST_CASE("N = 2 triplet |1,0>") {
    SystemParams p;
    p.n_atoms = 2;
    const auto d = dicke_numbers({0.0, 0.0, 0.0, cplx{0.5, 0.0}}, p, -1.0);
    CHECK(d.j_squared == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d.j_eff == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.m_eff == 0.0);
}

TEST_CASE("negative <J^2> is clamped and flagged") {
    SystemParams p;
    p.n_atoms = 100;
    const auto d = dicke_numbers({0.0, 0.0, 0.0, cplx{-0.5, 0.0}}, p, 0.0);
    CHECK(d.clamped);
    CHECK(d.j_eff == 0.0);
}

TEST_CASE("lowering amplitude") {
    CHECK(lowering_amplitude(3.5, -3.5) == 0.0);
    CHECK(lowering_amplitude(1.0, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(lowering_amplitude(50.0, 0.0) == doctest::Approx(std::sqrt(51.0 * 50.0)));
    CHECK(lowering_amplitude(500.0, 0.0) / lowering_amplitude(50.0, 0.0) ==
          doctest::Approx(10.0).epsilon(0.01));
    CHECK_THROWS_AS((void)lowering_amplitude(1.0, 2.0), InputError);
    CHECK_THROWS_AS((void)lowering_amplitude(1.0, -1.5), InputError);
}

TEST_CASE("pump branching examples") {
    const double eta = 2.0;
    auto r = pump_branching(4, 2.0, -2.0, eta);
    CHECK(r.up_in_j == doctest::Approx(eta));
    CHECK(r.down_j == doctest::Approx(3.0 * eta));
    CHECK(r.up_j == 0.0);

    r = pump_branching(4, 1.0, 1.0, eta);
    CHECK(r.up_in_j == 0.0);
    CHECK(r.down_j == 0.0);
    CHECK(r.up_j == doctest::Approx(eta));

    r = pump_branching(4, 1.0, -1.0, eta);
    CHECK(r.up_in_j == doctest::Approx(1.5 * eta));
    CHECK(r.down_j == doctest::Approx(4.0 / 3.0 * eta));
    CHECK(r.up_j == doctest::Approx(eta / 6.0));
    CHECK(r.total() == doctest::Approx(3.0 * eta));

    r = pump_branching(2, 0.0, 0.0, eta);
    CHECK(r.up_in_j == 0.0);
    CHECK(r.down_j == 0.0);
    CHECK(r.up_j == doctest::Approx(eta));

    CHECK_THROWS_AS((void)pump_branching(4, 3.0, 0.0, eta), InputError);
    CHECK_THROWS_AS((void)pump_branching(4, 1.0, 2.0, eta), InputError);
    CHECK_THROWS_AS((void)pump_branching(4, 1.0, 0.5, eta), InputError);
}

TEST_CASE("pump branching sum rule and boundary zeros, N <= 20") {
    const double eta = 1.7;
    for (long n = 1; n <= 20; ++n) {
        for (double j = 0.5 * n; j >= 0.0; j -= 1.0) {
            for (double m = -j; m <= j + 1e-9; m += 1.0) {
                const auto r = pump_branching(n, j, m, eta);
                const double want = eta * (0.5 * n - m);
                CHECK(std::abs(r.total() - want) <= 1e-12 * want);
                CHECK(r.up_in_j >= 0.0);
                CHECK(r.down_j >= 0.0);
                CHECK(r.up_j >= 0.0);
                if (m == j || m == j - 1.0) CHECK(r.down_j == 0.0);
                if (m == j) CHECK(r.up_in_j == 0.0);
                if (j == 0.5 * n) CHECK(r.up_j == 0.0);
            }
        }
    }
}

TEST_CASE("regime classification") {
    auto p = testing::sr88(100, 0.0);
    p.eta = derived(p).purcell / 10.0;
    CHECK(classify_regime(steady_state(p).state, p).label == RegimeLabel::subradiant);

    p.eta = 2.0 * derived(p).purcell;
    const auto weak = steady_state(p);
    CHECK(weak.state.photon_number < 1.0);
    CHECK(classify_regime(weak.state, p).label == RegimeLabel::superradiant);

    auto q = testing::sr88(100000, 0.0);
    q.eta = hz_to_rad(kEtaExpHz);
    const auto reg = classify_regime(steady_state(q).state, q);
    CHECK(reg.label == RegimeLabel::superradiant_lasing);
    CHECK(to_string(reg.label) == "superradiant_lasing");
    CHECK(reg.purcell == derived(q).purcell);

    // Strong photons with eta <= gamma.
    auto r = testing::sr88(100, 0.5);
    CHECK(classify_regime({5.0, 0.0, 0.0, 0.0}, r).label == RegimeLabel::conventional_like);
    CHECK(to_string(RegimeLabel::conventional_like) == "conventional-like");

    CHECK_THROWS((void)classify_regime({std::nan(""), 0.0, 0.0, 0.0}, r));
}

TEST_CASE("collective coupling threshold") {
    CHECK(rel(collective_threshold(preset("sr87")).n_threshold, 4.4e9) < 0.01);
    CHECK(collective_threshold(preset("sr88")).n_threshold ==
          doctest::Approx(std::pow(160.0 / 10.6, 2)));
    SystemParams p;
    p.kappa = 1.0;
    p.g = 1.0;
    p.n_atoms = 2;
    const auto t = collective_threshold(p);
    CHECK(t.n_threshold == doctest::Approx(1.0));
    CHECK(t.exceeded);
    p.g = 0.0;
    const auto z = collective_threshold(p);
    CHECK(std::isinf(z.n_threshold));
    CHECK_FALSE(z.exceeded);
}

TEST_CASE("Fig. 2 caption bounds on solved states") {
    for (std::int64_t n : {100, 1000, 10000}) {
        for (double ratio : {0.01, 0.3, 1.0, 10.0, 100.0, 1000.0}) {
            const auto p = testing::sr88(n, ratio);
            const auto d = dicke_numbers(steady_state(p).state, p);
            CHECK(d.j_over_n >= 0.0);
            CHECK(d.j_over_n <= 0.5 + 1e-6);
            CHECK(std::abs(d.m_over_n) <= 0.5 + 1e-6);
            CHECK(std::abs(d.m_eff) <= d.j_eff + 1e-6 * n);
        }
    }
}
