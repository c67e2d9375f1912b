#include <bit>

#include "doctest.h"
#include "helpers.hpp"
#include "srlaser/dicke.hpp"
#include "srlaser/error.hpp"
#include "srlaser/oracle.hpp"

using namespace srl;
using namespace srl::oracle;
using testing::rel;

namespace {

/// Symmetric Dicke state |N/2, M> with the cavity in vacuum.
DenseOperator dicke_state(const Space& space, int excitations) {
    const int fock = space.n_max + 1;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.dim());
    for (int bits = 0; bits < (1 << space.n_atoms); ++bits) {
        // Atom 0 is the most significant bit of the basis index.
        if (std::popcount(static_cast<unsigned>(bits)) == excitations) psi[bits * fock] = 1.0;
    }
    psi.normalize();
    return psi * psi.adjoint();
}

double max_trace_column_sum(const SparseOperator& l, int d) {
    double worst = 0.0;
    for (int col = 0; col < l.outerSize(); ++col) {
        cplx s{};
        for (SparseOperator::InnerIterator it(l, col); it; ++it) {
            if (it.row() % d == it.row() / d) s += it.value();
        }
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

}  // namespace

TEST_CASE("pure decay has the ground state as its fixed point") {
    SystemParams p;
    p.gamma = 1.0;
    const auto l = build_liouvillian(p, 0);
    REQUIRE(l.rows() == 4);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(4);
    g[0] = 1.0;
    CHECK((l * g).norm() < 1e-15);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(4);
    e[3] = 1.0;
    CHECK((l * e).norm() > 0.5);
}

TEST_CASE("rate balance of the excited population") {
    SystemParams p;
    p.kappa = 1.0;
    p.gamma = 0.3;
    p.eta = 0.6;
    const auto r = oracle_steady_state(p, 1);
    CHECK(0.5 * (1.0 + r.moments.inversion) == doctest::Approx(0.6 / 0.9).epsilon(1e-12));
}

TEST_CASE("trace preservation of the Liouvillian") {
    auto p = testing::desk(3);
    p.chi = 0.03;
    p.omega_a = 0.2;
    const Space space{3, 4, {}};
    const auto l = build_liouvillian(build_model(p, space));
    CHECK(max_trace_column_sum(l, space.dim()) < 1e-12);

    const Space with_filter{2, 3, 3};
    const auto lf = build_liouvillian(build_model(p, with_filter, FilterProbe{0.1, 0.2, 0.3}));
    CHECK(max_trace_column_sum(lf, with_filter.dim()) < 1e-12);
}

TEST_CASE("memory budget") {
    SystemParams p;
    p.n_atoms = 6;
    p.kappa = 1.0;
    CHECK_NOTHROW((void)build_liouvillian(p, 15));
    CHECK_THROWS_AS((void)build_liouvillian(p, 16), InputError);
    CHECK_THROWS_AS((void)build_liouvillian(p, -1), InputError);
}

TEST_CASE("uncoupled atoms have no pair correlation") {
    SystemParams p;
    p.n_atoms = 2;
    p.kappa = 1.0;
    p.gamma = 0.2;
    p.eta = 0.5;
    const auto r = oracle_steady_state(p, 1);
    CHECK(std::abs(r.moments.pair_corr) < 1e-14);
    CHECK(r.moments.photon_number < 1e-14);
}

TEST_CASE("desk steady state: validity and cumulant comparison") {
    const auto p = testing::desk(4);
    const auto r = oracle_steady_state(p, 6);
    CHECK(r.trace_error < 1e-10);
    CHECK(r.hermiticity_error < 1e-10);
    CHECK(r.min_eigenvalue >= -1e-8);
    CHECK(r.cutoff_drift < 1e-6);
    CHECK(r.residual < 1e-10);

    const auto model = build_model(p, Space{4, r.n_max, {}});
    const auto d = moment_derivatives(model, r.rho_ss);
    CHECK(std::abs(d.photon_number) < 1e-9);
    CHECK(std::abs(d.atom_photon) < 1e-9);
    CHECK(std::abs(d.inversion) < 1e-9);
    CHECK(std::abs(d.pair_corr) < 1e-9);

    const auto ss = steady_state(p);
    CHECK(rel(ss.state.photon_number, r.moments.photon_number) < 0.2);

    // All atoms and pairs are equivalent in the exact steady state.
    for (double s : r.moments.inversion_per_atom) CHECK(std::abs(s - r.moments.inversion) < 1e-10);
    for (auto c : r.moments.pair_corr_per_pair) CHECK(std::abs(c - r.moments.pair_corr) < 1e-10);
}

TEST_CASE("cutoff drift decreases with n_max") {
    auto p = testing::desk(2);
    double prev = 1.0;
    double prev_n = 0.0;
    for (int n_max : {2, 4, 6, 8}) {
        const auto r = steady_state_at_cutoff(p, n_max);
        const double drift = std::abs(r.moments.photon_number - prev_n);
        if (n_max > 2) CHECK(drift < prev);
        prev = drift;
        prev_n = r.moments.photon_number;
    }
}

TEST_CASE("derivative of the inversion in the vacuum ground state") {
    auto p = testing::desk(3);
    const Space space{3, 3, {}};
    const auto model = build_model(p, space);
    DenseOperator rho = DenseOperator::Zero(space.dim(), space.dim());
    rho(0, 0) = 1.0;
    CHECK(moment_derivatives(model, rho).inversion == doctest::Approx(2.0 * p.eta));

    DenseOperator wrong = DenseOperator::Identity(3, 3);
    CHECK_THROWS_AS((void)moment_derivatives(model, wrong), InputError);
}

TEST_CASE("derivative-match suite") {
    for (const auto& c : run_checks()) {
        CAPTURE(c.test);
        CAPTURE(c.max_error);
        CHECK(c.pass);
    }
}

TEST_CASE("coherence damping equals half of eta + gamma + 2 chi") {
    SystemParams p;
    p.kappa = 1.0;
    p.gamma = 0.1;
    p.eta = 0.2;
    p.chi = 0.15;
    const Space space{1, 0, {}};
    const auto model = build_model(p, space);
    const auto l = build_liouvillian(model);
    DenseOperator rho(2, 2);
    rho << 0.5, 0.5, 0.5, 0.5;
    const double t = 2.0;
    const auto rt = propagate(l, rho, t);
    const double coherence = std::abs(rt(0, 1));
    const double big_gamma = p.gamma + p.eta + 2.0 * p.chi;
    CHECK(coherence == doctest::Approx(0.5 * std::exp(-0.5 * big_gamma * t)).epsilon(1e-10));
}

TEST_CASE("propagation keeps trace, Hermiticity and permutation symmetry") {
    auto p = testing::desk(3);
    p.chi = 0.02;
    const Space space{3, 4, {}};
    const auto model = build_model(p, space);
    const auto l = build_liouvillian(model);
    const auto rho0 = random_product_state(space, 99);
    for (double t : {0.5, 3.0}) {
        const auto rt = propagate(l, rho0, t);
        CHECK(std::abs(rt.trace() - 1.0) < 1e-9);
        CHECK((rt - rt.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
        const auto m = expectation_values(model.ops, rt);
        for (double s : m.inversion_per_atom) CHECK(std::abs(s - m.inversion) < 1e-10);
        for (auto c : m.atom_photon_per_atom) CHECK(std::abs(c - m.atom_photon) < 1e-10);
        for (auto c : m.pair_corr_per_pair) CHECK(std::abs(c - m.pair_corr) < 1e-10);
    }
}

TEST_CASE("Dicke quantum numbers from exact symmetric states") {
    for (int n = 1; n <= 4; ++n) {
        SystemParams p;
        p.n_atoms = n;
        const Space space{n, 1, {}};
        const auto ops = build_operators(space);
        SparseOperator jm = ops.sigma_minus[0];
        for (int i = 1; i < n; ++i) jm += ops.sigma_minus[static_cast<std::size_t>(i)];
        const SparseOperator jpjm = SparseOperator(jm.adjoint()) * jm;
        for (int k = 0; k <= n; ++k) {
            const auto rho = dicke_state(space, k);
            const auto m = expectation_values(ops, rho);
            const auto d = dicke_numbers(m.as_moment_state(), p, m.zz);
            const double j = 0.5 * n;
            const double mm = k - 0.5 * n;
            CHECK(std::abs(d.j_eff - j) < 1e-8);
            CHECK(std::abs(d.m_eff - mm) < 1e-8);
            CHECK(std::abs(d.j_squared - m.j_squared) < 1e-10);
            const double amp = lowering_amplitude(j, mm);
            CHECK(std::abs((jpjm * rho).trace().real() - amp * amp) < 1e-10);
        }
    }
}

TEST_CASE("triplet expectation reproduces the full J^2 expansion") {
    const Space space{2, 1, {}};
    const auto ops = build_operators(space);
    const auto m = expectation_values(ops, dicke_state(space, 1));
    CHECK(m.j_squared == doctest::Approx(2.0));
    CHECK(m.pair_corr.real() == doctest::Approx(0.5));
    CHECK(m.zz == doctest::Approx(-1.0));
}

TEST_CASE("quantum-regression spectrum") {
    SystemParams dark;
    dark.n_atoms = 2;
    dark.kappa = 1.0;
    dark.gamma = 0.1;
    dark.eta = 0.3;
    const std::vector<double> g = {-1.0, 0.0, 1.0};
    for (const auto& pt : oracle_spectrum(dark, 1, g).points) CHECK(pt.intensity == 0.0);

    // One weakly coupled atom: the line follows the linear-response closed form.
    SystemParams p;
    p.n_atoms = 1;
    p.kappa = 1.0;
    p.g = 0.01;
    p.gamma = 0.1;
    p.eta = 0.05;
    std::vector<double> grid;
    for (int k = 0; k <= 400; ++k) grid.push_back(-1.0 + 2.0 * k / 400.0);
    const auto exact = oracle_spectrum(p, 2, grid);
    CHECK(exact.method == ScanMethod::quantum_regression);
    const double w_exact = half_max_width(exact);
    const auto lw = linewidth(p);
    CHECK(rel(lw.delta_nu, w_exact) < 0.1);

    // tau = 0 of the correlation is the photon number.
    const std::vector<double> taus = {0.0, 5.0, 50.0};
    const auto corr = oracle_correlation(p, 2, taus);
    const auto r = oracle_steady_state(p, 2);
    CHECK(corr[0].real() == doctest::Approx(r.moments.photon_number).epsilon(1e-10));
    CHECK(std::abs(corr[2]) < std::abs(corr[1]));
}
