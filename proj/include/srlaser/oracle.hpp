#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "srlaser/cumulant.hpp"
#include "srlaser/model.hpp"
#include "srlaser/spectrum.hpp"

namespace srl::oracle {

using DenseOperator = Eigen::MatrixXcd;
using SparseOperator = Eigen::SparseMatrix<cplx>;

/// Largest Liouvillian side length d^2 accepted.
inline constexpr std::int64_t kMaxLiouvilleDim = std::int64_t{1} << 20;

/// Full tensor space atoms (atom 0 leftmost) x cavity Fock 0..n_max
/// [x filter Fock 0..m_max].
struct Space {
    int n_atoms = 1;
    int n_max = 1;
    std::optional<int> m_max;

    [[nodiscard]] int dim() const;
    /// Total excitation number (excited atoms + photons) of each basis state.
    [[nodiscard]] std::vector<int> excitations() const;
};

struct Operators {
    Space space;
    SparseOperator identity;
    SparseOperator a;
    SparseOperator f;  // empty without filter
    std::vector<SparseOperator> sigma_minus;
    std::vector<SparseOperator> sigma_z;
};

[[nodiscard]] Operators build_operators(const Space& space);

/// Hamiltonian and collapse operators of the master equation (with the filter
/// cavity terms when `probe` is given). Dephasing uses sqrt(chi/2) sz so that
/// coherences decay at chi.
struct Model {
    Operators ops;
    SparseOperator hamiltonian;
    std::vector<SparseOperator> collapse;
};

[[nodiscard]] Model build_model(const SystemParams& params, const Space& space,
                                const std::optional<FilterProbe>& probe = std::nullopt);

/// Column-stacked Liouvillian, vec(rho)[i + d j] = rho(i, j). Throws InputError
/// when d^2 exceeds kMaxLiouvilleDim.
[[nodiscard]] SparseOperator build_liouvillian(const Model& model);
[[nodiscard]] SparseOperator build_liouvillian(const SystemParams& params, int n_max);

/// L(rho) in operator form.
[[nodiscard]] DenseOperator apply_liouvillian(const Model& model, const DenseOperator& rho);

struct Moments {
    double photon_number = 0.0;
    cplx atom_photon{};
    double inversion = 0.0;
    cplx pair_corr{};
    double zz = 0.0;         // <sz_0 sz_1>
    double j_squared = 0.0;  // <J^2>
    // Filter extension (zero without filter).
    double filter_number = 0.0;
    cplx cross_photon{};
    cplx cross_atom{};
    // Per-atom / per-pair values for the permutation-symmetry checks.
    std::vector<double> inversion_per_atom;
    std::vector<cplx> atom_photon_per_atom;
    std::vector<cplx> pair_corr_per_pair;

    [[nodiscard]] MomentState as_moment_state() const;
    [[nodiscard]] ExtendedState as_extended_state() const;
};

[[nodiscard]] Moments expectation_values(const Operators& ops, const DenseOperator& rho);

struct MomentDerivatives {
    double photon_number = 0.0;
    cplx atom_photon{};
    double inversion = 0.0;
    cplx pair_corr{};
    double filter_number = 0.0;
    cplx cross_photon{};
    cplx cross_atom{};
};

/// Exact d<O>/dt = Tr[O L(rho)] for the tracked (and filter) moments.
/// Throws InputError when rho does not live on the model space.
[[nodiscard]] MomentDerivatives moment_derivatives(const Model& model, const DenseOperator& rho);

struct Result {
    DenseOperator rho_ss;
    Moments moments;
    int n_max = 0;
    double residual = 0.0;         // max |L(rho_ss)|
    double trace_error = 0.0;      // |Tr rho - 1|
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double cutoff_drift = 0.0;     // moment shift between n_max - 2 and n_max
};

/// Stationary state of one cutoff, by a sparse LU solve in the zero
/// excitation-difference sector with the trace constraint replacing one row.
[[nodiscard]] Result steady_state_at_cutoff(const SystemParams& params, int n_max);

/// Steady state with cutoff convergence: compares n_max and n_max + 2 and
/// raises the cutoff (3 rounds max) until all moments move < 1e-6 relative.
[[nodiscard]] Result oracle_steady_state(const SystemParams& params, int n_max);

/// exp(L t) vec(rho0) by a scaled Taylor series of the sparse Liouvillian.
[[nodiscard]] DenseOperator propagate(const SparseOperator& liouvillian, const DenseOperator& rho0,
                                      double t);

/// Emission spectrum from the quantum regression theorem,
///   S(w) = Re Tr[a+ (i w - L)^-1 (a rho_ss)],
/// normalized to unit peak (all zeros when there is no emission).
[[nodiscard]] SpectrumScan oracle_spectrum(const SystemParams& params, int n_max,
                                           std::span<const double> omega_grid);

/// Cavity correlation <a+(tau) a(0)> = Tr[a+ exp(L tau)(a rho_ss)] on a time grid.
[[nodiscard]] std::vector<cplx> oracle_correlation(const SystemParams& params, int n_max,
                                                   std::span<const double> taus);

/// Product state rho_atom^{(x)N} (x) rho_cavity (x) [rho_filter] with random
/// single-site density matrices; the Fock states avoid the top cutoff level.
[[nodiscard]] DenseOperator random_product_state(const Space& space, std::uint64_t seed);

struct Check {
    std::string test;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Derivative-match and steady-state comparison suite used by `oracle-check`.
[[nodiscard]] std::vector<Check> run_checks(std::uint64_t seed = 2024);

}  // namespace srl::oracle
