#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srlaser/model.hpp"

namespace srl {

using cplx = std::complex<double>;

/// Second-order moments of the permutation-symmetric atoms + cavity system.
struct MomentState {
    double photon_number = 0.0;  // <a+ a>
    cplx atom_photon{};          // <a s+_i>
    double inversion = 0.0;      // <sz_i>
    cplx pair_corr{};            // <s+_i s-_j>, i != j

    using Real = std::array<double, 6>;

    /// Real packing (n, Re c, Im c, s, Re p, Im p) used by the solvers.
    [[nodiscard]] Real to_real() const noexcept;
    [[nodiscard]] static MomentState from_real(const Real& x) noexcept;

    [[nodiscard]] bool is_finite() const noexcept;
};

/// Hard bound on the physical range of photon number and inversion.
inline constexpr double kPhysEpsilon = 1e-9;

struct Physicality {
    bool ok = true;
    /// Relative Cauchy-Schwarz excess |<a s+>|^2 / (n (1+s)/2) - 1 (soft diagnostic, may be > 0).
    double cauchy_schwarz_excess = 0.0;
};

[[nodiscard]] Physicality check_physicality(const MomentState& state);

struct SolverConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    /// Integration horizon in seconds; empty means 1e3 / min(nonzero rate).
    std::optional<double> t_max;
    /// Bound on the weighted residual norm (rad/s); empty means 1e-10 * max(1, kappa).
    std::optional<double> newton_tol;
    int newton_max_iter = 100;
    /// Step budget of the explicit integrator before it declares the problem stiff.
    long max_steps = 200000;

    void validate() const;
    [[nodiscard]] double resolved_t_max(const SystemParams& params) const;
    [[nodiscard]] double resolved_newton_tol(const SystemParams& params) const;
};

/// Time derivative of the tracked moments under the third-order cumulant closure.
[[nodiscard]] MomentState rhs(const MomentState& state, const SystemParams& params);

/// Jacobian of rhs() with respect to the real packing of MomentState.
[[nodiscard]] Eigen::Matrix<double, 6, 6> rhs_jacobian(const MomentState& state,
                                                       const SystemParams& params);

/// max_i |dx_i/dt| / max(1, |x_i|), in rad/s.
[[nodiscard]] double residual_norm(const MomentState& state, const SystemParams& params);

/// Vacuum cavity, all atoms in the ground state.
[[nodiscard]] MomentState initial_state(const SystemParams& params);

struct TrajectoryPoint {
    double t = 0.0;
    MomentState state;
};

/// Adaptive Dormand-Prince integration from t = 0 to cfg.t_max. Every accepted
/// step is recorded. Throws SolverError on step-size underflow or when the
/// step budget is exhausted (stiff parameters: use steady_state instead).
[[nodiscard]] std::vector<TrajectoryPoint> integrate(const MomentState& state0,
                                                     const SystemParams& params,
                                                     const SolverConfig& cfg);

/// CSV columns t, n, Re c, Im c, s, Re p, Im p.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& traj);

struct SteadyState {
    MomentState state;
    double residual = 0.0;
    /// Newton polished the relaxed state (or a continuation branch) to newton_tol.
    bool newton_converged = false;
    /// Set when the returned state is the relaxation result because Newton failed
    /// or only found unphysical roots, or when the only root found is linearly unstable.
    bool warning = false;
    std::string method;
};

/// Relaxation by integration, then Newton on rhs = 0 (from the relaxed state and
/// from the semiclassical lasing state), then continuation in g as a fallback.
/// Roots must be physical and linearly stable. Throws SolverError carrying the best residual when everything fails.
[[nodiscard]] SteadyState steady_state(const SystemParams& params, const SolverConfig& cfg = {});

}  // namespace srl
