#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "srlaser/cumulant.hpp"
#include "srlaser/model.hpp"

namespace srl {

/// Weakly coupled filter cavity used to read out the emission spectrum.
struct FilterProbe {
    double big_g = 0.0;    // system-filter coupling G (rad/s)
    double beta = 0.0;     // filter linewidth (rad/s)
    double omega_f = 0.0;  // filter frequency (rad/s), scan variable

    void validate() const;
    /// G^2 / (kappa beta); small means negligible back-action.
    [[nodiscard]] double weakness(double kappa) const { return big_g * big_g / (kappa * beta); }
};

/// Cumulant moments extended by the filter-cavity second moments.
struct ExtendedState {
    MomentState base;
    double filter_number = 0.0;  // <f+ f>
    cplx cross_photon{};         // <a f+>
    cplx cross_atom{};           // <s-_i f+>

    using Real = std::array<double, 11>;
    [[nodiscard]] Real to_real() const noexcept;
    [[nodiscard]] static ExtendedState from_real(const Real& x) noexcept;
};

/// Time derivative of the extended moments, including the O(G) back-coupling
/// of the filter onto <a+a> and <a s+>.
[[nodiscard]] ExtendedState filter_rhs(const ExtendedState& ext, const SystemParams& params,
                                       const FilterProbe& probe);

/// Stationary <f+f> in the weak-probe limit from a converged system steady state:
///   -(2 G^2/beta) Im[(w2 <a+a> + N g <a s+>*) / (w1 w2 + N g^2 <sz>)],
///   w1 = w_f - w_c + i(beta+kappa)/2, w2 = w_f - w_a + i[(beta+gamma+eta)/2 + chi].
[[nodiscard]] double closed_form_point(const MomentState& base, const SystemParams& params,
                                       const FilterProbe& probe);

enum class ScanMethod { ode, closed_form, quantum_regression };

[[nodiscard]] std::string to_string(ScanMethod method);

struct SpectrumPoint {
    double omega_f = 0.0;
    double intensity = 0.0;
};

struct SpectrumScan {
    std::vector<SpectrumPoint> points;
    ScanMethod method = ScanMethod::closed_form;
};

/// Stationary state of the extended equations at fixed filter frequency, by
/// Newton from the weak-probe solution around `base`.
[[nodiscard]] ExtendedState extended_steady_state(const MomentState& base,
                                                  const SystemParams& params,
                                                  const FilterProbe& probe);

/// One intensity per grid point (grid must be strictly increasing; probe.omega_f is ignored).
[[nodiscard]] SpectrumScan scan(const SystemParams& params, const MomentState& base,
                                const FilterProbe& probe, std::span<const double> grid,
                                ScanMethod method);

/// Same, solving the system steady state first.
[[nodiscard]] SpectrumScan scan(const SystemParams& params, const FilterProbe& probe,
                                std::span<const double> grid, ScanMethod method,
                                const SolverConfig& cfg = {});

struct LorentzianFit {
    double amplitude = 0.0;
    double center = 0.0;
    double fwhm = 0.0;
    double offset = 0.0;
    double rms_residual = 0.0;  // relative to the peak intensity
    int iterations = 0;
};

/// Levenberg-Marquardt fit of A (w/2)^2/((x-x0)^2 + (w/2)^2) + B.
/// Throws FitError on a flat scan ("no line"), on too few points or too narrow
/// coverage, and when 200 iterations do not converge.
[[nodiscard]] LorentzianFit fit_lorentzian(const SpectrumScan& scan);

/// Full width at half maximum by linear interpolation of the half-max crossings
/// around the highest point (no model assumed).
[[nodiscard]] double half_max_width(const SpectrumScan& scan);

/// Picks a filter width well below the line width and a coupling weak enough
/// that halving it changes the normalized ODE line shape by < 0.5%.
struct ProbeChoice {
    FilterProbe probe;
    double delta_nu_estimate = 0.0;
    double center_estimate = 0.0;
    double back_action_change = 0.0;  // max normalized change under G -> G/2
    int refinement_passes = 0;
};

[[nodiscard]] ProbeChoice auto_probe(const SystemParams& params, const MomentState& base);

struct LinewidthResult {
    double delta_nu = 0.0;  // fitted FWHM minus beta (rad/s)
    LorentzianFit fit;
    FilterProbe probe;
    SteadyState steady;
    SpectrumScan scan;
};

/// steady_state -> auto_probe -> 101-point closed-form scan over +-6 half-widths -> fit.
[[nodiscard]] LinewidthResult linewidth(const SystemParams& params, const SolverConfig& cfg = {});
[[nodiscard]] LinewidthResult linewidth(const SystemParams& params, const SteadyState& steady);

}  // namespace srl
