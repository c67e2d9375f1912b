#include "srlaser/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>

#include <boost/numeric/odeint.hpp>

#include "newton.hpp"
#include "srlaser/error.hpp"

namespace srl {

namespace odeint = boost::numeric::odeint;

MomentState::Real MomentState::to_real() const noexcept {
    return {photon_number, atom_photon.real(), atom_photon.imag(),
            inversion,     pair_corr.real(),   pair_corr.imag()};
}

MomentState MomentState::from_real(const Real& x) noexcept {
    return {x[0], {x[1], x[2]}, x[3], {x[4], x[5]}};
}

bool MomentState::is_finite() const noexcept {
    const auto x = to_real();
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Physicality check_physicality(const MomentState& state) {
    Physicality out;
    out.ok = state.is_finite() && state.photon_number >= -kPhysEpsilon &&
             state.inversion >= -1.0 - kPhysEpsilon && state.inversion <= 1.0 + kPhysEpsilon;
    const double bound = state.photon_number * (1.0 + state.inversion) / 2.0;
    const double c2 = std::norm(state.atom_photon);
    if (bound > 0.0) {
        out.cauchy_schwarz_excess = c2 / bound - 1.0;
    } else {
        out.cauchy_schwarz_excess = c2 > 0.0 ? std::numeric_limits<double>::infinity() : -1.0;
    }
    return out;
}

void SolverConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw InputError("solver tolerances must be > 0");
    }
    if (t_max && !(*t_max > 0.0)) {
        throw InputError("t_max must be > 0");
    }
    if (newton_tol && !(*newton_tol > 0.0)) {
        throw InputError("newton_tol must be > 0");
    }
    if (newton_max_iter < 1 || max_steps < 1) {
        throw InputError("iteration budgets must be >= 1");
    }
}

double SolverConfig::resolved_t_max(const SystemParams& params) const {
    if (t_max) {
        return *t_max;
    }
    double slowest = std::numeric_limits<double>::infinity();
    for (double r : {params.kappa, params.gamma, params.eta, params.chi, params.g}) {
        if (r > 0.0) {
            slowest = std::min(slowest, r);
        }
    }
    return std::isfinite(slowest) ? 1e3 / slowest : 1.0;
}

double SolverConfig::resolved_newton_tol(const SystemParams& params) const {
    return newton_tol ? *newton_tol : 1e-10 * std::max(1.0, params.kappa);
}

MomentState rhs(const MomentState& state, const SystemParams& params) {
    if (!state.is_finite()) {
        throw InputError("rhs: non-finite moment state");
    }
    const double n_atoms = static_cast<double>(params.n_atoms);
    const double g = params.g;
    const double big_gamma = params.eta + params.gamma + 2.0 * params.chi;
    const double s = state.inversion;
    const cplx c = state.atom_photon;
    const cplx i{0.0, 1.0};
    // i * omega_ac with omega_ac = (omega_a - omega_c) + i[(kappa + gamma + eta)/2 + chi]
    const cplx i_omega_ac = i * params.detuning() - 0.5 * (params.kappa + big_gamma);

    MomentState d;
    d.photon_number = -2.0 * g * n_atoms * c.imag() - params.kappa * state.photon_number;
    d.atom_photon = i_omega_ac * c - i * g * s * state.photon_number -
                    i * g * (n_atoms - 1.0) * state.pair_corr - i * (g / 2.0) * (1.0 + s);
    d.inversion = 4.0 * g * c.imag() - params.gamma * (1.0 + s) + params.eta * (1.0 - s);
    d.pair_corr = -big_gamma * state.pair_corr - 2.0 * g * s * c.imag();
    return d;
}

Eigen::Matrix<double, 6, 6> rhs_jacobian(const MomentState& state, const SystemParams& params) {
    const double n_atoms = static_cast<double>(params.n_atoms);
    const double g = params.g;
    const double big_gamma = params.eta + params.gamma + 2.0 * params.chi;
    const double k = 0.5 * (params.kappa + big_gamma);
    const double det = params.detuning();
    const double n = state.photon_number;
    const double ci = state.atom_photon.imag();
    const double s = state.inversion;

    // Rows/cols: n, Re c, Im c, s, Re p, Im p.
    Eigen::Matrix<double, 6, 6> j = Eigen::Matrix<double, 6, 6>::Zero();
    j(0, 0) = -params.kappa;
    j(0, 2) = -2.0 * g * n_atoms;

    j(1, 1) = -k;
    j(1, 2) = -det;
    j(1, 5) = g * (n_atoms - 1.0);

    j(2, 0) = -g * s;
    j(2, 1) = det;
    j(2, 2) = -k;
    j(2, 3) = -g * n - g / 2.0;
    j(2, 4) = -g * (n_atoms - 1.0);

    j(3, 2) = 4.0 * g;
    j(3, 3) = -params.gamma - params.eta;

    j(4, 2) = -2.0 * g * s;
    j(4, 3) = -2.0 * g * ci;
    j(4, 4) = -big_gamma;

    j(5, 5) = -big_gamma;
    return j;
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 to_vec(const MomentState& s) {
    const auto r = s.to_real();
    return Vec6(r.data());
}

MomentState from_vec(const Vec6& v) {
    MomentState::Real r;
    for (int i = 0; i < 6; ++i) r[i] = v[i];
    return MomentState::from_real(r);
}

double weighted_norm(const Vec6& x, const Vec6& fx) {
    double out = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double w = i == 0 ? std::max(1.0, std::abs(x[0])) : 1.0;
        out = std::max(out, std::abs(fx[i]) / w);
    }
    return out;
}

bool physical(const Vec6& x) {
    return x.allFinite() && x[0] >= -kPhysEpsilon && std::abs(x[3]) <= 1.0 + kPhysEpsilon;
}

using OdeState = std::array<double, 6>;

struct MomentSystem {
    const SystemParams* params;
    void operator()(const OdeState& x, OdeState& dxdt, double /*t*/) const {
        dxdt = rhs(MomentState::from_real(x), *params).to_real();
    }
};

/// Integrates until t_end or until `stop` returns true. Accepted steps go to
/// `observe`. Returns false if `stop` ended the run early.
template <typename Observe, typename Stop>
bool integrate_until(const MomentState& state0, const SystemParams& params,
                     const SolverConfig& cfg, double t_end, long step_budget,
                     bool throw_on_budget, Observe&& observe, Stop&& stop) {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(cfg.abs_tol,
                                                                                 cfg.rel_tol);
    MomentSystem sys{&params};
    OdeState x = state0.to_real();
    double t = 0.0;
    double fastest = params.kappa + params.gamma + params.eta + 2.0 * params.chi +
                     2.0 * params.g * std::sqrt(static_cast<double>(params.n_atoms));
    double dt = std::min(t_end, 1e-3 / std::max(fastest, 1e-300));
    observe(t, x);

    long steps = 0;
    while (t < t_end) {
        if (steps >= step_budget) {
            if (throw_on_budget) {
                throw SolverError(
                    "integrate: step budget exhausted at t = " + std::to_string(t) +
                    " s (stiff parameters); use the steady_state Newton path instead");
            }
            return true;
        }
        dt = std::min(dt, t_end - t);
        const auto result = stepper.try_step(sys, x, t, dt);
        if (result == odeint::success) {
            ++steps;
            observe(t, x);
            if (stop(t, x)) {
                return false;
            }
        } else if (dt <= std::max(std::abs(t), 1e-300) * 1e-15) {
            throw SolverError("integrate: step size underflow at t = " + std::to_string(t) +
                              " s (stiff parameters); use the steady_state Newton path instead");
        }
    }
    return true;
}

detail::NewtonProblem<6> moment_problem(const SystemParams& params) {
    detail::NewtonProblem<6> prob;
    prob.residual = [&params](const Vec6& x) { return to_vec(rhs(from_vec(x), params)); };
    prob.jacobian = [&params](const Vec6& x) { return rhs_jacobian(from_vec(x), params); };
    prob.norm = weighted_norm;
    prob.feasible = physical;
    return prob;
}

/// All Jacobian eigenvalues in the closed left half plane (up to roundoff).
bool stable(const SystemParams& params, const Vec6& x) {
    const Eigen::Matrix<double, 6, 6> jac = rhs_jacobian(from_vec(x), params);
    const double scale = jac.cwiseAbs().maxCoeff();
    const Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(jac, false);
    return es.eigenvalues().real().maxCoeff() <= 1e-10 * std::max(scale, 1e-300);
}

/// Semiclassical lasing solution on resonance: the inversion clamps where gain
/// balances loss, the field follows from the inversion balance. Empty below threshold.
std::optional<Vec6> lasing_seed(const SystemParams& params) {
    const double n = static_cast<double>(params.n_atoms);
    const double big_gamma = params.eta + params.gamma + 2.0 * params.chi;
    if (!(params.g > 0.0) || !(params.kappa > 0.0) || !(big_gamma > 0.0)) {
        return std::nullopt;
    }
    const double k = 0.5 * (params.kappa + big_gamma);
    const double s = k / (2.0 * params.g * params.g * (n / params.kappa + (n - 1.0) / big_gamma));
    const double y = (params.eta * (1.0 - s) - params.gamma * (1.0 + s)) / (4.0 * params.g);
    if (!(s < 1.0) || !(y > 0.0)) {
        return std::nullopt;
    }
    Vec6 x;
    x << 2.0 * params.g * n * y / params.kappa, 0.0, -y, s, 2.0 * params.g * s * y / big_gamma, 0.0;
    return x;
}

/// Steady state at g = 0: empty cavity, rate-balanced inversion.
Vec6 decoupled_fixed_point(const SystemParams& params, double s_fallback) {
    Vec6 x = Vec6::Zero();
    const double sum = params.eta + params.gamma;
    x[3] = sum > 0.0 ? (params.eta - params.gamma) / sum : s_fallback;
    return x;
}

/// Newton along g' = g_from -> g_to starting from x (a solution at g_from),
/// bisecting the step in log g on failure.
bool continue_in_g(const SystemParams& params, Vec6& x, double g_from, double g_to, double tol,
                   int max_iter, int depth) {
    SystemParams p = params;
    p.g = g_to;
    const auto res = detail::newton_solve(moment_problem(p), x, tol, max_iter);
    if (res.converged && physical(res.x)) {
        x = res.x;
        return true;
    }
    if (depth <= 0 || g_from <= 0.0) {
        return false;
    }
    const double g_mid = std::sqrt(g_from * g_to);
    Vec6 trial = x;
    if (!continue_in_g(params, trial, g_from, g_mid, tol, max_iter, depth - 1)) {
        return false;
    }
    if (!continue_in_g(params, trial, g_mid, g_to, tol, max_iter, depth - 1)) {
        return false;
    }
    x = trial;
    return true;
}

}  // namespace

double residual_norm(const MomentState& state, const SystemParams& params) {
    return weighted_norm(to_vec(state), to_vec(rhs(state, params)));
}

MomentState initial_state(const SystemParams& /*params*/) {
    MomentState s;
    s.inversion = -1.0;
    return s;
}

std::vector<TrajectoryPoint> integrate(const MomentState& state0, const SystemParams& params,
                                       const SolverConfig& cfg) {
    cfg.validate();
    params.validate();
    std::vector<TrajectoryPoint> traj;
    integrate_until(
        state0, params, cfg, cfg.resolved_t_max(params), cfg.max_steps, true,
        [&traj](double t, const OdeState& x) {
            traj.push_back({t, MomentState::from_real(x)});
        },
        [](double, const OdeState&) { return false; });
    return traj;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& traj) {
    os << "t,n,re_c,im_c,s,re_p,im_p\n";
    char buf[256];
    for (const auto& pt : traj) {
        const auto x = pt.state.to_real();
        std::snprintf(buf, sizeof buf, "%.9e,%.9e,%.9e,%.9e,%.9e,%.9e,%.9e\n", pt.t, x[0], x[1],
                      x[2], x[3], x[4], x[5]);
        os << buf;
    }
}

SteadyState steady_state(const SystemParams& params, const SolverConfig& cfg) {
    params.validate();
    cfg.validate();
    const double tol = cfg.resolved_newton_tol(params);

    // Phase 1: relaxation on the fast manifold.
    const MomentState start = initial_state(params);
    const double r0 = residual_norm(start, params);
    MomentState relaxed = start;
    double relaxed_r = r0;
    {
        constexpr long kWindow = 1000;
        long steps = 0;
        double window_r = r0;
        integrate_until(
            start, params, cfg, cfg.resolved_t_max(params), std::min(cfg.max_steps, 50000L),
            false,
            [&](double, const OdeState& x) {
                relaxed = MomentState::from_real(x);
                relaxed_r = residual_norm(relaxed, params);
            },
            [&](double, const OdeState&) {
                ++steps;
                if (relaxed_r <= r0 * 1e-6 || relaxed_r < tol) {
                    return true;
                }
                if (steps % kWindow == 0) {
                    const bool plateau = relaxed_r > 0.9 * window_r;
                    window_r = relaxed_r;
                    return plateau;
                }
                return false;
            });
    }

    SteadyState out;
    double best_r = relaxed_r;
    // A converged but linearly unstable root is only kept as a last resort.
    std::optional<Vec6> unstable_root;
    auto accept = [&](const Vec6& x, double r, const char* method) {
        if (!physical(x)) {
            return false;
        }
        if (!stable(params, x)) {
            if (!unstable_root) unstable_root = x;
            return false;
        }
        out.state = from_vec(x);
        out.residual = r;
        out.newton_converged = true;
        out.method = method;
        return true;
    };

    // Phase 2: Newton from the relaxed state, then from the semiclassical lasing state.
    const auto newton = detail::newton_solve(moment_problem(params), to_vec(relaxed), tol,
                                             cfg.newton_max_iter);
    best_r = std::min(best_r, newton.residual);
    if (newton.converged && accept(newton.x, newton.residual, "newton")) {
        return out;
    }
    if (const auto seed = lasing_seed(params)) {
        const auto lasing = detail::newton_solve(moment_problem(params), *seed, tol,
                                                 cfg.newton_max_iter);
        best_r = std::min(best_r, lasing.residual);
        if (lasing.converged && accept(lasing.x, lasing.residual, "newton")) {
            return out;
        }
    }

    // Phase 3: continuation in g from the closed-form decoupled solution.
    if (params.g > 0.0) {
        Vec6 x = decoupled_fixed_point(params, relaxed.inversion);
        constexpr int kSteps = 10;
        double g_prev = 0.0;
        bool ok = true;
        for (int k = 0; k < kSteps && ok; ++k) {
            const double g_k = params.g * std::pow(10.0, -6.0 + 6.0 * k / (kSteps - 1));
            ok = continue_in_g(params, x, g_prev, g_k, tol, cfg.newton_max_iter, 6);
            g_prev = g_k;
        }
        if (ok && accept(x, weighted_norm(x, to_vec(rhs(from_vec(x), params))), "continuation")) {
            return out;
        }
    }

    if (unstable_root) {
        out.state = from_vec(*unstable_root);
        out.residual = residual_norm(out.state, params);
        out.newton_converged = true;
        out.warning = true;
        out.method = "newton_unstable";
        return out;
    }
    if (relaxed_r < tol && check_physicality(relaxed).ok) {
        out.state = relaxed;
        out.residual = relaxed_r;
        out.warning = true;
        out.method = "relaxation";
        return out;
    }
    throw SolverError("steady_state: Newton, g-continuation and relaxation all failed; best "
                      "residual " + std::to_string(best_r),
                      best_r);
}

}  // namespace srl
