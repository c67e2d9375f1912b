#include "srlaser/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "newton.hpp"
#include "srlaser/error.hpp"

namespace srl {

void FilterProbe::validate() const {
    if (!(big_g > 0.0) || !std::isfinite(big_g)) {
        throw InputError("filter probe: G must be > 0 (no signal otherwise)");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw InputError("filter probe: beta must be > 0");
    }
}

ExtendedState::Real ExtendedState::to_real() const noexcept {
    const auto b = base.to_real();
    return {b[0], b[1], b[2], b[3], b[4], b[5], filter_number,
            cross_photon.real(), cross_photon.imag(), cross_atom.real(), cross_atom.imag()};
}

ExtendedState ExtendedState::from_real(const Real& x) noexcept {
    ExtendedState e;
    e.base = MomentState::from_real({x[0], x[1], x[2], x[3], x[4], x[5]});
    e.filter_number = x[6];
    e.cross_photon = {x[7], x[8]};
    e.cross_atom = {x[9], x[10]};
    return e;
}

std::string to_string(ScanMethod method) {
    switch (method) {
        case ScanMethod::ode: return "ode";
        case ScanMethod::closed_form: return "closed_form";
        case ScanMethod::quantum_regression: return "quantum_regression";
    }
    return "unknown";
}

namespace {

constexpr cplx kI{0.0, 1.0};

cplx omega1(const SystemParams& p, const FilterProbe& f) {
    return {f.omega_f - p.omega_c, 0.5 * (f.beta + p.kappa)};
}

cplx omega2(const SystemParams& p, const FilterProbe& f) {
    return {f.omega_f - p.omega_a, 0.5 * (f.beta + p.gamma + p.eta) + p.chi};
}

bool all_finite(const ExtendedState& e) {
    const auto x = e.to_real();
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

/// Weak-probe cross correlations (<a f+>, <s- f+>, <f+ f>) for fixed system moments.
ExtendedState weak_probe_solution(const MomentState& base, const SystemParams& params,
                                  const FilterProbe& probe) {
    const double n_atoms = static_cast<double>(params.n_atoms);
    const double g = params.g;
    const double big_g = probe.big_g;
    const cplx w1 = omega1(params, probe);
    const cplx w2 = omega2(params, probe);
    const cplx denom = w1 * w2 + n_atoms * g * g * base.inversion;
    if (std::abs(denom) == 0.0) {
        throw SolverError("closed form: vanishing denominator (polariton pole)");
    }
    const cplx c_conj = std::conj(base.atom_photon);
    ExtendedState e;
    e.base = base;
    e.cross_photon = -big_g * (w2 * base.photon_number + n_atoms * g * c_conj) / denom;
    e.cross_atom = -(g * base.inversion * e.cross_photon + big_g * c_conj) / w2;
    e.filter_number = 2.0 * big_g * e.cross_photon.imag() / probe.beta;
    return e;
}

using Vec11 = Eigen::Matrix<double, 11, 1>;
using Mat11 = Eigen::Matrix<double, 11, 11>;

Vec11 to_vec(const ExtendedState& e) {
    const auto r = e.to_real();
    return Vec11(r.data());
}

ExtendedState from_vec(const Vec11& v) {
    ExtendedState::Real r;
    for (int i = 0; i < 11; ++i) r[i] = v[i];
    return ExtendedState::from_real(r);
}

Mat11 filter_jacobian(const ExtendedState& e, const SystemParams& params,
                      const FilterProbe& probe) {
    const double n_atoms = static_cast<double>(params.n_atoms);
    const double g = params.g;
    const double big_g = probe.big_g;
    const cplx w1 = omega1(params, probe);
    const cplx w2 = omega2(params, probe);
    const double s = e.base.inversion;

    Mat11 j = Mat11::Zero();
    j.topLeftCorner<6, 6>() = rhs_jacobian(e.base, params);
    // Back-coupling onto the system moments.
    j(0, 8) += -2.0 * big_g;
    j(1, 10) += -big_g;
    j(2, 9) += -big_g;
    // <f+f>
    j(6, 6) = -probe.beta;
    j(6, 8) = 2.0 * big_g;
    // <a f+>
    j(7, 7) = -w1.imag();
    j(7, 8) = -w1.real();
    j(7, 10) = g * n_atoms;
    j(8, 7) = w1.real();
    j(8, 8) = -w1.imag();
    j(8, 9) = -g * n_atoms;
    j(8, 0) = big_g;
    j(8, 6) = -big_g;
    // <s- f+>
    j(9, 9) = -w2.imag();
    j(9, 10) = -w2.real();
    j(9, 8) = -g * s;
    j(9, 3) = -g * e.cross_photon.imag();
    j(9, 2) = big_g;
    j(10, 9) = w2.real();
    j(10, 10) = -w2.imag();
    j(10, 7) = g * s;
    j(10, 3) = g * e.cross_photon.real();
    j(10, 1) = big_g;
    return j;
}

/// Base block weighted as in steady_state; each filter block relative to its own magnitude.
double extended_norm(const Vec11& x, const Vec11& fx) {
    double out = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double w = i == 0 ? std::max(1.0, std::abs(x[0])) : 1.0;
        out = std::max(out, std::abs(fx[i]) / w);
    }
    const double tiny = std::numeric_limits<double>::min();
    const double wf = std::max(std::abs(x[6]), tiny);
    const double wx = std::max(std::hypot(x[7], x[8]), tiny);
    const double wy = std::max(std::hypot(x[9], x[10]), tiny);
    out = std::max(out, std::abs(fx[6]) / wf);
    out = std::max(out, std::hypot(fx[7], fx[8]) / wx);
    out = std::max(out, std::hypot(fx[9], fx[10]) / wy);
    return out;
}

void require_grid(std::span<const double> grid) {
    if (grid.empty()) {
        throw InputError("scan: empty frequency grid");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw InputError("scan: frequency grid must be strictly increasing");
        }
    }
}

std::vector<double> symmetric_log_grid(double center, double scale, double lo_decade,
                                       double hi_decade, int per_decade) {
    std::vector<double> offsets;
    const int n = static_cast<int>(std::lround((hi_decade - lo_decade) * per_decade));
    for (int i = 0; i <= n; ++i) {
        offsets.push_back(scale * std::pow(10.0, lo_decade + static_cast<double>(i) / per_decade));
    }
    std::vector<double> grid;
    grid.reserve(2 * offsets.size() + 1);
    for (auto it = offsets.rbegin(); it != offsets.rend(); ++it) grid.push_back(center - *it);
    grid.push_back(center);
    for (double o : offsets) grid.push_back(center + o);
    return grid;
}

std::vector<double> linear_grid(double center, double half_width, int points) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid[static_cast<std::size_t>(i)] =
            center - half_width + 2.0 * half_width * i / (points - 1);
    }
    return grid;
}

double max_normalized_change(const SpectrumScan& a, const SpectrumScan& b) {
    double ma = 0.0;
    double mb = 0.0;
    for (const auto& p : a.points) ma = std::max(ma, p.intensity);
    for (const auto& p : b.points) mb = std::max(mb, p.intensity);
    double out = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        out = std::max(out, std::abs(a.points[i].intensity / ma - b.points[i].intensity / mb));
    }
    return out;
}

}  // namespace

ExtendedState filter_rhs(const ExtendedState& ext, const SystemParams& params,
                         const FilterProbe& probe) {
    if (!all_finite(ext)) {
        throw InputError("filter_rhs: non-finite extended state");
    }
    const double n_atoms = static_cast<double>(params.n_atoms);
    const double g = params.g;
    const double big_g = probe.big_g;
    const cplx x = ext.cross_photon;
    const cplx y = ext.cross_atom;
    const double s = ext.base.inversion;

    ExtendedState d;
    d.base = rhs(ext.base, params);
    d.base.photon_number += -2.0 * big_g * x.imag();
    d.base.atom_photon += -kI * big_g * std::conj(y);

    d.filter_number = 2.0 * big_g * x.imag() - probe.beta * ext.filter_number;
    d.cross_photon = kI * omega1(params, probe) * x - kI * g * n_atoms * y +
                     kI * big_g * (ext.base.photon_number - ext.filter_number);
    d.cross_atom = kI * omega2(params, probe) * y + kI * g * s * x +
                   kI * big_g * std::conj(ext.base.atom_photon);
    return d;
}

double closed_form_point(const MomentState& base, const SystemParams& params,
                         const FilterProbe& probe) {
    probe.validate();
    if (!base.is_finite()) {
        throw InputError("closed_form_point: non-finite base state");
    }
    return weak_probe_solution(base, params, probe).filter_number;
}

ExtendedState extended_steady_state(const MomentState& base, const SystemParams& params,
                                    const FilterProbe& probe) {
    probe.validate();
    detail::NewtonProblem<11> prob;
    prob.residual = [&](const Vec11& x) { return to_vec(filter_rhs(from_vec(x), params, probe)); };
    prob.jacobian = [&](const Vec11& x) { return filter_jacobian(from_vec(x), params, probe); };
    prob.norm = extended_norm;
    const Vec11 seed = to_vec(weak_probe_solution(base, params, probe));
    const double tol = 1e-10 * std::max(1.0, params.kappa);
    const auto res = detail::newton_solve(prob, seed, tol, 60);
    if (!res.converged) {
        throw SolverError("extended steady state did not converge at omega_f = " +
                              std::to_string(probe.omega_f) + " rad/s",
                          res.residual);
    }
    return from_vec(res.x);
}

SpectrumScan scan(const SystemParams& params, const MomentState& base, const FilterProbe& probe,
                  std::span<const double> grid, ScanMethod method) {
    probe.validate();
    require_grid(grid);
    SpectrumScan out;
    out.method = method;
    out.points.reserve(grid.size());
    FilterProbe p = probe;
    for (double w : grid) {
        p.omega_f = w;
        double intensity = 0.0;
        try {
            switch (method) {
                case ScanMethod::closed_form:
                    intensity = closed_form_point(base, params, p);
                    break;
                case ScanMethod::ode:
                    intensity = extended_steady_state(base, params, p).filter_number;
                    break;
                case ScanMethod::quantum_regression:
                    throw InputError("scan: quantum-regression spectra come from the oracle");
            }
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " (omega_f = " + std::to_string(w) +
                                  " rad/s)",
                              e.best_residual());
        }
        out.points.push_back({w, intensity});
    }
    return out;
}

SpectrumScan scan(const SystemParams& params, const FilterProbe& probe,
                  std::span<const double> grid, ScanMethod method, const SolverConfig& cfg) {
    const auto ss = steady_state(params, cfg);
    return scan(params, ss.state, probe, grid, method);
}

double half_max_width(const SpectrumScan& scan) {
    const auto& pts = scan.points;
    if (pts.size() < 3) {
        throw FitError("half_max_width: too few points");
    }
    const auto peak = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.intensity < b.intensity;
    });
    const double half = peak->intensity / 2.0;
    if (!(peak->intensity > 0.0)) {
        throw FitError("no line");
    }
    const auto ip = static_cast<std::size_t>(peak - pts.begin());
    auto crossing = [&](std::size_t lo, std::size_t hi) {
        const double t = (half - pts[lo].intensity) / (pts[hi].intensity - pts[lo].intensity);
        return pts[lo].omega_f + t * (pts[hi].omega_f - pts[lo].omega_f);
    };
    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = ip; i > 0; --i) {
        if (pts[i - 1].intensity <= half) {
            left = crossing(i - 1, i);
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = ip; i + 1 < pts.size(); ++i) {
        if (pts[i + 1].intensity <= half) {
            right = crossing(i + 1, i);
            break;
        }
    }
    if (std::isnan(left) && std::isnan(right)) {
        throw FitError("half_max_width: line not contained in the scan");
    }
    if (std::isnan(left)) left = 2.0 * peak->omega_f - right;
    if (std::isnan(right)) right = 2.0 * peak->omega_f - left;
    return right - left;
}

LorentzianFit fit_lorentzian(const SpectrumScan& scan) {
    const auto& pts = scan.points;
    if (pts.size() < 8) {
        throw FitError("fit_lorentzian: need at least 8 points");
    }
    double ymax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    std::size_t imax = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].intensity > ymax) {
            ymax = pts[i].intensity;
            imax = i;
        }
        ymin = std::min(ymin, pts[i].intensity);
    }
    if (!(ymax - ymin >= 1e-12 * std::abs(ymax)) || ymax - ymin <= 0.0) {
        throw FitError("no line");
    }

    // Initial guess: offset from the edge median, width from half-max crossings.
    std::vector<double> edges;
    const std::size_t ne = std::max<std::size_t>(1, pts.size() / 10);
    for (std::size_t i = 0; i < ne; ++i) {
        edges.push_back(pts[i].intensity);
        edges.push_back(pts[pts.size() - 1 - i].intensity);
    }
    std::nth_element(edges.begin(), edges.begin() + edges.size() / 2, edges.end());
    const double offset0 = edges[edges.size() / 2];
    SpectrumScan shifted = scan;
    for (auto& p : shifted.points) p.intensity -= offset0;
    double w0 = 0.0;
    try {
        w0 = half_max_width(shifted);
    } catch (const FitError&) {
        throw FitError("fit_lorentzian: scan does not reach the half maximum on either side");
    }
    if (!(w0 > 0.0)) {
        w0 = (pts.back().omega_f - pts.front().omega_f) / 4.0;
    }
    const double span = pts.back().omega_f - pts.front().omega_f;
    if (span < 3.0 * w0 / 2.0) {
        throw FitError("fit_lorentzian: scan spans fewer than 3 estimated half-widths");
    }

    // Work in units x' = (x - x_peak)/w0, y' = y/scale.
    const double x_ref = pts[imax].omega_f;
    const double y_scale = ymax - ymin;
    const std::size_t n = pts.size();
    Eigen::VectorXd xs(n);
    Eigen::VectorXd ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[static_cast<Eigen::Index>(i)] = (pts[i].omega_f - x_ref) / w0;
        ys[static_cast<Eigen::Index>(i)] = pts[i].intensity / y_scale;
    }

    using Vec4 = Eigen::Vector4d;
    Vec4 p;
    p << (ymax - offset0) / y_scale, 0.0, 1.0, offset0 / y_scale;

    auto residuals = [&](const Vec4& q, Eigen::VectorXd& r) {
        const double h = 0.5 * q[2];
        for (Eigen::Index i = 0; i < xs.size(); ++i) {
            const double u = xs[i] - q[1];
            r[i] = ys[i] - (q[0] * h * h / (u * u + h * h) + q[3]);
        }
        return r.squaredNorm();
    };

    Eigen::VectorXd r(n);
    Eigen::VectorXd r_trial(n);
    Eigen::MatrixXd jac(n, 4);
    double cost = residuals(p, r);
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    for (; iter < 200 && !converged; ++iter) {
        const double h = 0.5 * p[2];
        for (Eigen::Index i = 0; i < xs.size(); ++i) {
            const double u = xs[i] - p[1];
            const double den = u * u + h * h;
            const double lor = h * h / den;
            jac(i, 0) = lor;
            jac(i, 1) = p[0] * 2.0 * u * h * h / (den * den);
            jac(i, 2) = p[0] * 0.5 * (2.0 * h * u * u / (den * den));
            jac(i, 3) = 1.0;
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Vec4 jtr = jac.transpose() * r;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            Eigen::Matrix4d a = jtj;
            for (int d = 0; d < 4; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-30);
            const Vec4 delta = a.ldlt().solve(jtr);
            Vec4 trial = p + delta;
            trial[2] = std::abs(trial[2]);
            const double c_trial = residuals(trial, r_trial);
            if (std::isfinite(c_trial) && c_trial <= cost) {
                const double scale_a = std::max(std::abs(trial[0]), 1e-300);
                const double rel = std::max({std::abs(delta[0]) / scale_a,
                                             std::abs(delta[1]) / trial[2],
                                             std::abs(delta[2]) / trial[2],
                                             std::abs(delta[3]) / scale_a});
                p = trial;
                std::swap(r, r_trial);
                const double old_cost = cost;
                cost = c_trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                converged = rel < 1e-8 || cost == 0.0 || old_cost - cost <= 1e-30 * old_cost;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No downhill step at any damping: already at the minimum.
            converged = true;
        }
    }
    LorentzianFit out;
    out.amplitude = p[0] * y_scale;
    out.center = x_ref + p[1] * w0;
    out.fwhm = p[2] * w0;
    out.offset = p[3] * y_scale;
    out.rms_residual = std::sqrt(cost / static_cast<double>(n)) * y_scale / std::abs(ymax);
    out.iterations = iter;
    if (!converged) {
        throw FitError("fit_lorentzian: no convergence after 200 iterations (best fwhm " +
                       std::to_string(out.fwhm) + ")");
    }
    if (!(out.fwhm > 0.0)) {
        throw FitError("fit_lorentzian: non-positive width");
    }
    if (span < 3.0 * out.fwhm / 2.0) {
        throw FitError("fit_lorentzian: scan spans fewer than 3 fitted half-widths");
    }
    return out;
}

ProbeChoice auto_probe(const SystemParams& params, const MomentState& base) {
    if (!(params.kappa > 0.0)) {
        throw InputError("auto_probe: needs kappa > 0");
    }
    const double kappa = params.kappa;
    const double big_gamma = params.eta + params.gamma + 2.0 * params.chi;
    ProbeChoice out;
    FilterProbe probe{1e-3 * kappa, kappa / 10.0, 0.0};
    double center = (params.omega_a * kappa + params.omega_c * big_gamma) / (kappa + big_gamma);

    constexpr int kMaxPasses = 16;
    double width = 0.0;
    bool resolved = false;
    for (int pass = 0; pass < kMaxPasses && !resolved; ++pass) {
        out.refinement_passes = pass + 1;
        const auto grid = symmetric_log_grid(center, kappa, -14.0, 1.0, 20);
        const auto coarse = scan(params, base, probe, grid, ScanMethod::closed_form);
        const auto peak = std::max_element(
            coarse.points.begin(), coarse.points.end(),
            [](const auto& a, const auto& b) { return a.intensity < b.intensity; });
        if (!(peak->intensity > 0.0)) {
            throw SolverError("auto_probe: no emission line (spectrum not positive)");
        }
        center = peak->omega_f;
        const double measured = half_max_width(coarse);
        width = measured - probe.beta;
        if (width >= 10.0 * probe.beta * (1.0 - 1e-9)) {
            resolved = true;
            break;
        }
        const double next = std::min(probe.beta / 10.0, std::max(width, 1e-3 * probe.beta) / 10.0);
        if (next < 1e-12 * kappa) {
            throw SolverError("auto_probe: line narrower than the 1e-12 kappa resolution floor");
        }
        probe.beta = next;
    }
    if (!resolved) {
        throw SolverError("auto_probe: line width not resolved after refinement");
    }

    // Final probe, then shrink G until the ODE line shape is insensitive to it.
    probe.beta = width / 10.0;
    probe.big_g = std::min(1e-3 * kappa, 1e-2 * std::sqrt(probe.beta * width));
    const auto grid = linear_grid(center, 3.0 * width, 21);
    auto current = scan(params, base, probe, grid, ScanMethod::ode);
    for (int k = 0; k < 12; ++k) {
        FilterProbe half = probe;
        half.big_g /= 2.0;
        const auto weaker = scan(params, base, half, grid, ScanMethod::ode);
        out.back_action_change = max_normalized_change(current, weaker);
        if (out.back_action_change < 5e-3) {
            break;
        }
        probe = half;
        current = weaker;
    }
    if (out.back_action_change >= 5e-3) {
        throw SolverError("auto_probe: back-action did not fall below 0.5%");
    }
    out.probe = probe;
    out.delta_nu_estimate = width;
    out.center_estimate = center;
    return out;
}

LinewidthResult linewidth(const SystemParams& params, const SteadyState& steady) {
    const auto choice = auto_probe(params, steady.state);
    // +-6 half-widths around the estimated center.
    const auto grid = linear_grid(choice.center_estimate, 3.0 * choice.delta_nu_estimate, 101);
    LinewidthResult out;
    out.steady = steady;
    out.probe = choice.probe;
    out.scan = scan(params, steady.state, choice.probe, grid, ScanMethod::closed_form);
    out.fit = fit_lorentzian(out.scan);
    out.delta_nu = out.fit.fwhm - choice.probe.beta;
    return out;
}

LinewidthResult linewidth(const SystemParams& params, const SolverConfig& cfg) {
    return linewidth(params, steady_state(params, cfg));
}

}  // namespace srl
