#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace srl::detail {

template <int Dim>
struct NewtonProblem {
    using Vec = Eigen::Matrix<double, Dim, 1>;
    using Mat = Eigen::Matrix<double, Dim, Dim>;

    std::function<Vec(const Vec&)> residual;
    std::function<Mat(const Vec&)> jacobian;
    /// Scalar convergence measure of a residual evaluated at x.
    std::function<double(const Vec& x, const Vec& fx)> norm;
    /// Trial points failing this test are rejected by the line search.
    std::function<bool(const Vec&)> feasible = [](const Vec&) { return true; };
};

template <int Dim>
struct NewtonResult {
    Eigen::Matrix<double, Dim, 1> x;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// the residual still drops noticeably, so stiff components far below the
/// the residual still drops quadratically, so stiff components far below the
/// tolerance scale are resolved too.
template <int Dim>
NewtonResult<Dim> newton_solve(const NewtonProblem<Dim>& prob,
                               const Eigen::Matrix<double, Dim, 1>& x0, double tol,
                               int max_iter) {
    using Vec = typename NewtonProblem<Dim>::Vec;
    NewtonResult<Dim> out;
    Vec x = x0;
    Vec fx = prob.residual(x);
    double r = prob.norm(x, fx);
    if (!std::isfinite(r)) {
        out.x = x;
        out.residual = r;
        return out;
    }

    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        const auto jac = prob.jacobian(x);
        const Vec dx = jac.fullPivLu().solve(-fx);
        if (!dx.allFinite()) {
            break;
        }

        double alpha = 1.0;
        bool accepted = false;
        Vec xt;
        Vec ft;
        double rt = 0.0;
        for (int k = 0; k < 40; ++k, alpha *= 0.5) {
            xt = x + alpha * dx;
            if (!prob.feasible(xt)) {
                continue;
            }
            ft = prob.residual(xt);
            rt = prob.norm(xt, ft);
            if (std::isfinite(rt) && rt < r) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }

        double step = 0.0;
        for (int i = 0; i < x.size(); ++i) {
            step = std::max(step, std::abs(alpha * dx[i]) / std::max(1.0, std::abs(x[i])));
        }
        const double r_old = r;
        x = xt;
        fx = ft;
        r = rt;
        if (r < tol && (step < 1e-14 || r > 0.9 * r_old)) {
            break;
        }
    }
    out.x = x;
    out.residual = r;
    out.converged = std::isfinite(r) && r < tol;
    return out;
}

}  // namespace srl::detail
