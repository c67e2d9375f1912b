#include "srlaser/analytic.hpp"

#include <cmath>
#include <string>

#include "srlaser/error.hpp"

namespace srl {

AnalyticInputs analytic_inputs(const SystemParams& params, double m_eff) {
    AnalyticInputs in;
    in.derived = derived(params);
    in.kappa = params.kappa;
    in.m_eff = m_eff;
    in.n_atoms = static_cast<double>(params.n_atoms);
    return in;
}

double tieri_linewidth(const AnalyticInputs& in, double eta, double gamma) {
    const double c = in.derived.c_collective;
    const double big_gamma = in.derived.big_gamma;
    if (!in.derived.d0 || c * *in.derived.d0 <= big_gamma) {
        throw InputError("tieri_linewidth: below mean-field threshold (C d0 <= Gamma)");
    }
    const double d0 = *in.derived.d0;
    const double kappa = in.kappa;
    // 4 g^2 kappa = Gamma_c kappa^2
    const double four_g2_kappa = in.derived.purcell * kappa * kappa;
    return 0.5 * (c + big_gamma) / (c * d0 - big_gamma) * big_gamma / (eta + gamma) *
           four_g2_kappa / ((kappa + big_gamma) * (kappa + big_gamma));
}

double crossover_radicand_argument(const AnalyticInputs& in) {
    const double r = in.derived.big_gamma / in.kappa;
    const double x = r - in.m_eff * 2.0 * in.derived.purcell / in.kappa;
    return 4.0 * x / ((r + 1.0) * (r + 1.0));
}

double crossover_linewidth(const AnalyticInputs& in) {
    const double x = crossover_radicand_argument(in);
    if (1.0 + x < 0.0) {
        throw InputError("crossover_linewidth: negative radicand " + std::to_string(1.0 + x));
    }
    // sqrt(1+x) - 1 written without cancellation.
    return 0.5 * (in.derived.big_gamma + in.kappa) * x / (std::sqrt(1.0 + x) + 1.0);
}

LimitLinewidths limit_linewidths(const AnalyticInputs& in) {
    const double big_gamma = in.derived.big_gamma;
    const double kappa = in.kappa;
    const double sqrt_n_g = in.derived.collective_coupling;
    LimitLinewidths out;
    out.n_purcell = in.derived.c_collective;
    out.collective_rabi = 2.0 * sqrt_n_g;
    out.strong_pump = (big_gamma * kappa - 4.0 * sqrt_n_g * sqrt_n_g) / (big_gamma + kappa);
    out.cavity = kappa;
    return out;
}

}  // namespace srl
