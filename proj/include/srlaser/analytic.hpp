#pragma once

#include "srlaser/model.hpp"

namespace srl {

/// Inputs of the closed-form linewidth expressions (rates in rad/s).
struct AnalyticInputs {
    DerivedRates derived;
    double kappa = 0.0;
    double m_eff = 0.0;
    double n_atoms = 0.0;
};

[[nodiscard]] AnalyticInputs analytic_inputs(const SystemParams& params, double m_eff);

/// Mean-field / phase-diffusion linewidth
///   (1/2) (C+G)/(C d0 - G) * G/(eta+gamma) * 4 g^2 kappa/(kappa+G)^2,
/// C = N Gamma_c, G = eta + gamma + 2 chi. Throws InputError below the mean-field
/// threshold (C d0 <= G), where the expression changes sign.
[[nodiscard]] double tieri_linewidth(const AnalyticInputs& in, double eta, double gamma);

/// Second-order linewidth
///   (G+kappa)/2 [sqrt(1 + 4 (G/kappa - 2 M Gamma_c/kappa)/(G/kappa+1)^2) - 1].
/// Throws InputError on a negative radicand.
[[nodiscard]] double crossover_linewidth(const AnalyticInputs& in);

/// The radicand argument 4 (G/kappa - 2 M Gamma_c/kappa)/(G/kappa+1)^2.
[[nodiscard]] double crossover_radicand_argument(const AnalyticInputs& in);

struct LimitLinewidths {
    double n_purcell = 0.0;        // N Gamma_c
    double collective_rabi = 0.0;  // 2 sqrt(N) g
    double strong_pump = 0.0;      // (G kappa - 4 N g^2)/(G + kappa)
    double cavity = 0.0;           // kappa
};

[[nodiscard]] LimitLinewidths limit_linewidths(const AnalyticInputs& in);

}  // namespace srl
