#include "srlaser/dicke.hpp"

#include <cmath>
#include <limits>

#include "srlaser/error.hpp"

namespace srl {

DickePoint dicke_numbers(const MomentState& state, const SystemParams& params,
                         std::optional<double> zz) {
    if (!state.is_finite()) {
        throw InputError("dicke_numbers: non-finite moment state");
    }
    const double n = static_cast<double>(params.n_atoms);
    const double s = state.inversion;
    const double zz_val = zz.value_or(s * s);

    DickePoint out;
    out.m_eff = n * s / 2.0;
    double j2 = 0.75 * n + n * (n - 1.0) / 4.0 * (4.0 * state.pair_corr.real() + zz_val);
    if (j2 < 0.0) {
        j2 = 0.0;
        out.clamped = true;
    }
    out.j_squared = j2;
    out.j_eff = (std::sqrt(1.0 + 4.0 * j2) - 1.0) / 2.0;
    out.j_over_n = out.j_eff / n;
    out.m_over_n = out.m_eff / n;
    return out;
}

double lowering_amplitude(double j, double m) {
    if (!(j >= 0.0) || std::abs(m) > j) {
        throw InputError("lowering_amplitude: requires -J <= M <= J");
    }
    return std::sqrt((j - m + 1.0) * (j + m));
}

BranchRates pump_branching(long n_atoms, double j, double m, double eta) {
    const double n = static_cast<double>(n_atoms);
    if (n_atoms < 1 || !(j >= 0.0) || j > n / 2.0 || std::abs(m) > j || !(eta >= 0.0)) {
        throw InputError("pump_branching: (J, M) outside the Dicke triangle");
    }
    auto integral = [](double x) { return std::abs(x - std::round(x)) < 1e-9; };
    if (!integral(n / 2.0 - j) || !integral(j - m)) {
        throw InputError("pump_branching: N/2 - J and J - M must be integers");
    }
    BranchRates out;
    out.up_j = eta * (n - 2.0 * j) * (j + m + 1.0) * (j + m + 2.0) /
               (4.0 * (j + 1.0) * (2.0 * j + 1.0));
    if (j == 0.0) {
        return out;
    }
    out.up_in_j = eta * (2.0 + n) * (j - m) * (j + m + 1.0) / (4.0 * j * (j + 1.0));
    out.down_j = eta * (n + 2.0 * j + 2.0) * (j - m) * (j - m - 1.0) / (4.0 * j * (2.0 * j + 1.0));
    return out;
}

std::string to_string(RegimeLabel label) {
    switch (label) {
        case RegimeLabel::subradiant: return "subradiant";
        case RegimeLabel::superradiant: return "superradiant";
        case RegimeLabel::superradiant_lasing: return "superradiant_lasing";
        case RegimeLabel::conventional_like: return "conventional-like";
    }
    return "unknown";
}

Regime classify_regime(const MomentState& state, const SystemParams& params) {
    if (!std::isfinite(state.photon_number)) {
        throw InputError("classify_regime: photon number is not finite");
    }
    Regime out;
    out.purcell = derived(params).purcell;
    out.gamma = params.gamma;
    out.photon_number = state.photon_number;

    const double n = state.photon_number;
    if (params.eta < out.purcell) {
        out.label = RegimeLabel::subradiant;
    } else if (n < out.photon_threshold) {
        out.label = RegimeLabel::superradiant;
    } else if (params.eta > params.gamma) {
        out.label = RegimeLabel::superradiant_lasing;
    } else {
        out.label = RegimeLabel::conventional_like;
    }
    return out;
}

CollectiveThreshold collective_threshold(const SystemParams& params) {
    CollectiveThreshold out;
    if (params.g <= 0.0) {
        out.n_threshold = std::numeric_limits<double>::infinity();
        return out;
    }
    const double ratio = params.kappa / params.g;
    out.n_threshold = ratio * ratio;
    out.exceeded = static_cast<double>(params.n_atoms) > out.n_threshold;
    return out;
}

}  // namespace srl
