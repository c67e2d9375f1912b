#pragma once

#include <optional>
#include <string>

#include "srlaser/cumulant.hpp"
#include "srlaser/model.hpp"

namespace srl {

/// Effective collective quantum numbers (J, M) of the atomic ensemble.
struct DickePoint {
    double j_eff = 0.0;
    double m_eff = 0.0;
    double j_over_n = 0.0;
    double m_over_n = 0.0;
    double j_squared = 0.0;  // <J^2> before the quadratic solve
    /// <J^2> came out negative (closure artifact) and was clamped to 0.
    bool clamped = false;
};

/// M = N <sz>/2 and J from J(J+1) = <J^2>, with
/// <J^2> = 3N/4 + N(N-1)/4 (4 Re p + <sz_j sz_k>). The zz correlation is not
/// tracked by the moment equations; it defaults to <sz>^2 unless supplied.
[[nodiscard]] DickePoint dicke_numbers(const MomentState& state, const SystemParams& params,
                                       std::optional<double> zz = std::nullopt);

/// Matrix element of J- between |J,M> and |J,M-1>.
[[nodiscard]] double lowering_amplitude(double j, double m);

/// Pumping-induced jump rates out of |J,M> (rad/s).
struct BranchRates {
    double up_in_j = 0.0;  // -> |J, M+1>
    double down_j = 0.0;   // -> |J-1, M+1>
    double up_j = 0.0;     // -> |J+1, M+1>

    [[nodiscard]] double total() const noexcept { return up_in_j + down_j + up_j; }
};

[[nodiscard]] BranchRates pump_branching(long n_atoms, double j, double m, double eta);

enum class RegimeLabel { subradiant, superradiant, superradiant_lasing, conventional_like };

[[nodiscard]] std::string to_string(RegimeLabel label);

struct Regime {
    RegimeLabel label = RegimeLabel::subradiant;
    double purcell = 0.0;
    double gamma = 0.0;
    double photon_threshold = 1.0;
    double photon_number = 0.0;
};

[[nodiscard]] Regime classify_regime(const MomentState& state, const SystemParams& params);

struct CollectiveThreshold {
    double n_threshold = 0.0;  // (kappa/g)^2, atoms needed for sqrt(N) g > kappa
    bool exceeded = false;
};

[[nodiscard]] CollectiveThreshold collective_threshold(const SystemParams& params);

}  // namespace srl
