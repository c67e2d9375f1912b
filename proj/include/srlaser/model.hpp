#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace srl {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// External configuration and CSV use Hz; everything internal is rad/s.
[[nodiscard]] constexpr double hz_to_rad(double hz) noexcept { return hz * kTwoPi; }
[[nodiscard]] constexpr double rad_to_hz(double rad) noexcept { return rad / kTwoPi; }

/// Maximal repumping rate reported for the Sr-88 experiment.
inline constexpr double kEtaExpHz = 23.87e3;

/// Rates and counts of the atoms + lossy cavity master equation, all in rad/s.
///
/// omega_a and omega_c are measured in a common rotating frame; only their
/// difference enters the dynamics.
struct SystemParams {
    std::int64_t n_atoms = 1;
    double omega_a = 0.0;
    double omega_c = 0.0;
    double g = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    double chi = 0.0;

    /// Throws InputError on negative rates, N < 1 or non-finite fields.
    /// g = 0 is allowed (decoupled test systems).
    void validate() const;

    [[nodiscard]] double detuning() const noexcept { return omega_a - omega_c; }

    bool operator==(const SystemParams&) const = default;
};

struct DerivedRates {
    double purcell = 0.0;              // 4 g^2 / kappa
    double big_gamma = 0.0;            // eta + gamma + 2 chi
    double c_collective = 0.0;         // N * purcell
    std::optional<double> d0;          // (eta - gamma)/(eta + gamma); empty when eta + gamma = 0
    double collective_coupling = 0.0;  // sqrt(N) g
    double kappa = 0.0;
    double n_atoms = 0.0;
};

[[nodiscard]] DerivedRates derived(const SystemParams& params);

struct Preset {
    std::string name;
    SystemParams params;
};

/// Resonant parameter sets of the two strontium transitions with eta = chi = 0 and N = 1.
[[nodiscard]] SystemParams preset(std::string_view name);
[[nodiscard]] std::vector<Preset> presets();

/// Applies a JSON config ({"preset", "n_atoms", "eta_hz", "chi_hz", "g_hz",
/// "kappa_hz", "gamma_hz", "detuning_hz"}) on top of `base`. Explicit fields
/// override the preset, the preset overrides `base`.
[[nodiscard]] SystemParams params_from_json(const nlohmann::json& cfg, SystemParams base = {});
[[nodiscard]] nlohmann::json params_to_json(const SystemParams& params);

}  // namespace srl
