#include "srlaser/model.hpp"

#include <cmath>

#include "srlaser/error.hpp"

namespace srl {

namespace {

void require_rate(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw InputError(std::string("rate '") + name + "' must be finite and >= 0");
    }
}

}  // namespace

void SystemParams::validate() const {
    if (n_atoms < 1) {
        throw InputError("n_atoms must be >= 1");
    }
    if (!std::isfinite(omega_a) || !std::isfinite(omega_c)) {
        throw InputError("omega_a and omega_c must be finite");
    }
    require_rate(g, "g");
    require_rate(kappa, "kappa");
    require_rate(gamma, "gamma");
    require_rate(eta, "eta");
    require_rate(chi, "chi");
}

DerivedRates derived(const SystemParams& params) {
    DerivedRates out;
    const double n = static_cast<double>(params.n_atoms);
    out.purcell = params.kappa > 0.0 ? 4.0 * params.g * params.g / params.kappa : 0.0;
    out.big_gamma = params.eta + params.gamma + 2.0 * params.chi;
    out.c_collective = n * out.purcell;
    if (params.eta + params.gamma > 0.0) {
        out.d0 = (params.eta - params.gamma) / (params.eta + params.gamma);
    }
    out.collective_coupling = std::sqrt(n) * params.g;
    out.kappa = params.kappa;
    out.n_atoms = n;
    return out;
}

std::vector<Preset> presets() {
    SystemParams sr88;
    sr88.gamma = hz_to_rad(7.5e3);
    sr88.kappa = hz_to_rad(160e3);
    sr88.g = hz_to_rad(10.6e3);

    SystemParams sr87;
    sr87.gamma = hz_to_rad(1e-3);
    sr87.kappa = hz_to_rad(160e3);
    sr87.g = hz_to_rad(2.41);

    return {{"sr88", sr88}, {"sr87", sr87}};
}

SystemParams preset(std::string_view name) {
    for (const auto& p : presets()) {
        if (p.name == name) {
            return p.params;
        }
    }
    throw InputError("unknown preset '" + std::string(name) + "' (known: sr88, sr87)");
}

SystemParams params_from_json(const nlohmann::json& cfg, SystemParams base) {
    if (!cfg.is_object()) {
        throw InputError("config must be a JSON object");
    }
    SystemParams p = base;
    try {
        if (cfg.contains("preset")) {
            p = preset(cfg.at("preset").get<std::string>());
        }
        if (cfg.contains("n_atoms")) p.n_atoms = cfg.at("n_atoms").get<std::int64_t>();
        if (cfg.contains("eta_hz")) p.eta = hz_to_rad(cfg.at("eta_hz").get<double>());
        if (cfg.contains("chi_hz")) p.chi = hz_to_rad(cfg.at("chi_hz").get<double>());
        if (cfg.contains("g_hz")) p.g = hz_to_rad(cfg.at("g_hz").get<double>());
        if (cfg.contains("kappa_hz")) p.kappa = hz_to_rad(cfg.at("kappa_hz").get<double>());
        if (cfg.contains("gamma_hz")) p.gamma = hz_to_rad(cfg.at("gamma_hz").get<double>());
        if (cfg.contains("detuning_hz")) {
            p.omega_a = hz_to_rad(cfg.at("detuning_hz").get<double>());
            p.omega_c = 0.0;
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed config: ") + e.what());
    }
    p.validate();
    return p;
}

nlohmann::json params_to_json(const SystemParams& params) {
    return {
        {"n_atoms", params.n_atoms},
        {"g_hz", rad_to_hz(params.g)},
        {"kappa_hz", rad_to_hz(params.kappa)},
        {"gamma_hz", rad_to_hz(params.gamma)},
        {"eta_hz", rad_to_hz(params.eta)},
        {"chi_hz", rad_to_hz(params.chi)},
        {"detuning_hz", rad_to_hz(params.detuning())},
    };
}

}  // namespace srl
