#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "srlaser/model.hpp"

namespace srl {

enum class Spacing { log, linear };

struct EtaGrid {
    double min_hz = 1.0;
    double max_hz = 10.0;
    int points = 2;
    Spacing spacing = Spacing::log;

    /// Throws InputError on points < 2, min > max or log spacing with min <= 0.
    void validate() const;
    [[nodiscard]] std::vector<double> values_hz() const;
};

struct Observables {
    bool photons = true;
    bool dicke = true;
    bool linewidth = false;
    bool analytic = false;
};

struct SweepConfig {
    SystemParams base;
    std::vector<std::int64_t> n_list;
    EtaGrid eta_grid;
    Observables observables;
    std::string output_path;  // empty: no persistence
    int workers = 1;

    void validate() const;
};

struct SweepRow {
    std::int64_t n_atoms = 0;
    double eta_hz = 0.0;
    double photon_number = 0.0;
    double inversion = 0.0;
    double pair_corr_re = 0.0;
    double j_eff = 0.0;
    double m_eff = 0.0;
    double j_over_n = 0.0;
    double m_over_n = 0.0;
    std::string regime;
    std::optional<double> delta_nu_hz;
    std::optional<double> delta_nu_eq3_hz;
    std::optional<double> delta_nu_eq4_hz;
    std::string status = "ok";  // ok | solver_error | fit_error
};

inline constexpr const char* kSweepHeader =
    "n_atoms,eta_hz,photon_number,inversion,pair_corr_re,j_eff,m_eff,j_over_n,m_over_n,regime,"
    "delta_nu_hz,delta_nu_eq3_hz,delta_nu_eq4_hz,status";

/// Scientific notation with 9 significant digits, locale independent.
[[nodiscard]] std::string format_number(double x);
[[nodiscard]] std::string to_csv(const SweepRow& row);
/// Throws InputError on a malformed line.
[[nodiscard]] SweepRow parse_csv_row(const std::string& line);

/// Evaluates one (N, eta) cell; solver and fit failures end up in `status`.
[[nodiscard]] SweepRow evaluate_cell(const SystemParams& base, std::int64_t n_atoms, double eta_hz,
                                     const Observables& obs);

struct SweepSummary {
    std::vector<SweepRow> rows;
    std::size_t computed = 0;
    std::size_t reused = 0;
    std::size_t quarantined = 0;
    double wall_seconds = 0.0;
};

/// Runs every cell not already completed in output_path, then rewrites the CSV in
/// (N, eta) order and a `<output_path>.json` sidecar. Throws InputError before
/// any computation when the output path is not writable.
[[nodiscard]] SweepSummary run_grid(const SweepConfig& cfg);

/// Rows with status ok found in an existing CSV, keyed by (N, formatted eta).
/// Lines that do not parse are appended to `<path>.quarantine`.
struct Checkpoint {
    std::vector<SweepRow> rows;
    std::size_t quarantined = 0;
};
[[nodiscard]] Checkpoint load_checkpoint(const std::string& path);

[[nodiscard]] SweepConfig sweep_config_from_json(const nlohmann::json& cfg);
[[nodiscard]] nlohmann::json sweep_config_to_json(const SweepConfig& cfg);
/// FNV-1a over the canonical JSON dump of the configuration.
[[nodiscard]] std::string config_hash(const SweepConfig& cfg);

inline constexpr const char* kCodeVersion = "1.0.0";

}  // namespace srl
