// SPDX-License-Identifier: Apache-2.0
//
// Scenario construction, Monte Carlo trials, SNR sweeps and report
// serialization.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cogpilot/allocation.hpp"
#include "cogpilot/estimators.hpp"
#include "cogpilot/pilot_signaling.hpp"

#include <json.hpp>

namespace cogpilot {

inline constexpr const char* kVersion = "cogpilot 0.1.0";

struct ScenarioConfig {
    int num_antennas = 10;            // "M" in config files
    int num_cognitive_users = 20;
    int reuse_count = 3;
    int tau = 4;
    double total_pilot_power = 0.0;   // 0 -> defaults to tau
    SpreadLaw spread_law = SpreadLaw::UniformSpread;
    double spacing = 0.5;
    double sector_width_deg = 30.0;
    double sector_overlap_deg = 6.0;
    std::vector<double> snr_grid_db{10.0};
    long trials = 10000;
    std::uint64_t seed = 1;
    std::vector<EstimatorKind> estimators{EstimatorKind::MMSE};
    std::vector<Allocator> allocators{Allocator::RPA};
    std::optional<CmmseConfig> cmmse;
    double mpa_zeta_th = 1e30;
    double hpa_delta_p = 0.05;
    bool fixed_drop = true;
    int workers = 1;
    int num_groups = 4;               // UGPA virtual sectors
    int max_group_rank = 6;

    double pilot_power() const { return total_pilot_power > 0.0 ? total_pilot_power : tau; }
    void validate() const;
};

struct Scenario {
    UserSet users;
    PilotSequence pilot;
    TrainingMatrix training;
    int num_antennas = 0;
};

struct TrialResult {
    double primary_sq_err = 0.0;
    double primary_norm_sq = 0.0;
    double cognitive_sq_err = 0.0;   // summed over pilot-sharing CUs
    double cognitive_norm_sq = 0.0;
};

struct MseCell {
    double snr_db = 0.0;
    Allocator allocator = Allocator::RPA;
    EstimatorKind estimator = EstimatorKind::MMSE;
    double primary_mse_db = 0.0;
    double cognitive_mse_db = 0.0;
    long trials = 0;
    double stderr_primary = 0.0;
    double stderr_cognitive = 0.0;
};

struct MseReport {
    std::vector<MseCell> cells;
    nlohmann::json provenance;
};

// name <-> enum helpers shared by config parsing and reports
std::string to_string(Allocator a);
std::string to_string(EstimatorKind e);
std::string to_string(SpreadLaw law);
Allocator allocator_from_string(const std::string& s);
EstimatorKind estimator_from_string(const std::string& s);
SpreadLaw spread_law_from_string(const std::string& s);

nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig config_from_json(const nlohmann::json& j);

// Overlapping-sector geometry across a 120 degree serving sector;
// deterministic under the rng state.
Scenario build_scenario(const ScenarioConfig& cfg, Rng& rng);

// Precomputed per-(scenario, allocation, estimator, snr) machinery so a
// trial is a handful of small mat-vecs.
class TrialEngine {
  public:
    TrialEngine(const Scenario& scenario, const Allocation& allocation,
                EstimatorKind kind, double snr_db,
                const std::optional<CmmseConfig>& cmmse = std::nullopt);

    TrialResult run(Rng& rng) const;
    double noise_var() const { return noise_var_; }

  private:
    CMatrix l_primary_;                // sqrt factor of R_PP
    std::vector<CMatrix> l_contam_;    // sqrt factors of R_SP,j
    CMatrix l_cross_;                  // sqrt factor of R_PS
    std::vector<CMatrix> l_cognitive_; // sqrt factors of R_SS,j
    EstimatorFilter primary_filter_;
    std::vector<EstimatorFilter> cognitive_filters_;
    double noise_var_ = 0.0;
    double pilot_power_ = 1.0;
    int num_antennas_ = 0;
};

TrialResult run_trial(const Scenario& scenario, const Allocation& allocation,
                      EstimatorKind kind, double snr_db, Rng& rng,
                      const std::optional<CmmseConfig>& cmmse = std::nullopt);

// Run the configured allocator on a scenario (dispatch used by sweep,
// the CLI and the tests).
Allocation run_allocator(const Scenario& scenario, const ScenarioConfig& cfg,
                         Allocator which, double noise_var, Rng& rng);

MseReport sweep(const ScenarioConfig& cfg);

enum class ReportFormat { CSV, JSON };

void write_report(const MseReport& report, std::ostream& out, ReportFormat format);
void write_report(const MseReport& report, const std::string& path, ReportFormat format);

}  // namespace cogpilot
