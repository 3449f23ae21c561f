#pragma once

#include "fracdrift/basis.hpp"
#include "fracdrift/estimator.hpp"
#include "fracdrift/sde.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fracdrift {

/// Raised for malformed or inconsistent experiment configurations.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// T = scale * N^{-1/(4H)}.
struct HorizonRule {
    double scale = 1.0;
};

/// m = max(1, round(scale * N^{(2H-1)/(4H(3+2 beta))})).
struct DimensionRule {
    double beta = 1.0;
    double scale = 1.0;
};

struct ExperimentConfig {
    std::string drift_id = "linear";
    double drift_rate = 1.0;
    double hurst = 0.7;
    double sigma = 1.0;
    double interval_lo = -1.0;
    double interval_hi = 1.0;
    /// Either a fixed step count per path or steps per unit time.
    std::optional<std::size_t> n_steps;
    double steps_per_unit = 256.0;
    std::size_t min_steps = 16;
    std::vector<std::size_t> n_paths{100};
    std::vector<double> horizons{1.0};
    std::optional<HorizonRule> horizon_rule;
    std::vector<std::size_t> dimensions{5};
    std::optional<DimensionRule> dimension_rule;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
    InitMode init = StationaryStart{};
    FbmMethod method = FbmMethod::circulant;
    EstimatorConfig estimator;
    DensityMode density_mode = DensityMode::known;
    double estimated_floor = 1e-3;
    /// Reference ensemble for drifts or start modes without a closed-form density.
    std::size_t reference_paths = 2000;
    std::size_t reference_dimension = 31;
    double reference_horizon = 10.0;

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& document);
    static ExperimentConfig load(const std::filesystem::path& path);
};

struct Cell {
    std::size_t n_paths = 0;
    double horizon = 0.0;
    std::size_t dimension = 0;
    std::size_t n_steps = 0;

    std::string label() const;
};

/// Full factorial over N x T x m in that nesting order; rules resolve per N.
std::vector<Cell> expand_cells(const ExperimentConfig& config);

/// V(N, T) = N^{-1/2} T^{-1} + T^{2H-1}.
double V_N_T(std::size_t n_paths, double horizon, double hurst);

struct RiskRow {
    std::size_t n_paths = 0;
    double horizon = 0.0;
    std::size_t dimension = 0;
    std::size_t replication = 0;
    double risk_fixed_point = 0.0;
    double risk_oracle = 0.0;
    double bias_term = 0.0;
    double v_n_t = 0.0;
    bool delta_c = false;
    bool delta_l = false;
    std::size_t iterations = 0;
    double wall_time = 0.0;
    /// "ok", "diverged", or the failure message of the row.
    std::string status = "ok";

    bool failed() const { return status != "ok" && status != "diverged"; }
};

/// Density against which risks are measured and, in known mode, the estimate is represented.
struct ReferenceDensity {
    DensityModel density;
    bool closed_form = false;
};

ReferenceDensity reference_density(const ExperimentConfig& config);

/// Seed of replication `replication` in cell (N, T); independent of m, density mode and cell order.
std::uint64_t replication_seed(std::uint64_t master, const Cell& cell, std::size_t replication);

SdeConfig ensemble_config(const ExperimentConfig& config, const Cell& cell, std::uint64_t seed);

struct CellOutcome {
    RiskRow row;
    std::optional<EstimateResult> estimate;
    std::optional<Coefficients> oracle;
    std::optional<SdeEnsemble> ensemble;
};

/// Simulates one ensemble, runs the oracle and fixed-point estimators and
/// scores both against b0. Failures are recorded in row.status.
CellOutcome run_cell(const ExperimentConfig& config, const Cell& cell, std::size_t replication,
                     const ReferenceDensity& reference, bool keep_ensemble = false);

RiskRow run_estimate(const ExperimentConfig& config, const Cell& cell, std::size_t replication);

struct SweepOptions {
    std::optional<std::filesystem::path> out_dir;
    bool dump_paths = false;
    bool write_estimates = true;
};

/// All cells x replications on the worker pool; rows are returned and written
/// to out_dir/risk.csv in canonical (cell, replication) order, flushed as the
/// completed prefix grows.
std::vector<RiskRow> risk_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

struct CellSummary {
    std::size_t n_paths = 0;
    double horizon = 0.0;
    std::size_t dimension = 0;
    std::size_t rows = 0;
    double median_fixed_point = 0.0;
    double mean_fixed_point = 0.0;
    double median_oracle = 0.0;
    double mean_oracle = 0.0;
    double bias_term = 0.0;
    double v_n_t = 0.0;
    double truncation_rate = 0.0;
};

/// Median and mean per cell over non-failed rows, in first-appearance order.
std::vector<CellSummary> summarize(const std::vector<RiskRow>& rows);

double median(std::vector<double> values);

void write_risk_csv(const std::vector<RiskRow>& rows, const std::filesystem::path& path);
std::vector<RiskRow> read_risk_csv(const std::filesystem::path& path);
void write_summary_csv(const std::vector<CellSummary>& summary, const std::filesystem::path& path);

}  // namespace fracdrift
